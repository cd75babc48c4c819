//! The limiting multi-level Meijer-G kernels G_{jℓ}(ξ, η) of a p-chain, their
//! correlation determinants and scaling weights.
//!
//! G_{jℓ} splits into a double integral with 1/(1 − u + v), evaluated as
//! ∫₀¹ G_u(tη)G_v(tξ) dt, plus finitely many residues in v; the alternative form divides
//! the ∇K double integral by (−1)^ℓη − (−1)^jξ.

mod compare;
mod product;

pub use compare::{
    bgs3_kernel, kz_kernel, separation_block, separation_reference, separation_scan, Bgs3Label, SeparationScaling,
    SeparationScan,
};
pub use product::{product_integral, product_series};

use rayon::prelude::*;
use rug::{Float, Rational};

use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx, PrecisionContext};
use crate::linalg::CMat;
use crate::meijer::{meijer_series_deltas, richardson, MeijerSeriesSpec, ResonancePolicy, PERTURBATION_STEP, RESONANCE_TOL};
use crate::parametrix::{build_context, ChainExponents, ParametrixContext};

/// Below this |ξ − η| the same-parity residue sum is expanded in ln(ξ/η).
const DIAGONAL_SERIES: f64 = 1e-4;

/// Evaluation route for G_{jℓ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelRoute {
    /// t-integral of two single Mellin–Barnes functions plus the residue correction.
    ContourProduct,
    /// Exact double residue series of the 1/(1 − u + v) term plus the residue correction.
    ResidueCorrected,
    /// The ∇K form divided by the parity denominator.
    DoubleResidue,
}

/// Exponents, parametrix constants and scaling weights of a Meijer-G field.
#[derive(Debug, Clone)]
pub struct FieldParams {
    pub exps: ChainExponents,
    pub pc: ParametrixContext,
    /// ϖ_j = (p+1)(a_{1j} − a_j/2), exact in the binary value of the inputs.
    pub varpi: Vec<Rational>,
    /// κ_{jℓ} = ϖ_j − ϖ_ℓ.
    pub kappa: Vec<Vec<Rational>>,
}

impl FieldParams {
    pub fn new(a: Vec<f64>, ctx: &PrecisionContext) -> Result<FieldParams> {
        let exps = ChainExponents::new(a)?;
        let (varpi, kappa) = exact_weights(&exps);
        let pc = build_context(exps.clone(), ctx)?;
        Ok(FieldParams { exps, pc, varpi, kappa })
    }

    pub fn p(&self) -> usize {
        self.exps.p()
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.pc.ctx
    }

    pub fn with_ctx(&self, ctx: &PrecisionContext) -> Result<FieldParams> {
        FieldParams::new(self.exps.a().to_vec(), ctx)
    }

    fn check_levels(&self, j: usize, l: usize) -> Result<()> {
        let p = self.p();
        if j == 0 || l == 0 || j > p || l > p {
            return Err(NumError::Invalid(format!("levels ({j}, {l}) outside 1..={p}")));
        }
        Ok(())
    }
}

fn exact_weights(exps: &ChainExponents) -> (Vec<Rational>, Vec<Vec<Rational>>) {
    let p = exps.p();
    let a: Vec<Rational> = exps.a().iter().map(|&x| Rational::from_f64(x).expect("finite exponent")).collect();
    let mut varpi = Vec::with_capacity(p);
    let mut cum = Rational::new();
    for aj in &a {
        cum += aj;
        let half = Rational::from(aj / 2u32);
        varpi.push(Rational::from(&cum - &half) * (p as u32 + 1));
    }
    let kappa = (0..p).map(|j| (0..p).map(|l| Rational::from(&varpi[j] - &varpi[l])).collect()).collect();
    (varpi, kappa)
}

/// A_1..A_{p+1} in exact arithmetic: A_1 = −Σ_{ℓ=0}^{p} a_{1ℓ}, A_{j+1} = A_j + (p+1)a_j.
pub fn exact_big_a(exps: &ChainExponents) -> Vec<Rational> {
    let p = exps.p();
    let a: Vec<Rational> = exps.a().iter().map(|&x| Rational::from_f64(x).expect("finite exponent")).collect();
    let mut cum = vec![Rational::new()];
    for aj in &a {
        let next = Rational::from(cum.last().unwrap() + aj);
        cum.push(next);
    }
    let mut a1 = Rational::new();
    for c in &cum {
        a1 -= c;
    }
    let mut out = vec![a1];
    for aj in &a {
        let next = Rational::from(out.last().unwrap() + Rational::from(aj * (p as u32 + 1)));
        out.push(next);
    }
    out
}

/// (ϖ, κ) of the field.
pub fn scaling_weights(fp: &FieldParams) -> (Vec<Rational>, Vec<Vec<Rational>>) {
    (fp.varpi.clone(), fp.kappa.clone())
}

/// G_u(η): Π_{s<ℓ}Γ(u − a_{1s})/Π_{s≥ℓ}Γ(1 + a_{1s} − u) η^{−u}.
pub fn u_spec(exps: &ChainExponents, l: usize) -> Result<MeijerSeriesSpec> {
    let cum = exps.cumulative();
    let num: Vec<f64> = cum[..l].iter().map(|c| -c).collect();
    let den: Vec<f64> = cum[l..].iter().map(|c| -c).collect();
    MeijerSeriesSpec::from_lists(&num, &den)
}

/// G_v(ξ): Π_{s≥j}Γ(a_{1s} − v)/Π_{s<j}Γ(1 − a_{1s} + v) ξ^{v}, written in w = −v.
pub fn v_spec(exps: &ChainExponents, j: usize) -> Result<MeijerSeriesSpec> {
    let cum = exps.cumulative();
    MeijerSeriesSpec::from_lists(&cum[j..], &cum[..j])
}

/// True when the factorized routes of G_{jℓ} need a perturbed pack: some a_{km} with
/// m ≤ ℓ−1 or k ≥ j+1 lies near an integer.
pub fn needs_perturbation(exps: &ChainExponents, j: usize, l: usize) -> bool {
    let p = exps.p();
    (1..=p).any(|k| {
        (k..=p).any(|m| {
            if m + 1 > l && k < j + 1 {
                return false;
            }
            let s = exps.a_sum(k, m);
            (s - s.round()).abs() < RESONANCE_TOL
        })
    })
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// −Σ_{s=j}^{ℓ−1} res_{v=a_{1s}} Π π/sin(π(a_{1s'} − v)) (ξ/η)^v/((−1)^{j+ℓ}ξ − η), nonzero for j < ℓ.
///
/// The v-contour leaves these poles on its right, so they are encircled clockwise.
pub fn residue_correction(exps: &ChainExponents, j: usize, l: usize, xi: f64, eta: f64, prec: u32) -> Result<Cx> {
    if j >= l {
        return Ok(Cx::zero(prec));
    }
    if !(xi > 0.0 && eta > 0.0) {
        return Err(NumError::Domain(format!("residue correction needs ξ, η > 0, got ({xi}, {eta})")));
    }
    let pi_p = pi(prec);
    let cum = exps.cumulative();
    // a_{1s'} − a_{1s} from the exponents themselves to avoid cancellation
    let diff = |s2: usize, s: usize| if s2 > s { exps.a_sum(s + 1, s2) } else { -exps.a_sum(s2 + 1, s) };
    let mut res = Vec::new();
    for s in j..l {
        // residue −Π_{s'≠s} π/sin(π(a_{1s'} − a_{1s})), taken clockwise
        let mut r = Float::with_val(prec, 1);
        for s2 in j..l {
            if s2 != s {
                let x = Float::with_val(prec, &pi_p * diff(s2, s));
                r *= Float::with_val(prec, &pi_p / x.sin());
            }
        }
        res.push((cum[s], r));
    }
    let x = Float::with_val(prec, Float::with_val(prec, xi).ln() - Float::with_val(prec, eta).ln());
    let same = (j + l) % 2 == 0;
    if same && (xi - eta).abs() < DIAGONAL_SERIES * eta.max(xi) {
        // Σ r_s e^{a_s x} = x Σ_{k≥1} m_k x^{k−1}/k!, and ξ − η = η(e^x − 1)
        let mut acc = Float::new(prec);
        let mut xk = Float::with_val(prec, 1);
        let mut fact = Float::with_val(prec, 1);
        for k in 1..200u32 {
            fact *= k;
            let mut m = Float::new(prec);
            for (a, r) in &res {
                m += Float::with_val(prec, r * Float::with_val(prec, a).pow_u(k));
            }
            let term = Float::with_val(prec, &m * &xk) / &fact;
            acc += &term;
            if k > 4 && (term.is_zero() || crate::gammakit::log2_float(&term.clone().abs()) < crate::gammakit::log2_float(&acc.clone().abs()) - prec as f64) {
                break;
            }
            xk *= &x;
        }
        let ratio = if x.is_zero() {
            Float::with_val(prec, 1)
        } else {
            Float::with_val(prec, &x / Float::with_val(prec, x.exp_m1_ref()))
        };
        let v = acc * ratio / eta;
        return Ok(Cx::from_real(v));
    }
    let mut num = Float::new(prec);
    for (a, r) in &res {
        num += Float::with_val(prec, r * Float::with_val(prec, &x * *a).exp());
    }
    let den = parity(j + l) * xi - eta;
    Ok(Cx::from_real(num / den))
}

trait PowU {
    fn pow_u(self, n: u32) -> Float;
}

impl PowU for Float {
    fn pow_u(self, n: u32) -> Float {
        let mut acc = Float::with_val(self.prec(), 1);
        for _ in 0..n {
            acc *= &self;
        }
        acc
    }
}

fn factorized(
    j: usize,
    l: usize,
    xi: f64,
    eta: f64,
    route: KernelRoute,
    exps: &ChainExponents,
    ctx: &PrecisionContext,
) -> Result<Cx> {
    let su = u_spec(exps, l)?;
    let sv = v_spec(exps, j)?;
    let d = match route {
        KernelRoute::ContourProduct => product_integral(&su, eta, &sv, xi, ctx)?,
        _ => product_series(&su, eta, &sv, xi, ctx)?,
    };
    let r = residue_correction(exps, j, l, xi, eta, ctx.bits() + 32)?;
    Ok((&d + &r.with_prec(ctx.bits())).with_prec(ctx.bits()))
}

fn check_args(xi: f64, eta: f64, allow_zero: bool) -> Result<()> {
    let ok = |x: f64| x.is_finite() && (x > 0.0 || (allow_zero && x == 0.0));
    if !ok(xi) || !ok(eta) {
        return Err(NumError::Domain(format!("kernel arguments must be positive, got ({xi}, {eta})")));
    }
    Ok(())
}

/// G_{jℓ}(ξ, η) by the chosen route. Only the t-integral route accepts ξ or η = 0.
pub fn limit_kernel_route(j: usize, l: usize, xi: f64, eta: f64, route: KernelRoute, fp: &FieldParams) -> Result<Cx> {
    fp.check_levels(j, l)?;
    check_args(xi, eta, route == KernelRoute::ContourProduct && j >= l)?;
    let ctx = *fp.ctx();
    match route {
        KernelRoute::DoubleResidue => double_route(j, l, xi, eta, fp),
        _ if needs_perturbation(&fp.exps, j, l) => {
            let wctx = PrecisionContext { mantissa_bits: ctx.bits() + 64, ..ctx };
            richardson(PERTURBATION_STEP, |eps| factorized(j, l, xi, eta, route, &fp.exps.perturbed(eps), &wctx))
                .map(|v| v.with_prec(ctx.bits()))
        }
        _ => factorized(j, l, xi, eta, route, &fp.exps, &ctx),
    }
}

/// G_{jℓ}(ξ, η): t-integral of G_u(tη)G_v(tξ) plus the residues at v = a_{1s}, j ≤ s < ℓ.
pub fn limit_kernel(j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Result<Cx> {
    limit_kernel_route(j, l, xi, eta, KernelRoute::ContourProduct, fp)
}

/// G_{jℓ}(ξ, η) with the 1/(1 − u + v) term summed as a double residue series.
pub fn limit_kernel_residue(j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Result<Cx> {
    limit_kernel_route(j, l, xi, eta, KernelRoute::ResidueCorrected, fp)
}

/// G_{jℓ}(ξ, η) = Σ_n k_n Σ_{i+i'=n−1} (−Δ_η)^i G_u · Δ_ξ^{i'} G_v / ((−1)^ℓη − (−1)^jξ).
pub fn limit_kernel_double(j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Result<Cx> {
    limit_kernel_route(j, l, xi, eta, KernelRoute::DoubleResidue, fp)
}

fn double_route(j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Result<Cx> {
    let den = parity(l) * eta - parity(j) * xi;
    if den.abs() <= 1e-14 * (xi + eta) {
        return Err(NumError::Singular(format!(
            "(−1)^ℓη = (−1)^jξ at (j, ℓ) = ({j}, {l}), ξ = η = {xi}; use a factorized route"
        )));
    }
    let p = fp.p();
    let ctx = *fp.ctx();
    let wctx = PrecisionContext { mantissa_bits: ctx.bits() + 32, ..ctx };
    let wp = wctx.bits();
    let su = u_spec(&fp.exps, l)?.with_resonance(ResonancePolicy::Perturb);
    let sv = v_spec(&fp.exps, j)?.with_resonance(ResonancePolicy::Perturb);
    let le = Cx::from_real(Float::with_val(wp, eta).ln());
    let lx = Cx::from_real(Float::with_val(wp, xi).ln());
    let du = meijer_series_deltas(&su, &le, p, &wctx)?;
    let dv = meijer_series_deltas(&sv, &lx, p, &wctx)?;
    let mut total = Cx::zero(wp);
    for n in 1..=p + 1 {
        let kn = &fp.pc.k_coeffs[n];
        let mut inner = Cx::zero(wp);
        for i in 0..n {
            let t = &du[i] * &dv[n - 1 - i];
            if i % 2 == 0 {
                inner += &t;
            } else {
                inner -= &t;
            }
        }
        total += &inner.scale(kn);
    }
    Ok(total.scale_f64(1.0 / den).with_prec(ctx.bits()))
}

/// ξ^{a_j/2 − a_{1j}} η^{a_ℓ/2 + a_{1,ℓ−1}} G_{jℓ}(ξ, η).
pub fn gauged_kernel(j: usize, l: usize, xi: f64, eta: f64, route: KernelRoute, fp: &FieldParams) -> Result<Cx> {
    let g = limit_kernel_route(j, l, xi, eta, route, fp)?;
    Ok(g.scale(&gauge_factor(j, l, xi, eta, fp)))
}

fn gauge_factor(j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Float {
    let prec = fp.ctx().bits();
    let e = &fp.exps;
    let ex = e.aj(j) / 2.0 - e.a_sum(1, j);
    let ey = e.aj(l) / 2.0 + e.a_sum(1, l - 1);
    let pw = |x: f64, y: f64| {
        if y == 0.0 {
            Float::with_val(prec, 1)
        } else {
            Float::with_val(prec, Float::with_val(prec, x).ln() * y).exp()
        }
    };
    pw(xi, ex) * pw(eta, ey)
}

/// Values of G_{jℓ} on a list of (ξ, η) points.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub j: usize,
    pub l: usize,
    pub route: KernelRoute,
    pub points: Vec<(f64, f64)>,
    /// Errors mark points the route cannot evaluate, e.g. the parity diagonal of the ∇K form.
    pub values: Vec<Result<Cx>>,
}

impl KernelGrid {
    pub fn flagged(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| v.is_err()).map(|(i, _)| i).collect()
    }
}

/// Evaluates G_{jℓ} at every point in parallel.
pub fn kernel_grid(j: usize, l: usize, points: &[(f64, f64)], route: KernelRoute, fp: &FieldParams) -> KernelGrid {
    let values = points.par_iter().map(|&(x, y)| limit_kernel_route(j, l, x, y, route, fp)).collect();
    KernelGrid { j, l, route, points: points.to_vec(), values }
}

/// A correlation determinant with a conditioning estimate.
#[derive(Debug, Clone)]
pub struct CorrelationValue {
    pub value: f64,
    /// ‖M‖·‖M⁻¹‖ in the max-entry norm, infinite for a singular matrix.
    pub condition: f64,
    pub near_singular: bool,
}

/// det[G_{ij}(ξ_{ir}, ξ_{js})] over the points of every level; empty levels drop out.
pub fn correlation_determinant(levels: &[Vec<f64>], route: KernelRoute, fp: &FieldParams) -> Result<CorrelationValue> {
    if levels.len() != fp.p() {
        return Err(NumError::Invalid(format!("{} point lists for a {}-level field", levels.len(), fp.p())));
    }
    let labels: Vec<(usize, f64)> =
        levels.iter().enumerate().flat_map(|(i, pts)| pts.iter().map(move |&x| (i + 1, x))).collect();
    if labels.iter().any(|&(_, x)| !(x > 0.0 && x.is_finite())) {
        return Err(NumError::Domain("correlation points must be positive".into()));
    }
    let n = labels.len();
    if n == 0 {
        return Ok(CorrelationValue { value: 1.0, condition: 1.0, near_singular: false });
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    let entries: Vec<Cx> = cells
        .par_iter()
        .map(|&(r, c)| {
            let (i, x) = labels[r];
            let (j, y) = labels[c];
            // the ∇K form cannot evaluate the diagonal of a level
            let rt = if route == KernelRoute::DoubleResidue && (i + j) % 2 == 0 && x == y {
                KernelRoute::ResidueCorrected
            } else {
                route
            };
            limit_kernel_route(i, j, x, y, rt, fp)
        })
        .collect::<Result<_>>()?;
    let m = CMat::from_fn(n, |r, c| entries[r * n + c].clone());
    let det = m.det();
    let norm = m.max_abs();
    let condition = match m.inverse() {
        Ok(inv) => norm * inv.max_abs() * n as f64,
        Err(_) => f64::INFINITY,
    };
    let near_singular = !(condition.is_finite() && condition < 1e12);
    Ok(CorrelationValue { value: det.re.to_f64(), condition, near_singular })
}

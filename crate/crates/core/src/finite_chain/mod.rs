//! The finite-n Cauchy chain: chain weights, bimoments, Cauchy biorthogonal polynomials
//! and the multi-level kernels built from them.
//!
//! Every chain variable is integrated with one trapezoid rule in ln x, and the Cauchy
//! couplings 1/(x + y) between consecutive variables become an m × m matrix contracted
//! level by level. Bimoments, transforms and kernels all use the same discrete measure.

mod kernels;
mod universality;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{fl, log2_float, PrecisionContext};
use crate::linalg::{lu_nopivot, RMat};
use crate::parametrix::ChainExponents;

pub use kernels::{correlation_density, correlation_density_reduced, finite_kernels, FiniteKernelSet};
pub use universality::{
    best_fit_c0, universality_compare, universality_compare_points, UniversalityRow, UniversalityTable, C0_P3,
};

/// A confining part V_j of the potential, evaluated in extended precision.
pub type VFn = Arc<dyn Fn(&Float) -> Float + Send + Sync>;

/// Lowest working precision for moment arithmetic.
pub const MIN_BITS: u32 = 256;
/// Bits of tail mass the node range leaves out on either side.
const TAIL_BITS: f64 = 96.0;
/// Target relative error of the bimoments.
const BIMOMENT_TOL: f64 = 1e-24;
/// Step ratio between the near-origin tail and the bulk of the rule.
const TAIL_STRETCH: f64 = 2.0;
/// ln(Nξ) around which the step changes.
const TAIL_START: f64 = -6.0;
const H_START: f64 = 0.5;
const H_MIN: f64 = 1.0 / 64.0;

/// U_j(x) = N·V_j(x) − a_j ln x, with V_j(x) = x unless replaced.
#[derive(Clone)]
pub struct Potential {
    pub exps: ChainExponents,
    /// The scaling parameter N.
    pub n_scale: f64,
    v: Vec<Option<VFn>>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let custom: Vec<usize> = (0..self.v.len()).filter(|&i| self.v[i].is_some()).map(|i| i + 1).collect();
        f.debug_struct("Potential")
            .field("a", &self.exps.a())
            .field("n_scale", &self.n_scale)
            .field("custom_v_levels", &custom)
            .finish()
    }
}

impl Potential {
    /// The Laguerre-type chain U_j(x) = Nx − a_j ln x.
    pub fn laguerre(a: Vec<f64>, n_scale: f64) -> Result<Potential> {
        let exps = ChainExponents::new(a)?;
        if exps.p() < 2 {
            return Err(NumError::Invalid("a chain weight needs p ≥ 2".into()));
        }
        if !(n_scale > 0.0 && n_scale.is_finite()) {
            return Err(NumError::Invalid(format!("N = {n_scale} must be positive")));
        }
        let p = exps.p();
        Ok(Potential { exps, n_scale, v: vec![None; p] })
    }

    /// Replaces V_j. The handle must grow faster than ln x at infinity.
    pub fn with_v(mut self, j: usize, v: VFn) -> Result<Potential> {
        if j == 0 || j > self.p() {
            return Err(NumError::Invalid(format!("level {j} outside 1..={}", self.p())));
        }
        self.v[j - 1] = Some(v);
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.exps.p()
    }

    pub fn is_laguerre(&self) -> bool {
        self.v.iter().all(Option::is_none)
    }

    /// U_j(x) for x > 0.
    pub fn u(&self, j: usize, x: &Float) -> Float {
        let p = x.prec();
        let v = match &self.v[j - 1] {
            Some(f) => f(x),
            None => x.clone(),
        };
        Float::with_val(p, &v * self.n_scale) - Float::with_val(p, x.ln_ref()) * self.exps.aj(j)
    }

    /// e^{−U_j(x)}.
    pub fn weight(&self, j: usize, x: &Float) -> Float {
        (-self.u(j, x)).exp()
    }

    /// 1 + min a_{kℓ}: the algebraic rate at which chain integrands vanish at the origin.
    fn origin_rate(&self) -> f64 {
        let p = self.p();
        let mut m = f64::INFINITY;
        for k in 1..=p {
            for l in k..=p {
                m = m.min(self.exps.a_sum(k, l));
            }
        }
        1.0 + m.min(0.0)
    }
}

/// The shared rule for the chain variables, with the level weights at its nodes.
#[derive(Debug, Clone)]
pub struct ChainGrid {
    pub h: f64,
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
    /// e^{−U_j} times the rule weight, per level.
    level: Vec<Vec<Float>>,
    /// 1/(ξ_i + ξ_k), row-major.
    coupling: Vec<Float>,
    /// Index of the first node; nodes with even index form the rule with step 2h.
    k_lo: i64,
}

impl ChainGrid {
    /// Trapezoid rule in u with s = ln(Nξ) = φ(u), over the range where the chain integrands
    /// are not negligible for polynomial factors up to the given degree. φ has slope one in
    /// the bulk and TAIL_STRETCH in the near-origin tail.
    pub fn new(pot: &Potential, h: f64, degree: usize, prec: u32) -> ChainGrid {
        // (Nξ)^δ below the range and (Nξ)^d e^{−Nξ} above it are both under 2^{−TAIL_BITS}
        let s_lo = -(TAIL_BITS * std::f64::consts::LN_2 / pot.origin_rate() + 5.0);
        let d = degree as f64 + 2.0;
        let s_hi = (2.0 * d + TAIL_BITS * std::f64::consts::LN_2 + 20.0).ln();
        let phi = |u: f64| u - (TAIL_STRETCH - 1.0) * (TAIL_START - u).exp().ln_1p();
        let (mut a, mut b) = (s_lo / TAIL_STRETCH - 10.0, 0.0);
        for _ in 0..100 {
            let c = 0.5 * (a + b);
            if phi(c) < s_lo {
                a = c;
            } else {
                b = c;
            }
        }
        let k_lo = (a / h).floor() as i64;
        let k_hi = (s_hi / h).ceil() as i64;
        let hf = fl(prec, h);
        let ln_n = Float::with_val(prec, pot.n_scale).ln();
        let stretch = fl(prec, TAIL_STRETCH - 1.0);
        let start = fl(prec, TAIL_START);
        let mut nodes = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for k in k_lo..=k_hi {
            let u = Float::with_val(prec, &hf * k);
            let e = Float::with_val(prec, &start - &u).exp();
            let s = Float::with_val(prec, &u - Float::with_val(prec, &stretch * Float::with_val(prec, e.ln_1p_ref())));
            // φ'(u) = 1 + (r − 1)·e/(1 + e)
            let dphi = Float::with_val(prec, &stretch * &e) / Float::with_val(prec, &e + 1u32) + 1u32;
            let x = (s - &ln_n).exp();
            weights.push(Float::with_val(prec, &x * &hf) * dphi);
            nodes.push(x);
        }
        let level = (1..=pot.p())
            .map(|j| nodes.iter().zip(&weights).map(|(x, w)| pot.weight(j, x) * w).collect())
            .collect();
        let m = nodes.len();
        let mut coupling = Vec::with_capacity(m * m);
        for xi in &nodes {
            for xk in &nodes {
                coupling.push(Float::with_val(prec, xi + xk).recip());
            }
        }
        ChainGrid { h, nodes, weights, level, coupling, k_lo }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn prec(&self) -> u32 {
        self.nodes[0].prec()
    }

    /// Rule weight times e^{−U_j} at every node, 1-based level.
    pub fn level_weights(&self, j: usize) -> &[Float] {
        &self.level[j - 1]
    }

    fn on_coarse(&self, i: usize) -> bool {
        (i as i64 - self.k_lo) % 2 == 0
    }

    /// out_k = ω_j(ξ_k) Σ_i v_i/(ξ_i + ξ_k): one Cauchy coupling into level j.
    pub fn couple(&self, v: &[Float], j: usize) -> Vec<Float> {
        let m = self.len();
        let p = self.prec();
        let w = self.level_weights(j);
        (0..m)
            .into_par_iter()
            .map(|k| {
                let mut s = Float::new(p);
                for i in 0..m {
                    s += Float::with_val(p, &v[i] * &self.coupling[i * m + k]);
                }
                s * &w[k]
            })
            .collect()
    }

    /// Σ_i v_i/(ξ_i + x) with the same sum on the 2h sub-rule as an error estimate.
    pub fn transform(&self, v: &[Float], x: &Float) -> (Float, Float) {
        let p = self.prec();
        let mut fine = Float::new(p);
        let mut coarse = Float::new(p);
        for (i, (vi, xi)) in v.iter().zip(&self.nodes).enumerate() {
            let t = Float::with_val(p, vi / Float::with_val(p, xi + x));
            if self.on_coarse(i) {
                coarse += &t;
            }
            fine += &t;
        }
        coarse *= 2u32;
        let err = Float::with_val(p, &fine - &coarse).abs();
        (fine, err)
    }

    /// Smallest node; transforms are only resolved well above it.
    pub fn smallest(&self) -> &Float {
        &self.nodes[0]
    }
}

/// η_p(x, y): the chain weight with the p − 2 internal variables integrated out.
pub fn eta_weight(x: f64, y: f64, pot: &Potential, ctx: &PrecisionContext) -> Result<Float> {
    if !(x > 0.0 && y > 0.0) {
        return Err(NumError::Domain(format!("chain weight needs x, y > 0, got ({x}, {y})")));
    }
    let prec = ctx.bits() + 32;
    let p = pot.p();
    let xf = Float::with_val(prec, x);
    let yf = Float::with_val(prec, y);
    let ends = pot.weight(1, &xf) * pot.weight(p, &yf);
    if p == 2 {
        return Ok(Float::with_val(ctx.bits(), ends / Float::with_val(prec, &xf + &yf)));
    }
    let mut prev: Option<Float> = None;
    let mut h = H_START;
    while h >= H_MIN {
        let grid = ChainGrid::new(pot, h, 0, prec);
        let mut v: Vec<Float> = grid
            .nodes
            .iter()
            .zip(grid.level_weights(2))
            .map(|(xi, w)| Float::with_val(prec, w / Float::with_val(prec, xi + &xf)))
            .collect();
        for j in 3..p {
            v = grid.couple(&v, j);
        }
        let (inner, _) = grid.transform(&v, &yf);
        let val = Float::with_val(prec, &ends * &inner);
        if let Some(pv) = &prev {
            let change = (Float::with_val(prec, &val - pv) / &val).abs().to_f64();
            if change * change <= ctx.tol() {
                return Ok(Float::with_val(ctx.bits(), &val));
            }
        }
        prev = Some(val);
        h /= 2.0;
    }
    Err(NumError::Convergence(format!("chain weight at ({x}, {y}) did not settle under rule refinement")))
}

/// Columns v^{(j)}_k = ξ_k^j ω_1(ξ_k) pushed through all p − 1 couplings.
fn moment_columns(grid: &ChainGrid, pot: &Potential, nmax: usize) -> Vec<Vec<Float>> {
    let prec = grid.prec();
    let w1 = grid.level_weights(1);
    let mut col: Vec<Float> = w1.to_vec();
    let mut out = Vec::with_capacity(nmax + 1);
    for _ in 0..=nmax {
        let mut v = col.clone();
        for j in 2..=pot.p() {
            v = grid.couple(&v, j);
        }
        out.push(v);
        for (c, x) in col.iter_mut().zip(&grid.nodes) {
            *c *= x;
        }
    }
    let _ = prec;
    out
}

fn bimoments_on(grid: &ChainGrid, pot: &Potential, nmax: usize) -> RMat {
    let prec = grid.prec();
    let cols = moment_columns(grid, pot, nmax);
    let mut i_mat = RMat::zeros(nmax + 1, nmax + 1, prec);
    for (j, v) in cols.iter().enumerate() {
        let mut pw: Vec<Float> = v.clone();
        for l in 0..=nmax {
            let mut s = Float::new(prec);
            for t in &pw {
                s += t;
            }
            *i_mat.get_mut(j, l) = s;
            for (t, x) in pw.iter_mut().zip(&grid.nodes) {
                *t *= x;
            }
        }
    }
    i_mat
}

fn max_rel_diff(a: &RMat, b: &RMat) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let d = Float::with_val(x.prec(), x - y).abs();
            (log2_float(&d) - log2_float(&x.clone().abs())).exp2()
        })
        .fold(0.0, f64::max)
}

/// Bimoments I_{jℓ}, 0 ≤ j, ℓ ≤ nmax, with the rule they settled on.
#[derive(Debug, Clone)]
pub struct Bimoments {
    pub matrix: RMat,
    pub grid: Arc<ChainGrid>,
    /// Largest relative change at the last halving of h.
    pub refinement_change: f64,
    /// Its square: the trapezoid error falls like e^{−c/h}, so halving h squares it.
    pub error_estimate: f64,
}

/// I_{jℓ} = ∬ x^j y^ℓ η_p(x, y) dx dy, halving h until the estimated relative error is
/// below 1e-24.
pub fn bimoments(pot: &Potential, nmax: usize, prec: u32) -> Result<Bimoments> {
    bimoments_from(pot, nmax, prec, H_START)
}

fn bimoments_from(pot: &Potential, nmax: usize, prec: u32, h_start: f64) -> Result<Bimoments> {
    let prec = prec.max(MIN_BITS);
    let mut h = h_start;
    let mut prev: Option<RMat> = None;
    while h >= H_MIN {
        let grid = ChainGrid::new(pot, h, nmax, prec);
        let m = bimoments_on(&grid, pot, nmax);
        if let Some(pm) = &prev {
            let change = max_rel_diff(&m, pm);
            if change * change <= BIMOMENT_TOL {
                let error_estimate = change * change;
                return Ok(Bimoments { matrix: m, grid: Arc::new(grid), refinement_change: change, error_estimate });
            }
        }
        prev = Some(m);
        h /= 2.0;
    }
    Err(NumError::Convergence("bimoments did not settle under rule refinement".into()))
}

/// Monic Cauchy biorthogonal polynomials ψ_n, φ_n with norms h_n, n ≤ nmax.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub pot: Potential,
    pub nmax: usize,
    pub bimoments: RMat,
    /// Δ₀ = 1, Δ₁, …, Δ_{nmax+1}.
    pub deltas: Vec<Float>,
    /// Ascending coefficients; the last one is 1.
    pub psi_coeffs: Vec<Vec<Float>>,
    pub phi_coeffs: Vec<Vec<Float>>,
    pub norms: Vec<Float>,
    pub grid: Arc<ChainGrid>,
    /// Bits cancelled in the worst elimination pivot.
    pub lost_bits: f64,
}

fn unit_lower_inverse(l: &RMat) -> RMat {
    let n = l.n;
    let p = l.prec();
    let mut inv = RMat::zeros(n, n, p);
    for i in 0..n {
        *inv.get_mut(i, i) = Float::with_val(p, 1);
        for j in 0..i {
            let mut s = Float::new(p);
            for k in j..i {
                s -= Float::with_val(p, l.get(i, k) * inv.get(k, j));
            }
            *inv.get_mut(i, j) = s;
        }
    }
    inv
}

/// The system from a bimoment matrix: I = L·D·Û, ψ_n from the rows of L⁻¹ and φ_n from
/// the columns of Û⁻¹, h_n = D_n.
fn system_from(pot: &Potential, b: Bimoments) -> Result<BiorthogonalSystem> {
    let i_mat = &b.matrix;
    let n = i_mat.n;
    let prec = i_mat.prec();
    let (l, u) = lu_nopivot(i_mat)?;
    let mut norms = Vec::with_capacity(n);
    let mut lost = 0.0f64;
    for k in 0..n {
        let piv = u.get(k, k).clone();
        if !(piv > 0) {
            return Err(NumError::Precision(format!("moment pivot {k} is not positive: {}", piv.to_f64())));
        }
        lost = lost.max(log2_float(i_mat.get(k, k)) - log2_float(&piv));
        norms.push(piv);
    }
    // Û = D⁻¹U, so Ûᵀ is unit lower
    let ut = RMat::from_fn(n, n, |i, j| if i >= j { Float::with_val(prec, u.get(j, i) / &norms[j]) } else { Float::new(prec) });
    let linv = unit_lower_inverse(&l);
    let utinv = unit_lower_inverse(&ut);
    let psi_coeffs = (0..n).map(|k| (0..=k).map(|i| linv.get(k, i).clone()).collect()).collect();
    let phi_coeffs = (0..n).map(|k| (0..=k).map(|i| utinv.get(k, i).clone()).collect()).collect();
    let mut deltas = vec![Float::with_val(prec, 1)];
    for h in &norms {
        let next = Float::with_val(prec, deltas.last().unwrap() * h);
        deltas.push(next);
    }
    Ok(BiorthogonalSystem {
        pot: pot.clone(),
        nmax: n - 1,
        bimoments: i_mat.clone(),
        deltas,
        psi_coeffs,
        phi_coeffs,
        norms,
        grid: b.grid,
        lost_bits: lost,
    })
}

/// ψ_n, φ_n and h_n for n ≤ nmax, doubling the precision while the pivots lose more than
/// half the mantissa.
pub fn biorthogonal_system(pot: &Potential, nmax: usize, ctx: &PrecisionContext) -> Result<BiorthogonalSystem> {
    let mut prec = ctx.bits().max(MIN_BITS);
    let mut h = H_START;
    for _ in 0..4 {
        let sys = system_from(pot, bimoments_from(pot, nmax, prec, h)?)?;
        if sys.lost_bits <= prec as f64 / 2.0 {
            return Ok(sys);
        }
        // the rule does not depend on the precision, so restart one step before it settled
        h = (2.0 * sys.grid.h).min(H_START);
        prec *= 2;
    }
    Err(NumError::Precision(format!("moment determinants lose more than half of {} bits", prec / 2)))
}

impl BiorthogonalSystem {
    pub fn prec(&self) -> u32 {
        self.bimoments.prec()
    }

    fn horner(c: &[Float], x: &Float) -> Float {
        let mut acc = Float::new(x.prec().max(c[0].prec()));
        for ck in c.iter().rev() {
            acc *= x;
            acc += ck;
        }
        acc
    }

    pub fn psi(&self, n: usize, x: &Float) -> Float {
        Self::horner(&self.psi_coeffs[n], x)
    }

    pub fn phi(&self, n: usize, x: &Float) -> Float {
        Self::horner(&self.phi_coeffs[n], x)
    }

    /// Σ_{j,ℓ} c_j d_ℓ I_{jℓ} for coefficient lists c, d.
    pub fn pair(&self, c: &[Float], d: &[Float]) -> Float {
        let p = self.prec();
        let mut s = Float::new(p);
        for (j, cj) in c.iter().enumerate() {
            for (l, dl) in d.iter().enumerate() {
                s += Float::with_val(p, cj * dl) * self.bimoments.get(j, l);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_chain_weight_closed_form() {
        let pot = Potential::laguerre(vec![0.0, 0.0], 1.0).unwrap();
        let v = eta_weight(1.0, 1.0, &pot, &PrecisionContext::with_bits(128)).unwrap();
        assert!((v.to_f64() - (-2.0f64).exp() / 2.0).abs() < 1e-17);
    }

    #[test]
    fn degree_zero_polynomials() {
        let pot = Potential::laguerre(vec![0.5, 0.5], 1.0).unwrap();
        let sys = biorthogonal_system(&pot, 3, &PrecisionContext::default()).unwrap();
        assert_eq!(sys.psi_coeffs[0].len(), 1);
        assert_eq!(sys.psi_coeffs[0][0], 1);
        assert_eq!(sys.phi_coeffs[0][0], 1);
        assert_eq!(sys.norms[0], *sys.bimoments.get(0, 0));
        for k in 0..=3 {
            assert_eq!(*sys.psi_coeffs[k].last().unwrap(), 1);
            assert_eq!(*sys.phi_coeffs[k].last().unwrap(), 1);
        }
    }

    #[test]
    fn norms_telescope() {
        let pot = Potential::laguerre(vec![0.5, 0.5], 1.0).unwrap();
        let sys = biorthogonal_system(&pot, 4, &PrecisionContext::default()).unwrap();
        let prod = Float::with_val(sys.prec(), &sys.norms[0] * &sys.norms[1]);
        assert_eq!(prod, sys.deltas[2]);
        for n in 0..=4 {
            assert!(sys.deltas[n + 1] > 0);
        }
    }

    #[test]
    fn custom_v_is_plumbed() {
        let pot = Potential::laguerre(vec![0.0, 0.0], 1.0)
            .unwrap()
            .with_v(1, Arc::new(|x: &Float| Float::with_val(x.prec(), x * 2u32)))
            .unwrap();
        assert!(!pot.is_laguerre());
        let v = eta_weight(1.0, 1.0, &pot, &PrecisionContext::with_bits(128)).unwrap();
        assert!((v.to_f64() - (-3.0f64).exp() / 2.0).abs() < 1e-17);
    }
}

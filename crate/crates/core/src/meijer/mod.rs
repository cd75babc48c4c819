//! Meijer G-functions of type G^{m,0}_{0,q} without upper parameters.
//!
//! A [`MeijerSeriesSpec`] describes the Mellin–Barnes integrand
//!
//!   F(s) = Π_{i<m} Γ(b_i + s) / Π_{i≥m} Γ(1 − b_i − s) · e^{iπσs} ζ^{−s},
//!
//! integrated upward along a contour leaving every pole on its left and divided
//! by 2πi. With L = log ζ − iπσ this is G^{m,0}_{0,q}(e^{L} | b).
//! Two evaluators are provided: the residue series and direct quadrature.

mod contour;

pub use contour::{meijer_contour, meijer_contour_log, ContourSpec};

use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{fl, gamma_real, pi, rgamma_real, Cx, PrecisionContext};

/// Distance from an integer below which two numerator parameters count as resonant.
pub const RESONANCE_TOL: f64 = 1e-8;
/// Perturbation step used by the resonance extrapolation.
pub const PERTURBATION_STEP: f64 = 1e-6;

/// What to do when two numerator poles coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonancePolicy {
    #[default]
    Error,
    /// Perturb the parameters and Richardson-extrapolate back to zero offset.
    Perturb,
}

#[derive(Debug, Clone)]
pub struct MeijerSeriesSpec {
    /// b₁..b_q; the first m belong to numerator Gammas.
    pub b_params: Vec<f64>,
    pub m: usize,
    /// σ in the phase factor e^{iπσs}.
    pub phase: f64,
    pub prefactor: Cx,
    pub resonance: ResonancePolicy,
}

impl MeijerSeriesSpec {
    pub fn new(b_params: Vec<f64>, m: usize) -> Result<Self> {
        if b_params.is_empty() {
            return Err(NumError::Invalid("Meijer spec needs q ≥ 1".into()));
        }
        if m > b_params.len() {
            return Err(NumError::Invalid(format!("m = {m} exceeds q = {}", b_params.len())));
        }
        if b_params.iter().any(|b| !b.is_finite()) {
            return Err(NumError::Invalid("non-finite Meijer parameter".into()));
        }
        Ok(MeijerSeriesSpec { b_params, m, phase: 0.0, prefactor: Cx::one(64), resonance: ResonancePolicy::Error })
    }

    /// Spec with the given numerator and denominator parameter lists.
    pub fn from_lists(num: &[f64], den: &[f64]) -> Result<Self> {
        let mut b = num.to_vec();
        b.extend_from_slice(den);
        Self::new(b, num.len())
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_prefactor(mut self, prefactor: Cx) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn with_resonance(mut self, policy: ResonancePolicy) -> Self {
        self.resonance = policy;
        self
    }

    pub fn q(&self) -> usize {
        self.b_params.len()
    }

    pub fn numerator(&self) -> &[f64] {
        &self.b_params[..self.m]
    }

    pub fn denominator(&self) -> &[f64] {
        &self.b_params[self.m..]
    }

    /// First pair of numerator parameters whose difference is within tolerance of an integer.
    pub fn resonant_pair(&self) -> Option<(usize, usize)> {
        let num = self.numerator();
        for i in 0..num.len() {
            for j in i + 1..num.len() {
                let d = num[i] - num[j];
                if (d - d.round()).abs() < RESONANCE_TOL {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// True when every residue family has integer exponents, so the function is single-valued.
    pub fn is_entire(&self) -> bool {
        self.numerator().iter().all(|b| (b - b.round()).abs() < RESONANCE_TOL)
    }

    fn perturbed(&self, eps: f64) -> MeijerSeriesSpec {
        let mut s = self.clone();
        for (i, b) in s.b_params.iter_mut().take(self.m).enumerate() {
            *b += eps * perturbation_direction(i);
        }
        s.resonance = ResonancePolicy::Error;
        s
    }
}

/// Distinct offsets with irrational pairwise differences.
pub fn perturbation_direction(i: usize) -> f64 {
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    PRIMES[i % PRIMES.len()].sqrt() * (1 + i / PRIMES.len()) as f64
}

/// Symmetric Richardson extrapolation of an analytic function of the offset ε:
/// S(h) = (V(h) + V(−h))/2 and V(0) ≈ (4S(h) − S(2h))/3.
pub fn richardson<T, F>(h: f64, mut eval: F) -> Result<T>
where
    F: FnMut(f64) -> Result<T>,
    T: Richardson,
{
    let s1 = T::average(&eval(h)?, &eval(-h)?);
    let s2 = T::average(&eval(2.0 * h)?, &eval(-2.0 * h)?);
    Ok(T::extrapolate(&s1, &s2))
}

/// Values that can be averaged and extrapolated.
pub trait Richardson {
    fn average(a: &Self, b: &Self) -> Self;
    fn extrapolate(s1: &Self, s2: &Self) -> Self;
}

impl Richardson for Cx {
    fn average(a: &Cx, b: &Cx) -> Cx {
        (a + b).scale_f64(0.5)
    }
    fn extrapolate(s1: &Cx, s2: &Cx) -> Cx {
        (&s1.scale_f64(4.0) - s2).scale(&(Float::with_val(s1.prec(), 1) / 3u32))
    }
}

impl<T: Richardson> Richardson for Vec<T> {
    fn average(a: &Self, b: &Self) -> Self {
        a.iter().zip(b).map(|(x, y)| T::average(x, y)).collect()
    }
    fn extrapolate(s1: &Self, s2: &Self) -> Self {
        s1.iter().zip(s2).map(|(x, y)| T::extrapolate(x, y)).collect()
    }
}

/// Log-argument L = log ζ − iπσ used by the series.
pub fn log_argument(zeta: &Cx, phase: f64, prec: u32) -> Cx {
    let mut l = zeta.with_prec(prec).ln();
    l.im -= Float::with_val(prec, pi(prec) * phase);
    l
}

/// Residues of one numerator Gamma: e^{b_i L} Σ_k c_k e^{kL}.
#[derive(Debug, Clone)]
pub struct ResidueFamily {
    pub exponent: Float,
    others: Vec<Float>,
    dens: Vec<Float>,
    start: usize,
    coeffs: Vec<Float>,
    prec: u32,
}

fn snap_integer(x: &Float, tol: f64) -> Option<i64> {
    let xf = x.to_f64();
    let r = xf.round();
    ((xf - r).abs() < tol).then_some(r as i64)
}

impl ResidueFamily {
    fn new(spec: &MeijerSeriesSpec, i: usize, prec: u32) -> Result<ResidueFamily> {
        let bi = fl(prec, spec.b_params[i]);
        let num = spec.numerator();
        let mut others = Vec::new();
        for (j, &b) in num.iter().enumerate() {
            if j != i {
                let d = fl(prec, b) - &bi;
                if let Some(n) = snap_integer(&d, RESONANCE_TOL) {
                    return Err(NumError::Resonance(format!(
                        "numerator parameters {} and {} differ by the integer {n}",
                        spec.b_params[i], b
                    )));
                }
                others.push(d);
            }
        }
        let mut start = 0usize;
        let mut dens = Vec::new();
        for &b in spec.denominator() {
            // 1/Γ(1 − b_d + b_i + k) vanishes for k ≤ b_d − b_i − 1 when that is a nonnegative integer
            let mut d = fl(prec, 1.0) - fl(prec, b) + &bi;
            if let Some(n) = snap_integer(&d, 1e-12) {
                d = Float::with_val(prec, n);
                if n <= 0 {
                    start = start.max((1 - n) as usize);
                }
            }
            dens.push(d);
        }
        let mut fam = ResidueFamily { exponent: bi, others, dens, start, coeffs: Vec::new(), prec };
        let c0 = fam.direct_coefficient(start)?;
        fam.coeffs.push(c0);
        Ok(fam)
    }

    /// c_k = (−1)^k/k! · Π Γ(b_{i'} − b_i − k) · Π 1/Γ(1 − b_d + b_i + k).
    fn direct_coefficient(&self, k: usize) -> Result<Float> {
        let p = self.prec;
        let ctx = PrecisionContext::with_bits(p);
        let mut c = Float::with_val(p, Float::factorial(k as u32)).recip();
        if k % 2 == 1 {
            c = -c;
        }
        for d in &self.others {
            c *= gamma_real(&Float::with_val(p, d - k as u32), &ctx)?;
        }
        for d in &self.dens {
            c *= rgamma_real(&Float::with_val(p, d + k as u32), &ctx);
        }
        Ok(c)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Coefficient c_k (zero below the start index).
    pub fn coeff(&mut self, k: usize) -> Float {
        if k < self.start {
            return Float::new(self.prec);
        }
        while self.coeffs.len() <= k - self.start {
            let kk = self.start + self.coeffs.len() - 1;
            let p = self.prec;
            let mut r = Float::with_val(p, -1) / (kk as u32 + 1);
            for d in &self.others {
                r /= Float::with_val(p, d - (kk as u32 + 1));
            }
            for d in &self.dens {
                r /= Float::with_val(p, d + kk as u32);
            }
            let next = r * self.coeffs.last().unwrap();
            self.coeffs.push(next);
        }
        self.coeffs[k - self.start].clone()
    }

    /// The terms c_k z^k from the start index until they are negligible.
    pub fn terms(&mut self, z: &Cx, growth_order: usize) -> Vec<Cx> {
        let p = self.prec;
        let zf = z.abs().to_f64();
        let mut zk = z.powi(self.start as i32);
        let mut out = Vec::new();
        let mut running_max = f64::NEG_INFINITY;
        let mut small = 0usize;
        let mut k = self.start;
        loop {
            let c = self.coeff(k);
            let term = zk.scale(&c);
            let lt = term.log2_abs();
            running_max = running_max.max(lt);
            out.push(term);
            let past_peak = (k as f64 + 1.0).powi(growth_order.max(1) as i32) > 2.0 * zf;
            if lt < running_max - p as f64 || c.is_zero() {
                small += 1;
            } else {
                small = 0;
            }
            if (small >= 10 && past_peak) || zf == 0.0 {
                break;
            }
            zk = &zk * z;
            k += 1;
        }
        out
    }

    /// Σ_k c_k (b_i + k)^r z^k for r = 0..=rmax together with log2 of the largest term.
    pub fn sums(&mut self, z: &Cx, rmax: usize, growth_order: usize) -> (Vec<Cx>, f64) {
        let p = self.prec;
        let mut out = vec![Cx::zero(p); rmax + 1];
        let zf = z.abs().to_f64();
        let mut zk = z.powi(self.start as i32);
        let mut running_max = f64::NEG_INFINITY;
        let mut small = 0usize;
        let mut k = self.start;
        loop {
            let c = self.coeff(k);
            let term = zk.scale(&c);
            let lt = term.log2_abs();
            if lt > running_max {
                running_max = lt;
            }
            let mut t = term;
            let w = Float::with_val(p, &self.exponent + k as u32);
            for (r, slot) in out.iter_mut().enumerate() {
                if r > 0 {
                    t = t.scale(&w);
                }
                *slot += &t;
            }
            let past_peak = (k as f64 + 1.0).powi(growth_order.max(1) as i32) > 2.0 * zf;
            if lt < running_max - p as f64 || c.is_zero() {
                small += 1;
            } else {
                small = 0;
            }
            if (small >= 10 && past_peak) || zf == 0.0 {
                break;
            }
            zk = &zk * z;
            k += 1;
        }
        (out, running_max)
    }
}

/// The full residue expansion of a spec at a fixed working precision.
#[derive(Debug, Clone)]
pub struct ResidueExpansion {
    pub families: Vec<ResidueFamily>,
    prefactor: Cx,
    phase: f64,
    growth_order: usize,
    prec: u32,
}

impl ResidueExpansion {
    pub fn new(spec: &MeijerSeriesSpec, prec: u32) -> Result<Self> {
        let families = (0..spec.m).map(|i| ResidueFamily::new(spec, i, prec)).collect::<Result<Vec<_>>>()?;
        Ok(ResidueExpansion {
            families,
            prefactor: spec.prefactor.with_prec(prec),
            phase: spec.phase,
            growth_order: spec.q().saturating_sub(1).max(1),
            prec,
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn prefactor(&self) -> &Cx {
        &self.prefactor
    }

    pub fn growth_order(&self) -> usize {
        self.growth_order
    }

    /// L = log ζ − iπσ at the working precision.
    pub fn phase_applied(&self, log_zeta: &Cx) -> Cx {
        let p = self.prec;
        let mut l = log_zeta.with_prec(p);
        l.im -= Float::with_val(p, pi(p) * self.phase);
        l
    }

    /// Δ^r G for r = 0..=rmax at the log-argument L (phase not yet applied),
    /// with the number of bits lost to cancellation.
    pub fn eval_log(&mut self, log_zeta: &Cx, rmax: usize) -> (Vec<Cx>, f64) {
        let p = self.prec;
        let mut l = log_zeta.with_prec(p);
        l.im -= Float::with_val(p, pi(p) * self.phase);
        let z = l.exp();
        let mut total = vec![Cx::zero(p); rmax + 1];
        let mut max_term = f64::NEG_INFINITY;
        for fam in &mut self.families {
            let (s, m) = fam.sums(&z, rmax, self.growth_order);
            let base = l.scale(&fam.exponent).exp();
            max_term = max_term.max(m + base.log2_abs());
            for (t, v) in total.iter_mut().zip(s) {
                *t += &(&v * &base);
            }
        }
        let out: Vec<Cx> = total.into_iter().map(|v| &v * &self.prefactor).collect();
        let lost = out
            .iter()
            .map(|v| max_term + self.prefactor.log2_abs() - v.log2_abs())
            .fold(0.0f64, |a, b| a.max(if b.is_finite() { b } else { 0.0 }));
        (out, lost)
    }
}

const GUARD_BITS: u32 = 32;

fn series_fixed(spec: &MeijerSeriesSpec, log_zeta: &Cx, rmax: usize, ctx: &PrecisionContext) -> Result<Vec<Cx>> {
    let mut wp = ctx.bits() + GUARD_BITS;
    for _ in 0..6 {
        let mut exp = ResidueExpansion::new(spec, wp)?;
        let (v, lost) = exp.eval_log(log_zeta, rmax);
        if lost + 8.0 < (wp - ctx.bits()) as f64 || v.iter().all(|x| x.is_zero()) {
            return Ok(v.into_iter().map(|x| x.with_prec(ctx.bits())).collect());
        }
        wp = ctx.bits() + lost.ceil() as u32 + GUARD_BITS;
    }
    Err(NumError::Precision("residue series cancellation exceeds the precision budget".into()))
}

/// Δ^r G(ζ) for r = 0..=rmax, where Δ = ζ d/dζ, given L₀ = log ζ on any sheet.
pub fn meijer_series_deltas(
    spec: &MeijerSeriesSpec,
    log_zeta: &Cx,
    rmax: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<Cx>> {
    if spec.m == 0 {
        return Ok(vec![ctx.zero(); rmax + 1]);
    }
    match (spec.resonant_pair(), spec.resonance) {
        (None, _) => series_fixed(spec, log_zeta, rmax, ctx),
        (Some((i, j)), ResonancePolicy::Error) => Err(NumError::Resonance(format!(
            "numerator parameters {} and {} differ by an integer",
            spec.b_params[i], spec.b_params[j]
        ))),
        (Some(_), ResonancePolicy::Perturb) => {
            let wctx = PrecisionContext { mantissa_bits: ctx.bits() + 64, ..*ctx };
            let v = richardson(PERTURBATION_STEP, |eps| series_fixed(&spec.perturbed(eps), log_zeta, rmax, &wctx))?;
            Ok(v.into_iter().map(|x| x.with_prec(ctx.bits())).collect())
        }
    }
}

/// Residue-series value at an explicit log-argument.
pub fn meijer_series_log(spec: &MeijerSeriesSpec, log_zeta: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    Ok(meijer_series_deltas(spec, log_zeta, 0, ctx)?.remove(0))
}

fn value_at_origin(spec: &MeijerSeriesSpec, ctx: &PrecisionContext) -> Result<Cx> {
    let mut total = ctx.zero();
    for i in 0..spec.m {
        let mut fam = ResidueFamily::new(spec, i, ctx.bits() + GUARD_BITS)?;
        let b = spec.b_params[i];
        let k0 = fam.start();
        for k in k0..k0 + 64 {
            let e = b + k as f64;
            if e > 1e-12 {
                break;
            }
            let c = fam.coeff(k);
            if c.is_zero() {
                continue;
            }
            if e < -1e-12 {
                return Err(NumError::Domain(format!("G diverges at ζ = 0 (exponent {e})")));
            }
            total += &Cx::from_real(c);
        }
    }
    Ok((&total * &spec.prefactor.with_prec(ctx.bits())).with_prec(ctx.bits()))
}

/// Residue-series value at ζ on the principal sheet.
pub fn meijer_series(spec: &MeijerSeriesSpec, zeta: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    if zeta.is_zero() {
        return value_at_origin(spec, ctx);
    }
    if zeta.im.is_zero() && zeta.re < 0 && !spec.is_entire() {
        return Err(NumError::Cut(format!("ζ = {} lies on the branch cut", zeta.re.to_f64())));
    }
    let l = zeta.with_prec(ctx.bits() + GUARD_BITS).ln();
    meijer_series_log(spec, &l, ctx)
}

/// B_ν(ζ) = ζ^{−ν/2} J_ν(2√ζ) = (1/2πi)∫ Γ(u)/Γ(1+ν−u) ζ^{−u} du.
pub fn bessel_b(nu: f64, zeta: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    let spec = MeijerSeriesSpec::from_lists(&[0.0], &[-nu])?;
    if zeta.im.is_zero() && zeta.re < 0 {
        // entire in ζ: evaluate the single family directly
        let l = zeta.with_prec(ctx.bits() + GUARD_BITS).ln();
        return meijer_series_log(&spec, &l, ctx);
    }
    meijer_series(&spec, zeta, ctx)
}

/// log2 of the largest magnitude in a slice of values.
pub fn max_log2(values: &[Cx]) -> f64 {
    values.iter().map(|v| v.log2_abs()).fold(f64::NEG_INFINITY, f64::max)
}

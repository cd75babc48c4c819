//! Spectral curves of the chain and their equilibrium data: the p = 3 quartic with its
//! closed-form sheets, uniformization, 𝔤-functions and densities; the p = 4, 5, 6 curves;
//! and the curve of the chain whose middle exponent grows like βn.

mod equilibrium;
mod quartic;
mod separated;

use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx, PrecisionContext};
use crate::linalg::RMat;

pub use equilibrium::{density_mass, EquilibriumData, PATH_STANDOFF};
pub use quartic::{
    branch_points_p3, density, quartic_residual, sheet, sheet_values, UniformizationP3, BRANCH_A, BRANCH_B,
};
pub use separated::{q_of_beta, Q0Structure, SeparatedCurve};

/// Working precision used when a caller does not pass one.
pub fn default_context() -> PrecisionContext {
    PrecisionContext::with_bits(128)
}

/// Σ_k c_k z^{lo + k} with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub lo: i32,
    pub c: Vec<Float>,
}

impl Laurent {
    /// From (power, numerator, denominator) terms.
    pub fn from_terms(terms: &[(i32, i64, i64)], prec: u32) -> Laurent {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0);
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut c = vec![Float::new(prec); (hi - lo + 1) as usize];
        for &(k, num, den) in terms {
            c[(k - lo) as usize] += Float::with_val(prec, num) / Float::with_val(prec, den);
        }
        Laurent { lo, c }
    }

    pub fn zero(prec: u32) -> Laurent {
        Laurent { lo: 0, c: vec![Float::new(prec)] }
    }

    fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let prec = self.c[0].prec();
        let mut c = vec![Float::new(prec); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += Float::with_val(prec, a * b);
            }
        }
        Laurent { lo: self.lo + o.lo, c }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let prec = self.c[0].prec();
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let mut c = vec![Float::new(prec); (hi - lo + 1) as usize];
        for (i, a) in self.c.iter().enumerate() {
            c[(self.lo - lo) as usize + i] += a;
        }
        for (i, a) in o.c.iter().enumerate() {
            c[(o.lo - lo) as usize + i] += a;
        }
        Laurent { lo, c }
    }

    pub fn eval(&self, z: &Cx) -> Cx {
        let mut acc = Cx::zero(z.prec());
        for a in self.c.iter().rev() {
            acc = &acc * z;
            acc.re += a;
        }
        &acc * &z.powi(self.lo)
    }

    pub fn eval_real(&self, x: &Float) -> Float {
        let prec = x.prec();
        let mut acc = Float::new(prec);
        for a in self.c.iter().rev() {
            acc *= x;
            acc += a;
        }
        let mut s = Float::with_val(prec, x);
        s.pow_assign_i32(self.lo);
        acc * s
    }
}

trait PowI32 {
    fn pow_assign_i32(&mut self, n: i32);
}

impl PowI32 for Float {
    fn pow_assign_i32(&mut self, n: i32) {
        use rug::ops::PowAssign;
        self.pow_assign(n);
    }
}

/// A spectral curve E(y, z) = Σ_k c_k(z) y^k, monic in y, with Laurent coefficients in z.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    /// Number of levels of the chain; the degree in y is p + 1.
    pub p: usize,
    /// coeffs[k] multiplies y^k; coeffs[p + 1] = 1.
    pub coeffs: Vec<Laurent>,
    prec: u32,
}

fn lp(terms: &[(i32, i64, i64)], prec: u32) -> Laurent {
    Laurent::from_terms(terms, prec)
}

impl SpectralCurve {
    /// The curve of the p-chain with the Laguerre potentials, p ∈ {3, 4, 5, 6}.
    pub fn new(p: usize, ctx: &PrecisionContext) -> Result<SpectralCurve> {
        let w = ctx.bits() + 32;
        let one = lp(&[(0, 1, 1)], w);
        let zero = Laurent::zero(w);
        let coeffs = match p {
            3 => {
                let c0 = lp(&[(1, 3, 1), (0, 4, 1)], w)
                    .mul(&lp(&[(1, 3, 1), (0, -8, 1)], w))
                    .mul(&lp(&[(1, 3, 1), (0, -8, 1)], w))
                    .mul(&lp(&[(-3, 1, 432)], w));
                let c2 = lp(&[(0, -1, 2), (-1, 1, 1)], w);
                vec![c0, zero.clone(), c2, zero, one]
            }
            4 => {
                let c0 = lp(&[(0, -288, 12500), (-2, 3000, 12500), (-4, -3125, 12500)], w);
                let c1 = lp(&[(0, 12, 125), (-2, -25, 125)], w);
                let c2 = lp(&[(0, 2, 25), (-2, -1, 1)], w);
                let c3 = lp(&[(0, -3, 5)], w);
                vec![c0, c1, c2, c3, zero, one]
            }
            5 => {
                let f = lp(&[(2, 25, 1), (1, -40, 1), (0, -64, 1)], w);
                let c0 = lp(&[(0, 4, 1), (1, -5, 1)], w).mul(&f).mul(&f).mul(&lp(&[(-5, 1, 200000)], w));
                let c2 = lp(&[(0, 75, 400), (-1, -200, 400), (-3, 256, 400)], w);
                let c4 = lp(&[(0, -3, 4), (-1, 1, 1)], w);
                vec![c0, zero.clone(), c2, zero.clone(), c4, zero, one]
            }
            6 => {
                let c0 = lp(&[(0, 236196, 1), (-2, -2250423, 1), (-4, 2722734, 1), (-6, -823543, 1)], w)
                    .mul(&lp(&[(0, 16, 600362847)], w));
                let c1 = lp(&[(1, 54, 1), (-1, -49, 1)], w)
                    .mul(&lp(&[(1, 27, 1), (-1, -49, 1)], w))
                    .mul(&lp(&[(-2, -8, 453789)], w));
                let c2 = lp(&[(0, -2916, 64827), (-2, 30429, 64827), (-4, -19208, 64827)], w);
                let c3 = lp(&[(0, 87, 343), (-2, -98, 343)], w);
                let c4 = lp(&[(0, 4, 49), (-2, -49, 49)], w);
                let c5 = lp(&[(0, -6, 7)], w);
                vec![c0, c1, c2, c3, c4, c5, zero, one]
            }
            _ => return Err(NumError::Invalid(format!("no spectral curve is available for p = {p}"))),
        };
        Ok(SpectralCurve { p, coeffs, prec: ctx.bits() })
    }

    pub(crate) fn from_coeffs(p: usize, coeffs: Vec<Laurent>, prec: u32) -> SpectralCurve {
        SpectralCurve { p, coeffs, prec }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    fn check_z(z: &Cx) -> Result<()> {
        if z.is_zero() {
            return Err(NumError::Pole("the curve coefficients are singular at z = 0".into()));
        }
        if !z.is_finite() {
            return Err(NumError::Domain("z must be finite".into()));
        }
        Ok(())
    }

    /// c_k(z) for k = 0..=p+1.
    pub fn coefficients(&self, z: &Cx) -> Result<Vec<Cx>> {
        Self::check_z(z)?;
        let zw = z.with_prec(self.prec + 32);
        Ok(self.coeffs.iter().map(|c| c.eval(&zw)).collect())
    }

    /// E(y, z).
    pub fn eval(&self, y: &Cx, z: &Cx) -> Result<Cx> {
        let c = self.coefficients(z)?;
        let yw = y.with_prec(self.prec + 32);
        let mut acc = Cx::zero(self.prec + 32);
        for a in c.iter().rev() {
            acc = &(&acc * &yw) + a;
        }
        Ok(acc.with_prec(self.prec))
    }

    /// |E(y, z)|.
    pub fn residual(&self, y: &Cx, z: &Cx) -> Result<f64> {
        Ok(self.eval(y, z)?.abs().to_f64())
    }

    /// The p + 1 roots in y, sorted by real then imaginary part.
    /// Fails when two roots coincide to within the resolving power of the working precision.
    pub fn roots(&self, z: &Cx) -> Result<Vec<Cx>> {
        let r = self.roots_unchecked(z)?;
        let scale = r.iter().map(|y| y.abs().to_f64()).fold(1.0, f64::max);
        let sep = (-(self.prec as f64) / 4.0).exp2() * scale;
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                if r[i].dist(&r[j]) < sep {
                    return Err(NumError::Singular(format!(
                        "sheets cannot be told apart at z = {:?}: near a zero of the discriminant",
                        z
                    )));
                }
            }
        }
        Ok(r)
    }

    /// The roots without the coincidence check.
    pub fn roots_unchecked(&self, z: &Cx) -> Result<Vec<Cx>> {
        let c = self.coefficients(z)?;
        let mut r = aberth(&c, self.prec + 32)?;
        r.iter_mut().for_each(|y| *y = y.with_prec(self.prec));
        r.sort_by(|a, b| {
            a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(r)
    }

    /// The discriminant in y at a real z ≠ 0, from the Sylvester matrix of E and ∂E/∂y.
    pub fn discriminant(&self, x: &Float) -> Result<Float> {
        if x.is_zero() || !x.is_finite() {
            return Err(NumError::Pole("the discriminant is singular at z = 0".into()));
        }
        let w = x.prec().max(self.prec) + 32;
        let xw = Float::with_val(w, x);
        let c: Vec<Float> = self.coeffs.iter().map(|l| l.eval_real(&xw)).collect();
        let d = c.len() - 1;
        let dc: Vec<Float> = (1..=d).map(|k| Float::with_val(w, &c[k] * k as u32)).collect();
        let n = 2 * d - 1;
        let mut m = RMat::zeros(n, n, w);
        for r in 0..d - 1 {
            for k in 0..=d {
                *m.get_mut(r, r + k) = Float::with_val(w, &c[d - k]);
            }
        }
        for r in 0..d {
            for k in 0..d {
                *m.get_mut(d - 1 + r, r + k) = Float::with_val(w, &dc[d - 1 - k]);
            }
        }
        let mut det = m.det();
        if (d * (d - 1) / 2) % 2 == 1 {
            det = -det;
        }
        Ok(Float::with_val(self.prec, det))
    }

    /// Number of non-real roots at a real x ≠ 0.
    pub fn complex_root_count(&self, x: f64) -> Result<usize> {
        let r = self.roots_unchecked(&Cx::new(self.prec, x, 0.0))?;
        let noise = self.noise(&r);
        Ok(r.iter().filter(|y| y.im.to_f64().abs() > noise).count())
    }

    // roots of a real polynomial that are real to working precision carry tiny imaginary parts
    fn noise(&self, r: &[Cx]) -> f64 {
        let scale = r.iter().map(|y| y.abs().to_f64()).fold(1.0, f64::max);
        (-(self.prec as f64) / 3.0).exp2() * scale
    }

    /// Real branch points in [−range, range] ∖ {0}: the zeros of the discriminant at which the
    /// number of non-real roots changes. Located by a scan with `samples` points per half-line and
    /// bisection; zeros of even order (two pairs meeting at once) are found as well as simple ones.
    pub fn branch_points(&self, range: f64, samples: usize) -> Result<Vec<f64>> {
        if !(range > 0.0) || samples < 2 {
            return Err(NumError::Invalid("branch point scan needs a positive range and at least two samples".into()));
        }
        let mut out = Vec::new();
        for side in [-1.0, 1.0] {
            let edge = range * 1e-9;
            let xs: Vec<f64> = (0..samples)
                .map(|i| side * (edge + (range - edge) * i as f64 / (samples - 1) as f64))
                .collect();
            let mut prev = (xs[0], self.complex_root_count(xs[0])?);
            for &x in &xs[1..] {
                let c = self.complex_root_count(x)?;
                if c != prev.1 {
                    let (mut lo, mut hi) = (prev.0, x);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid == lo || mid == hi {
                            break;
                        }
                        if self.complex_root_count(mid)? == prev.1 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(0.5 * (lo + hi));
                }
                prev = (x, c);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }

    /// max_k |Im y_k(x)|/π over the roots at a real x ≠ 0: the density of the level living on that
    /// half-line, zero off the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        let z = Cx::new(self.prec, x, 0.0);
        let r = self.roots_unchecked(&z)?;
        let m = r.iter().map(|y| y.im.to_f64().abs()).fold(0.0, f64::max);
        let noise = self.noise(&r);
        Ok(if m <= noise { 0.0 } else { m / pi(53).to_f64() })
    }

    /// Intervals of [−range, range] on which some root is non-real, with endpoints at the
    /// branch points, the origin, or the scan limits.
    pub fn support(&self, range: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
        let mut cuts = self.branch_points(range, samples)?;
        cuts.push(-range);
        cuts.push(0.0);
        cuts.push(range);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if mid == 0.0 || w[1] - w[0] <= 0.0 {
                continue;
            }
            if self.density(mid)? > 0.0 {
                match out.last_mut() {
                    Some(last) if last.1 == w[0] && w[0] != 0.0 => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        Ok(out)
    }
}

/// |E_pk(y, z)| for the curves with pk ∈ {4, 5, 6} (and 3).
pub fn curve_pk(pk: usize, z: &Cx, y: &Cx) -> Result<f64> {
    let ctx = PrecisionContext::with_bits(z.prec().max(y.prec()));
    SpectralCurve::new(pk, &ctx)?.residual(y, z)
}

/// Simultaneous Aberth–Ehrlich iteration for the roots of Σ c_k y^k with c_d = 1.
fn aberth(c: &[Cx], prec: u32) -> Result<Vec<Cx>> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let radius = (0..d)
        .map(|k| {
            let a = c[k].abs().to_f64();
            if a == 0.0 {
                0.0
            } else {
                (a.ln() / (d - k) as f64).exp()
            }
        })
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut y: Vec<Cx> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            Cx::new(prec, radius * th.cos(), radius * th.sin())
        })
        .collect();
    let eval = |x: &Cx| -> (Cx, Cx) {
        let mut p = Cx::zero(prec);
        let mut dp = Cx::zero(prec);
        for a in c.iter().rev() {
            dp = &(&dp * x) + &p;
            p = &(&p * x) + a;
        }
        (p, dp)
    };
    let tol = (-(prec as f64) + 8.0).exp2();
    for _ in 0..800 {
        let mut worst = 0.0f64;
        for i in 0..d {
            let (p, dp) = eval(&y[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = &p * &dp.recip();
            let mut s = Cx::zero(prec);
            for j in 0..d {
                if j != i {
                    s += &(&y[i] - &y[j]).recip();
                }
            }
            let denom = &Cx::one(prec) - &(&ratio * &s);
            let step = &ratio * &denom.recip();
            if !step.is_finite() {
                continue;
            }
            let rel = step.abs().to_f64() / y[i].abs().to_f64().max(radius * 1e-30);
            worst = worst.max(rel);
            y[i] = &y[i] - &step;
        }
        if worst < tol {
            return Ok(y);
        }
    }
    // multiple roots converge linearly; accept when the residuals are negligible
    let scale: f64 = c.iter().map(|a| a.abs().to_f64()).fold(0.0, f64::max);
    let ok = y.iter().all(|x| {
        let r = eval(x).0.abs().to_f64();
        r <= scale * (-(prec as f64) / 2.0).exp2()
    });
    if ok {
        Ok(y)
    } else {
        Err(NumError::Convergence("polynomial root iteration did not settle".into()))
    }
}

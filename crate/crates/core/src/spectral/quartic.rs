//! The quartic of the three-matrix chain: closed-form sheets, uniformization and densities.

use rug::Float;

use super::SpectralCurve;
use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx, PrecisionContext};
use crate::parametrix::Side;

/// Left branch point a = −4/3.
pub const BRANCH_A: f64 = -4.0 / 3.0;
/// Right branch point b = 64/27.
pub const BRANCH_B: f64 = 64.0 / 27.0;

/// (a, b) at the given precision.
pub fn branch_points_p3(prec: u32) -> (Float, Float) {
    (Float::with_val(prec, -4) / 3u32, Float::with_val(prec, 64) / 27u32)
}

/// Which sheets are cut on the real point x: all four on (0, b), sheets 2 and 3 on (a, 0).
fn cut_at(j: usize, x: &Float, b: &Float) -> bool {
    if *x > 0 && x < b {
        return true;
    }
    (j == 2 || j == 3) && *x < 0 && *x > Float::with_val(x.prec(), -4) / 3u32
}

fn sqrt_side(w: &Cx, side: Side) -> Cx {
    if w.im.is_zero() && w.re < 0 {
        let r = Float::with_val(w.prec(), -&w.re).sqrt();
        let zero = Float::new(w.prec());
        match side {
            Side::Plus => Cx::from_parts(zero, r),
            Side::Minus => Cx::from_parts(zero, -r),
        }
    } else {
        w.sqrt()
    }
}

/// The exterior variable s with z = (b/4)(s + 2 + 1/s), |s| > 1 off [0, b]. In it
/// z² − 2z ∓ 2(z(z − b))^{1/2} factors completely, which fixes the sheets without spurious cuts.
fn exterior(z: &Cx, side: Side, b: &Float) -> Cx {
    let p = z.prec();
    let r = if z.im.is_zero() {
        let x = &z.re;
        if *x > 0 && x < b {
            let m = Float::with_val(p, x * Float::with_val(p, b - x)).sqrt();
            Cx::from_parts(Float::new(p), m * side.sign())
        } else if *x < 0 {
            let m = Float::with_val(p, x * Float::with_val(p, x - b)).sqrt();
            Cx::from_real(-m)
        } else {
            let m = Float::with_val(p, x * Float::with_val(p, x - b)).sqrt();
            Cx::from_real(m)
        }
    } else {
        &z.sqrt() * &(z - &Cx::from_real(Float::with_val(p, b))).sqrt()
    };
    let two_over_b = Float::with_val(p, 2) / b;
    (z + &r).scale(&two_over_b) - Cx::one(p)
}

/// One sheet y_j(z), j ∈ 1..=4. Points on the sheet's cut need a side.
pub fn sheet(j: usize, z: &Cx, side: Option<Side>) -> Result<Cx> {
    if !(1..=4).contains(&j) {
        return Err(NumError::Invalid(format!("sheet index {j} outside 1..=4")));
    }
    if z.is_zero() {
        return Err(NumError::Pole("the sheets blow up at the branch point z = 0".into()));
    }
    if !z.is_finite() {
        return Err(NumError::Domain("z must be finite".into()));
    }
    let prec = z.prec();
    let w = prec + 32;
    let zw = z.with_prec(w);
    let (_, b) = branch_points_p3(w);
    if zw.im.is_zero() && cut_at(j, &zw.re, &b) && side.is_none() {
        return Err(NumError::Cut(format!("y_{j} at {:?} lies on its cut; pass a side", z)));
    }
    let side = side.unwrap_or(Side::Plus);
    let s = exterior(&zw, side, &b);
    let one = Cx::one(w);
    let c = Float::with_val(w, 4) / 27u32;
    let root1 = sqrt_side(&(&s + &one), side);
    let den = (&s * &zw).recip();
    let y = if j == 1 || j == 4 {
        let four_s = s.scale_f64(4.0);
        let y1 = &(&(&s - &Cx::new(w, 2.0, 0.0)) * &root1) * &(&sqrt_side(&(&four_s + &one), side) * &den);
        y1.scale(&c)
    } else {
        let two_s = s.scale_f64(2.0);
        let y2 = &(&(&two_s - &one) * &root1) * &(&sqrt_side(&(&s + &Cx::new(w, 4.0, 0.0)), side) * &den);
        y2.scale(&c).scale_f64(-1.0)
    };
    let y = if j == 3 || j == 4 { y.scale_f64(-1.0) } else { y };
    Ok(y.with_prec(prec))
}

/// (y₁, y₂, y₃, y₄) at z; on any cut a side is required.
pub fn sheet_values(z: &Cx, side: Option<Side>) -> Result<[Cx; 4]> {
    Ok([sheet(1, z, side)?, sheet(2, z, side)?, sheet(3, z, side)?, sheet(4, z, side)?])
}

/// |E₃(y, z)| for the quartic y⁴ − (z − 2)/(2z) y² + (3z + 4)(3z − 8)²/(432z³).
pub fn quartic_residual(y: &Cx, z: &Cx) -> Result<f64> {
    let ctx = PrecisionContext::with_bits(z.prec().max(y.prec()));
    SpectralCurve::new(3, &ctx)?.residual(y, z)
}

/// The density of level j at x > 0: |Im y_{j+}(x)|/π on (0, b] for j = 1, 3; for j = 2 the
/// density of the second level at x, i.e. |Im y_{2+}(−x)|/π on (0, |a|].
pub fn density(j: usize, x: f64, ctx: &PrecisionContext) -> Result<f64> {
    let (lim, sign, sh) = match j {
        1 | 3 => (BRANCH_B, 1.0, j),
        2 => (-BRANCH_A, -1.0, 2),
        _ => return Err(NumError::Invalid(format!("density level {j} outside 1..=3"))),
    };
    if x == 0.0 {
        return Err(NumError::Pole("the density has an integrable singularity at the origin".into()));
    }
    if !(x > 0.0 && x <= lim) {
        return Err(NumError::Domain(format!("x = {x} outside the support (0, {lim}] of level {j}")));
    }
    let y = sheet(sh, &Cx::new(ctx.bits(), sign * x, 0.0), Some(Side::Plus))?;
    Ok(y.im.to_f64().abs() / pi(53).to_f64())
}

/// The rational parametrization z(t) = −t⁴/(210(t − 1)(t − 8/7)(t − 8/5)(t − 2)),
/// y(t) = −99/2 + 210/t − 288/t² + 128/t³ of the quartic.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformizationP3;

impl UniformizationP3 {
    /// Preimages of z = ∞ on sheets 1..4, where y = 1/2, −1/2, 1/2, −1/2.
    pub fn sheet_preimages(prec: u32) -> [Float; 4] {
        let f = |n: u32, d: u32| Float::with_val(prec, n) / d;
        [f(1, 1), f(8, 7), f(8, 5), f(2, 1)]
    }

    /// Critical points of z(t): 0, 96/67 − 8√10/67, 4/3, 96/67 + 8√10/67.
    pub fn branch_t_points(prec: u32) -> [Float; 4] {
        let r = Float::with_val(prec, 10).sqrt() * 8u32 / 67u32;
        let c = Float::with_val(prec, 96) / 67u32;
        [Float::new(prec), Float::with_val(prec, &c - &r), Float::with_val(prec, 4) / 3u32, c + r]
    }

    fn check(t: &Cx) -> Result<()> {
        let prec = t.prec();
        for tj in Self::sheet_preimages(prec) {
            if (t - &Cx::from_real(tj)).is_zero() {
                return Err(NumError::Pole(format!("z(t) has a pole at t = {:?}", t)));
            }
        }
        Ok(())
    }

    pub fn z(t: &Cx) -> Result<Cx> {
        Self::check(t)?;
        let prec = t.prec();
        let mut den = Cx::new(prec, -210.0, 0.0);
        for tj in Self::sheet_preimages(prec) {
            den = &den * &(t - &Cx::from_real(tj));
        }
        Ok(&t.powi(4) * &den.recip())
    }

    pub fn y(t: &Cx) -> Result<Cx> {
        if t.is_zero() {
            return Err(NumError::Pole("y(t) has a pole at t = 0".into()));
        }
        let prec = t.prec();
        let u = t.recip();
        let mut acc = Cx::new(prec, 128.0, 0.0);
        for c in [-288.0, 210.0, -99.0 / 2.0] {
            acc = &(&acc * &u) + &Cx::new(prec, c, 0.0);
        }
        Ok(acc)
    }

    /// |E₃(y(t), z(t))|.
    pub fn residual(t: &Cx) -> Result<f64> {
        let w = t.with_prec(t.prec() + 64);
        let z = Self::z(&w)?;
        let y = Self::y(&w)?;
        quartic_residual(&y, &z)
    }
}

//! Sector assembly, jumps on the six rays, monodromy and large-ζ asymptotics.

use rug::Float;

use super::{g_func, g_func_log, g_matrix, ParametrixContext, Side, SidedPoint};
use crate::error::{NumError, Result};
use crate::gammakit::{pi, Cx};
use crate::linalg::CMat;

/// The six rays leaving the origin, oriented towards infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ray {
    /// ℝ₊
    R0,
    /// e^{iπ/4}ℝ₊
    R1,
    /// e^{−iπ/4}ℝ₊
    R2,
    /// e^{3iπ/4}ℝ₊
    R3,
    /// e^{−3iπ/4}ℝ₊
    R4,
    /// −ℝ₊
    R5,
}

impl Ray {
    pub const ALL: [Ray; 6] = [Ray::R0, Ray::R1, Ray::R2, Ray::R3, Ray::R4, Ray::R5];

    /// Argument of the ray in units of π/4.
    fn quarter_turns(self) -> i32 {
        match self {
            Ray::R0 => 0,
            Ray::R1 => 1,
            Ray::R2 => -1,
            Ray::R3 => 3,
            Ray::R4 => -3,
            Ray::R5 => 4,
        }
    }
}

const RAY_TOL: f64 = 1e-12;

/// Lower-unipotent matrix with the given subdiagonal entries (row i+1, column i).
fn lower_unipotent(n: usize, prec: u32, entries: &[(usize, Cx)]) -> CMat {
    let mut m = CMat::identity(n, prec);
    for (i, x) in entries {
        m.data[(i + 1) * n + i] = x.clone();
    }
    m
}

/// Indices 2k (0-based) of the blocks pairing a_{2k+1}, or 2k+1 for a_{2k+2}.
fn block_starts(p: usize, odd: bool) -> Vec<usize> {
    let first = if odd { 0 } else { 1 };
    (first..p).step_by(2).collect()
}

/// ζ^{−a_{i+1}} e^{iπ·phase·a_{i+1}} for each block start i.
fn block_entries(pc: &ParametrixContext, at: &SidedPoint, odd: bool, sign: f64, phase: f64) -> Vec<(usize, Cx)> {
    let prec = pc.ctx.bits() + 32;
    block_starts(pc.p(), odd)
        .into_iter()
        .map(|i| {
            let a = pc.exps.aj(i + 1);
            let th = Float::with_val(prec, pi(prec) * (phase * a));
            let ph = Cx::polar(&Float::with_val(prec, sign), &th);
            (i, &at.pow(-a) * &ph)
        })
        .collect()
}

fn sided(zeta: &Cx, pc: &ParametrixContext) -> Result<(SidedPoint, f64)> {
    let prec = pc.ctx.bits() + 32;
    let log = zeta.with_prec(prec).ln();
    let arg = log.im.to_f64();
    let side = if arg > 0.0 { Side::Plus } else { Side::Minus };
    Ok((SidedPoint::from_log(log, side), arg))
}

/// The sector-wise solution 𝔾(ζ)·(unipotent factor) on the principal sheet.
pub fn assemble_sector(zeta: &Cx, pc: &ParametrixContext) -> Result<CMat> {
    if zeta.is_zero() {
        return Err(NumError::Domain("ζ = 0".into()));
    }
    if zeta.im.is_zero() && zeta.re < 0 {
        return Err(NumError::Domain("ζ lies on the ray −ℝ₊".into()));
    }
    let (at, arg) = sided(zeta, pc)?;
    let q = arg / std::f64::consts::FRAC_PI_4;
    if Ray::ALL.iter().any(|r| (q - r.quarter_turns() as f64).abs() < RAY_TOL) {
        return Err(NumError::Domain(format!("arg ζ = {arg} lies on a jump ray")));
    }
    sector_value(&at, q, pc)
}

/// Evaluates the formula of the sector containing arg = q·π/4, also at its boundary.
fn sector_value(at: &SidedPoint, q: f64, pc: &ParametrixContext) -> Result<CMat> {
    let g = g_matrix(at, pc)?;
    let n = pc.p() + 1;
    let prec = pc.ctx.bits() + 32;
    let factor = if q.abs() > 1.0 && q.abs() < 3.0 {
        return Ok(g);
    } else if q >= 3.0 {
        lower_unipotent(n, prec, &block_entries(pc, at, false, 1.0, 1.0))
    } else if q >= 0.0 {
        lower_unipotent(n, prec, &block_entries(pc, at, true, -1.0, 0.0))
    } else if q <= -3.0 {
        lower_unipotent(n, prec, &block_entries(pc, at, false, -1.0, -1.0))
    } else {
        lower_unipotent(n, prec, &block_entries(pc, at, true, 1.0, 0.0))
    };
    Ok(g.mul(&factor))
}

/// J_ℓ at ζ = r·e^{i·arg(ray)}.
pub fn jump_matrix(ray: Ray, r: f64, pc: &ParametrixContext) -> CMat {
    let n = pc.p() + 1;
    let prec = pc.ctx.bits() + 32;
    let arg = Float::with_val(prec, pi(prec) * (ray.quarter_turns() as f64 / 4.0));
    let at = SidedPoint::from_log(Cx::from_parts(Float::with_val(prec, r).ln(), arg), Side::Plus);
    match ray {
        Ray::R1 | Ray::R2 => lower_unipotent(n, prec, &block_entries(pc, &at, true, 1.0, 0.0)),
        Ray::R3 => lower_unipotent(n, prec, &block_entries(pc, &at, false, 1.0, 1.0)),
        Ray::R4 => lower_unipotent(n, prec, &block_entries(pc, &at, false, 1.0, -1.0)),
        Ray::R0 | Ray::R5 => {
            // [[0, x^{a}], [−x^{−a}], 0]] blocks with x = ζ on ℝ₊ and x = −ζ on −ℝ₊
            let odd = ray == Ray::R0;
            let x = SidedPoint::from_log(Cx::from_real(Float::with_val(prec, r).ln()), Side::Plus);
            let mut m = CMat::identity(n, prec);
            for i in block_starts(pc.p(), odd) {
                let a = pc.exps.aj(i + 1);
                m.data[i * n + i] = Cx::zero(prec);
                m.data[(i + 1) * n + i + 1] = Cx::zero(prec);
                m.data[i * n + i + 1] = x.pow(a);
                m.data[(i + 1) * n + i] = -x.pow(-a);
            }
            m
        }
    }
}

/// max |G₊ − G₋J| / max |G₊| at ζ = r·e^{i·arg(ray)}, with the left side as the + side.
pub fn verify_ray_jump(ray: Ray, r: f64, pc: &ParametrixContext) -> Result<f64> {
    let prec = pc.ctx.bits() + 32;
    let t = ray.quarter_turns();
    let lr = Float::with_val(prec, r).ln();
    let point = |quarter: f64| {
        let th = Float::with_val(prec, pi(prec) * (quarter / 4.0));
        let side = if quarter > 0.0 { Side::Plus } else { Side::Minus };
        SidedPoint::from_log(Cx::from_parts(lr.clone(), th), side)
    };
    // boundary values: left of an outward ray is the counter-clockwise side
    let (plus, minus) = match ray {
        Ray::R0 => {
            let zp = SidedPoint::from_log(Cx::from_real(lr.clone()), Side::Plus);
            let zm = SidedPoint::from_log(Cx::from_real(lr.clone()), Side::Minus);
            (sector_value(&zp, 0.5, pc)?, sector_value(&zm, -0.5, pc)?)
        }
        Ray::R5 => {
            let zp = point(-4.0);
            let zm = point(4.0);
            (sector_value(&zp, -4.0, pc)?, sector_value(&zm, 4.0, pc)?)
        }
        _ => {
            let tq = t as f64;
            let at = point(tq);
            (sector_value(&at, tq + 0.5, pc)?, sector_value(&at, tq - 0.5, pc)?)
        }
    };
    let j = jump_matrix(ray, r, pc);
    let diff = plus.sub(&minus.mul(&j));
    Ok(diff.max_abs() / plus.max_abs().max(1e-300))
}

/// |g_{2k}^{(+)}(ζ) − g_{2k}^{(−)}(ζ) − ζ^{a_{2k−1}} g_{2k−1}^{(−)}(ζ)| for ζ > 0.
pub fn verify_jump(k: usize, zeta_pos: f64, pc: &ParametrixContext) -> Result<f64> {
    if !(zeta_pos > 0.0) {
        return Err(NumError::Domain("the jump is checked on ℝ₊".into()));
    }
    if k == 0 || 2 * k > pc.p() + 1 {
        return Err(NumError::Invalid(format!("2k = {} outside 2..={}", 2 * k, pc.p() + 1)));
    }
    let z = pc.ctx.cx(zeta_pos, 0.0);
    let gp = g_func(2 * k, Side::Plus, &z, pc)?;
    let gm = g_func(2 * k, Side::Minus, &z, pc)?;
    let gl = g_func(2 * k - 1, Side::Minus, &z, pc)?;
    let zp = SidedPoint::from_log(z.ln(), Side::Plus).pow(pc.exps.aj(2 * k - 1));
    Ok((&(&gp - &gm) - &(&zp * &gl)).abs().to_f64())
}

/// |g_j^{(+)}(ζe^{2πi}) − g_j^{(+)}(ζ) + ζ^{a_{j−1}} e^{iπa_{j−1}σ_{j−1}} g_{j−1}^{(+)}(ζe^{2πiσ_{j−1}})|.
pub fn verify_monodromy(j: usize, zeta: &Cx, pc: &ParametrixContext) -> Result<f64> {
    if j < 2 || j > pc.p() + 1 {
        return Err(NumError::Invalid(format!("monodromy needs 2 ≤ j ≤ {}", pc.p() + 1)));
    }
    let prec = pc.ctx.bits() + 32;
    let l = zeta.with_prec(prec).ln();
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let mut l2 = l.clone();
    l2.im += &two_pi;
    let s = pc.sigma[j - 1] as f64;
    let mut l3 = l.clone();
    l3.im += Float::with_val(prec, &two_pi * s);
    let a = pc.exps.aj(j - 1);
    let lhs = &g_func_log(j, Side::Plus, &l2, pc)? - &g_func_log(j, Side::Plus, &l, pc)?;
    let th = Float::with_val(prec, pi(prec) * (a * s));
    let coef = &SidedPoint::from_log(l.clone(), Side::Plus).pow(a) * &Cx::polar(&Float::with_val(prec, 1), &th);
    let rhs = -(&coef * &g_func_log(j - 1, Side::Plus, &l3, pc)?);
    Ok((&lhs - &rhs).abs().to_f64())
}

/// ω^x with ω = e^{iπp/(2(p+1))}.
fn omega_pow(p: usize, x: f64, prec: u32) -> Cx {
    let th = Float::with_val(prec, pi(prec) * (x * p as f64 / (2.0 * (p as f64 + 1.0))));
    Cx::polar(&Float::with_val(prec, 1), &th)
}

/// Leading large-ζ form of g_j on the given side.
pub fn asymptotic_form(j: usize, side: Side, zeta: &Cx, pc: &ParametrixContext) -> Result<Cx> {
    let p = pc.p();
    let pf = p as f64;
    let prec = pc.ctx.bits() + 32;
    let (at, arg) = sided(zeta, pc)?;
    let eps = 0.05;
    let pi_f = std::f64::consts::PI;
    let tail = |from: usize| pc.big_a[from - 1..].iter().sum::<f64>();
    // (pre-phase exponent of ω, e for Ω = ω^{∓(2/p)e}, overall sign, conjugated?)
    let (e, s, conj, sign) = if j % 2 == 0 {
        match side {
            Side::Plus if arg <= pi_f - eps => (2.0 + pf - j as f64, tail(j), false, 1.0),
            Side::Minus if arg >= -pi_f + eps && arg < 0.0 => {
                (2.0 + pf - j as f64, tail(j), true, if (p - 1) % 2 == 0 { 1.0 } else { -1.0 })
            }
            _ => return Err(NumError::Domain(format!("arg ζ = {arg} is outside the sector for g_{j}"))),
        }
    } else if arg <= -eps {
        (pf + 1.0 - j as f64, if j < p + 1 { tail(j + 1) } else { 0.0 }, false, 1.0)
    } else if arg >= eps {
        (pf + 1.0 - j as f64, if j < p + 1 { tail(j + 1) } else { 0.0 }, true, if p % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        return Err(NumError::Domain(format!("arg ζ = {arg} is too close to ℝ₊ for odd j")));
    };
    let d = if conj { -1.0 } else { 1.0 };
    let pre = &omega_pow(p, d * e, prec) * &omega_pow(p, -d * (2.0 / pf) * s, prec);
    let big_omega = omega_pow(p, -d * (2.0 / pf) * e, prec);
    let power = at.pow(-pf / (2.0 * (pf + 1.0)) + pc.big_a[j - 1] / (pf + 1.0));
    let root = at.pow(1.0 / (pf + 1.0));
    let expo = (&big_omega * &root).scale_f64(-(pf + 1.0)).exp();
    Ok((&(&pre * &power) * &expo).scale_f64(sign))
}

/// Relative deviation between g_j and its leading large-ζ form.
pub fn verify_asymptotics(j: usize, side: Side, zeta: &Cx, pc: &ParametrixContext) -> Result<f64> {
    if zeta.abs().to_f64() < 50.0 {
        return Err(NumError::Domain("asymptotic check needs |ζ| ≥ 50".into()));
    }
    let lead = asymptotic_form(j, side, zeta, pc)?;
    let (at, _) = sided(zeta, pc)?;
    let g = g_func_log(j, side, &at.log, pc)?;
    Ok((&(&g / &lead) - &Cx::one(g.prec())).abs().to_f64())
}

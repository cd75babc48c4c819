//! Extended-precision complex arithmetic and the Gamma function.

mod complex;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rug::{Float, Rational};

pub use complex::{fl, log2_float, pi, Cx};

use crate::error::{NumError, Result};

/// Working precision and target accuracy of a computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionContext {
    pub mantissa_bits: u32,
    pub target_tolerance: f64,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { mantissa_bits: 256, target_tolerance: 1e-20 }
    }
}

impl PrecisionContext {
    pub fn new(mantissa_bits: u32, target_tolerance: f64) -> Result<Self> {
        if mantissa_bits < 64 {
            return Err(NumError::Invalid(format!("mantissa_bits = {mantissa_bits} < 64")));
        }
        if !(target_tolerance > 0.0) {
            return Err(NumError::Invalid(format!("target_tolerance = {target_tolerance}")));
        }
        Ok(PrecisionContext { mantissa_bits, target_tolerance })
    }

    pub fn with_bits(mantissa_bits: u32) -> Self {
        PrecisionContext { mantissa_bits: mantissa_bits.max(64), ..Default::default() }
    }

    pub fn bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn tol(&self) -> f64 {
        self.target_tolerance
    }

    /// Distance from a nonpositive integer below which an argument counts as a pole.
    pub fn pole_tolerance(&self) -> f64 {
        (-(self.mantissa_bits as f64) / 2.0).exp2()
    }

    /// Same tolerance with twice the mantissa.
    pub fn doubled(&self) -> Self {
        PrecisionContext { mantissa_bits: 2 * self.mantissa_bits, ..*self }
    }

    pub fn zero(&self) -> Cx {
        Cx::zero(self.mantissa_bits)
    }

    pub fn one(&self) -> Cx {
        Cx::one(self.mantissa_bits)
    }

    pub fn cx(&self, re: f64, im: f64) -> Cx {
        Cx::new(self.mantissa_bits, re, im)
    }

    pub fn real(&self, x: f64) -> Float {
        fl(self.mantissa_bits, x)
    }
}

// Stirling coefficients B_{2k}/(2k(2k−1)) as exact rationals.
static STIRLING_RAT: Lazy<Mutex<Vec<Rational>>> = Lazy::new(|| Mutex::new(Vec::new()));
// The same coefficients rounded to a given precision.
static STIRLING_FLT: Lazy<Mutex<HashMap<u32, Vec<Float>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn bernoulli_even(count: usize) -> Vec<Rational> {
    // Akiyama–Tanigawa
    let n = 2 * count;
    let mut a: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(count);
    for m in 0..=n {
        a.push(Rational::from((1, m as u64 + 1)));
        for j in (1..=m).rev() {
            let d = Rational::from(&a[j - 1] - &a[j]);
            a[j - 1] = d * Rational::from(j as u64);
        }
        if m >= 2 && m % 2 == 0 {
            out.push(a[0].clone());
        }
    }
    out
}

fn stirling_coeffs(prec: u32, count: usize) -> Vec<Float> {
    {
        let cache = STIRLING_FLT.lock().unwrap();
        if let Some(v) = cache.get(&prec) {
            if v.len() >= count {
                return v[..count].to_vec();
            }
        }
    }
    let rats = {
        let mut r = STIRLING_RAT.lock().unwrap();
        if r.len() < count {
            let b = bernoulli_even(count);
            *r = b
                .into_iter()
                .enumerate()
                .map(|(k, b2k)| {
                    let k = k as u64 + 1;
                    b2k / Rational::from(2 * k * (2 * k - 1))
                })
                .collect();
        }
        r[..count].to_vec()
    };
    let v: Vec<Float> = rats.iter().map(|q| Float::with_val(prec, q)).collect();
    STIRLING_FLT.lock().unwrap().insert(prec, v.clone());
    v
}

/// f64 estimate of Im log Γ(z) on the principal branch, used to pick the 2πk shift.
fn im_log_gamma_estimate(z: Complex64) -> f64 {
    let mut shift = 0.0;
    let mut w = z;
    while w.norm() < 20.0 || w.re < 10.0 {
        shift += w.arg();
        w += 1.0;
    }
    let mut s = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln();
    let w2 = w * w;
    s += 1.0 / (12.0 * w) - 1.0 / (360.0 * w * w2) + 1.0 / (1260.0 * w * w2 * w2);
    s.im - shift
}

fn nearest_nonpositive_integer(z: &Cx, ctx: &PrecisionContext) -> Option<i64> {
    let re = z.re.to_f64();
    if re > 0.5 {
        return None;
    }
    let n = re.round();
    let dre = Float::with_val(z.prec(), &z.re - n);
    let d = dre.to_f64().hypot(z.im.to_f64());
    if d < ctx.pole_tolerance() {
        Some(n as i64)
    } else {
        None
    }
}

/// Stirling series for Re z ≥ 1/2, no branch correction.
fn log_gamma_stirling(z: &Cx, wp: u32) -> Cx {
    let big = 0.25 * wp as f64 + 8.0;
    let zc = z.to_c64();
    let r = if zc.norm() >= big { 0 } else { (big - zc.re).ceil().max(0.0) as usize };
    let mut prod = Cx::one(wp);
    let mut w = z.with_prec(wp);
    for _ in 0..r {
        prod = &prod * &w;
        w.re += 1u32;
    }
    let lnw = w.ln();
    let half = fl(wp, 0.5);
    let mut wm = w.clone();
    wm.re -= &half;
    let mut s = &(&wm * &lnw) - &w;
    let ln2pi = Float::with_val(wp, pi(wp) * 2u32).ln() / 2u32;
    s.re += &ln2pi;
    let inv = w.recip();
    let inv2 = inv.square();
    let eps_log2 = -(wp as f64) - 4.0;
    let mut count = 24;
    loop {
        let coeffs = stirling_coeffs(wp, count);
        let mut pw = inv.clone();
        let mut done = false;
        let mut acc = Cx::zero(wp);
        for c in coeffs.iter() {
            let t = pw.scale(c);
            let small = t.log2_abs() < eps_log2 + s.log2_abs().max(0.0);
            acc += &t;
            if small {
                done = true;
                break;
            }
            pw = &pw * &inv2;
        }
        if done {
            s += &acc;
            break;
        }
        count *= 2;
    }
    if r > 0 {
        s = &s - &prod.ln();
    }
    s
}

/// Principal branch of log Γ(z).
pub fn log_gamma(z: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    if let Some(n) = nearest_nonpositive_integer(z, ctx) {
        return Err(NumError::Pole(format!("log_gamma at {n}")));
    }
    let zc = z.to_c64();
    let guard = 24 + zc.norm().max(1.0).log2().ceil() as u32;
    let wp = ctx.bits() + guard;
    let zw = z.with_prec(wp);
    let mut val = if zc.re >= 0.5 {
        log_gamma_stirling(&zw, wp)
    } else {
        // log Γ(z) = log π − log sin(πz) − log Γ(1 − z)
        let pz = zw.scale(&pi(wp));
        let one_minus = &Cx::one(wp) - &zw;
        let mut v = -(&pz.sin().ln() + &log_gamma_stirling(&one_minus, wp));
        v.re += Float::with_val(wp, pi(wp).ln_ref());
        v
    };
    let est = im_log_gamma_estimate(zc);
    let twopi = Float::with_val(wp, pi(wp) * 2u32);
    let k = ((est - val.im.to_f64()) / (2.0 * PI)).round();
    if k != 0.0 {
        val.im += Float::with_val(wp, &twopi * k);
    }
    if zc.im == 0.0 && zc.re > 0.0 {
        val.im = Float::new(wp);
    }
    Ok(val.with_prec(ctx.bits()))
}

/// Γ(z) for complex z.
pub fn gamma(z: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    Ok(log_gamma(z, ctx)?.exp())
}

/// 1/Γ(z) for complex z, zero at the poles of Γ.
pub fn rgamma(z: &Cx, ctx: &PrecisionContext) -> Cx {
    match log_gamma(z, ctx) {
        Ok(l) => (-l).exp(),
        Err(_) => ctx.zero(),
    }
}

/// Γ(x) for real x.
pub fn gamma_real(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let xf = x.to_f64();
    if xf <= 0.5 && (xf - xf.round()).abs() < ctx.pole_tolerance() {
        return Err(NumError::Pole(format!("gamma at {}", xf.round())));
    }
    Ok(Float::with_val(ctx.bits(), x.gamma_ref()))
}

/// 1/Γ(x) for real x, exactly zero at nonpositive integers.
pub fn rgamma_real(x: &Float, ctx: &PrecisionContext) -> Float {
    match gamma_real(x, ctx) {
        Ok(g) => Float::with_val(ctx.bits(), g.recip_ref()),
        Err(_) => Float::new(ctx.bits()),
    }
}

/// Π Γ(s − a_i) / Π Γ(1 + b_j − s), with a single final exponential.
pub fn gamma_ratio(num_shifts: &[f64], den_shifts: &[f64], s: &Cx, ctx: &PrecisionContext) -> Result<Cx> {
    let p = ctx.bits();
    let mut acc = Cx::zero(p + 16);
    let wctx = PrecisionContext { mantissa_bits: p + 16, ..*ctx };
    for &a in num_shifts {
        let mut arg = s.with_prec(p + 16);
        arg.re -= a;
        acc += &log_gamma(&arg, &wctx)?;
    }
    for &b in den_shifts {
        let mut arg = -&s.with_prec(p + 16);
        arg.re += 1.0 + b;
        match log_gamma(&arg, &wctx) {
            Ok(l) => acc -= &l,
            Err(NumError::Pole(_)) => return Ok(ctx.zero()),
            Err(e) => return Err(e),
        }
    }
    Ok(acc.exp().with_prec(p))
}

/// Residue of Γ at −n: (−1)ⁿ/n!.
pub fn gamma_residue(n: u32) -> f64 {
    let mut f = 1.0;
    for k in 1..=n {
        f /= k as f64;
    }
    if n % 2 == 1 {
        -f
    } else {
        f
    }
}

/// Γ(z + δ)/Γ(z + ρ) ≈ z^{δ−ρ} for large |z| off the negative axis.
pub fn stirling_ratio(z: &Cx, delta: f64, rho: f64) -> Result<Cx> {
    if z.im.is_zero() && z.re <= 0 {
        return Err(NumError::Cut(format!("stirling_ratio at z = {:?}", z)));
    }
    if delta == rho {
        return Ok(Cx::one(z.prec()));
    }
    Ok(z.powf(delta - rho))
}

//! ∫₀¹ U(tx)V(ty) dt for two Mellin–Barnes functions U, V given by residue series.
//!
//! Each pair of residue families contributes x^{b}y^{b'}∫₀¹ t^{b+b'} H(tx)H'(ty) dt with
//! H, H' entire; the t-integral uses a Gauss rule for the weight t^{b+b'}.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rug::Float;

use crate::error::{NumError, Result};
use crate::gammakit::{log2_float, Cx, PrecisionContext};
use crate::meijer::{MeijerSeriesSpec, ResidueExpansion, ResidueFamily, RESONANCE_TOL};
use crate::quad::{gauss_unit_power_exact, Rule};

/// Most Taylor terms subtracted at t = 0 before a pair is summed as a series instead.
const TAYLOR_MAX: usize = 6;
const GUARD: u32 = 48;

type RuleKey = (usize, (rug::Integer, i32), u32);

static RULES: Lazy<Mutex<HashMap<RuleKey, Arc<Rule>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn cached_rule(n: usize, e: &Float, prec: u32) -> Result<Arc<Rule>> {
    let key = (n, e.to_integer_exp().unwrap_or_default(), prec);
    if let Some(r) = RULES.lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let r = Arc::new(gauss_unit_power_exact(n, e, &PrecisionContext::with_bits(prec))?);
    RULES.lock().unwrap().insert(key, r.clone());
    Ok(r)
}

/// x^b for x ≥ 0.
pub(crate) fn real_pow(x: &Float, b: &Float) -> Result<Float> {
    let p = x.prec();
    if x.is_zero() {
        return if b.is_zero() {
            Ok(Float::with_val(p, 1))
        } else if b.is_sign_positive() {
            Ok(Float::new(p))
        } else {
            Err(NumError::Domain(format!("x^{} at x = 0", b.to_f64())))
        };
    }
    Ok((Float::with_val(p, x.ln_ref()) * b).exp())
}

/// Σ_k c_k z^k for real z, with log2 of the largest term.
fn family_sum(fam: &mut ResidueFamily, z: &Float, growth: usize, prec: u32) -> (Float, f64) {
    let zf = z.to_f64().abs();
    let mut zk = Float::with_val(prec, 1);
    for _ in 0..fam.start() {
        zk *= z;
    }
    let mut sum = Float::new(prec);
    let mut running = f64::NEG_INFINITY;
    let mut small = 0usize;
    let mut k = fam.start();
    loop {
        let c = fam.coeff(k);
        let t = Float::with_val(prec, &c * &zk);
        let lt = log2_float(&Float::with_val(prec, t.abs_ref()));
        running = running.max(lt);
        sum += &t;
        let past_peak = (k as f64 + 1.0).powi(growth.max(1) as i32) > 2.0 * zf;
        if lt < running - prec as f64 || c.is_zero() {
            small += 1;
        } else {
            small = 0;
        }
        if (small >= 10 && past_peak) || zf == 0.0 {
            break;
        }
        zk *= z;
        k += 1;
    }
    (sum, running)
}

struct PairValue {
    value: Float,
    peak: f64,
}

/// Taylor coefficients g_k, k < n, of H(tx)H'(ty) in t.
fn product_taylor(fu: &mut ResidueFamily, x: &Float, fv: &mut ResidueFamily, y: &Float, n: usize, prec: u32) -> Vec<Float> {
    let cu: Vec<Float> = (0..n).map(|i| fu.coeff(i) * Float::with_val(prec, x.pow_u(i as u32))).collect();
    let cv: Vec<Float> = (0..n).map(|i| fv.coeff(i) * Float::with_val(prec, y.pow_u(i as u32))).collect();
    (0..n)
        .map(|k| {
            let mut g = Float::new(prec);
            for i in 0..=k {
                g += Float::with_val(prec, &cu[i] * &cv[k - i]);
            }
            g
        })
        .collect()
}

trait PowU {
    fn pow_u(&self, n: u32) -> Float;
}

impl PowU for Float {
    fn pow_u(&self, n: u32) -> Float {
        let mut acc = Float::with_val(self.prec(), 1);
        for _ in 0..n {
            acc *= self;
        }
        acc
    }
}

/// ∫₀¹ t^e H(tx)H'(ty) dt with an n-point rule, e > −1 after subtracting `taylor` terms.
#[allow(clippy::too_many_arguments)]
fn pair_quadrature(
    fu: &mut ResidueFamily,
    x: &Float,
    gu: usize,
    fv: &mut ResidueFamily,
    y: &Float,
    gv: usize,
    e: &Float,
    n: usize,
    prec: u32,
) -> Result<PairValue> {
    let ef = e.to_f64();
    let kk = if ef > -1.0 { 0 } else { (-1.0 - ef).floor() as usize + 1 };
    for k in 0..=kk {
        if (ef + 1.0 + k as f64).abs() < RESONANCE_TOL {
            return Err(NumError::Resonance(format!("t-exponent {ef} makes the t-integral diverge")));
        }
    }
    if kk > TAYLOR_MAX {
        return pair_series(fu, x, gu, fv, y, gv, e, prec);
    }
    let taylor = product_taylor(fu, x, fv, y, kk, prec);
    let mut value = Float::new(prec);
    for (k, g) in taylor.iter().enumerate() {
        value += Float::with_val(prec, g / Float::with_val(prec, e + (k + 1) as u32));
    }
    let ew = Float::with_val(prec, e + kk as u32);
    let rule = cached_rule(n, &ew, prec)?;
    let mut peak = f64::NEG_INFINITY;
    let mut acc = Float::new(prec);
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = Float::with_val(prec, t);
        let (hu, pu) = family_sum(fu, &Float::with_val(prec, &t * x), gu, prec);
        let (hv, pv) = family_sum(fv, &Float::with_val(prec, &t * y), gv, prec);
        peak = peak.max(pu + pv);
        let mut g = Float::with_val(prec, &hu * &hv);
        if kk > 0 {
            let mut tk = Float::with_val(prec, 1);
            for c in &taylor {
                g -= Float::with_val(prec, c * &tk);
                tk *= &t;
            }
            g /= &tk;
        }
        acc += Float::with_val(prec, &g * w);
    }
    value += &acc;
    Ok(PairValue { value, peak })
}

/// Σ_{k,m} c_k c'_m x^k y^m/(e + k + m + 1): the same pair integral summed termwise.
#[allow(clippy::too_many_arguments)]
fn pair_series(
    fu: &mut ResidueFamily,
    x: &Float,
    gu: usize,
    fv: &mut ResidueFamily,
    y: &Float,
    gv: usize,
    e: &Float,
    prec: u32,
) -> Result<PairValue> {
    let tu = fu.terms(&Cx::from_real(x.clone()), gu);
    let tv = fv.terms(&Cx::from_real(y.clone()), gv);
    let (su, sv) = (fu.start(), fv.start());
    let mut value = Float::new(prec);
    let mut peak = f64::NEG_INFINITY;
    for (i, a) in tu.iter().enumerate() {
        for (m, b) in tv.iter().enumerate() {
            let den = Float::with_val(prec, e + (i + m + su + sv + 1) as u32);
            let t = Float::with_val(prec, &a.re * &b.re) / den;
            peak = peak.max(log2_float(&Float::with_val(prec, t.abs_ref())));
            value += &t;
        }
    }
    Ok(PairValue { value, peak })
}

/// The full t-integral at one rule size, with the bits lost to cancellation.
fn integral_at(eu: &mut ResidueExpansion, x: &Float, ev: &mut ResidueExpansion, y: &Float, n: usize) -> Result<(Float, f64)> {
    let prec = eu.prec();
    let (gu, gv) = (eu.growth_order(), ev.growth_order());
    let mut total = Float::new(prec);
    let mut peak = f64::NEG_INFINITY;
    for fu in eu.families.iter_mut() {
        for fv in ev.families.iter_mut() {
            let e = Float::with_val(prec, &fu.exponent + &fv.exponent);
            let pv = pair_quadrature(fu, x, gu, fv, y, gv, &e, n, prec)?;
            let scale = real_pow(x, &fu.exponent)? * real_pow(y, &fv.exponent)?;
            let contrib = Float::with_val(prec, &pv.value * &scale);
            peak = peak.max(pv.peak + log2_float(&Float::with_val(prec, scale.abs_ref())));
            peak = peak.max(log2_float(&Float::with_val(prec, contrib.abs_ref())));
            total += &contrib;
        }
    }
    let pre = Float::with_val(prec, &eu.prefactor().re * &ev.prefactor().re);
    total *= &pre;
    let mag = log2_float(&Float::with_val(prec, total.abs_ref()));
    let lost = if mag.is_finite() { (peak - mag).max(0.0) } else { 0.0 };
    Ok((total, lost))
}

/// ∫₀¹ U(tx)V(ty) dt for x, y ≥ 0 and real, non-resonant specs without phase.
pub fn product_integral(u: &MeijerSeriesSpec, x: f64, v: &MeijerSeriesSpec, y: f64, ctx: &PrecisionContext) -> Result<Cx> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(NumError::Domain(format!("t-integral needs x, y ≥ 0, got ({x}, {y})")));
    }
    if u.phase != 0.0 || v.phase != 0.0 || !u.prefactor.im.is_zero() || !v.prefactor.im.is_zero() {
        return Err(NumError::Invalid("t-integral expects real specs without phase".into()));
    }
    if u.m == 0 || v.m == 0 {
        return Ok(ctx.zero());
    }
    let bits = ctx.bits();
    let mut wp = bits + GUARD;
    for _ in 0..4 {
        let mut eu = ResidueExpansion::new(u, wp)?;
        let mut ev = ResidueExpansion::new(v, wp)?;
        let xf = Float::with_val(wp, x);
        let yf = Float::with_val(wp, y);
        let mut prev: Option<Float> = None;
        let mut n = 24;
        let mut raised = false;
        while n <= 768 {
            let (val, lost) = integral_at(&mut eu, &xf, &mut ev, &yf, n)?;
            if lost + 16.0 > (wp - bits) as f64 {
                wp = bits + lost.ceil() as u32 + GUARD;
                raised = true;
                break;
            }
            if let Some(pv) = &prev {
                let diff = Float::with_val(wp, &val - pv).abs().to_f64();
                let mag = Float::with_val(wp, val.abs_ref()).to_f64();
                if diff <= ctx.tol() * mag || diff <= (-(bits as f64)).exp2() {
                    return Ok(Cx::from_real(val.clone()).with_prec(bits));
                }
            }
            prev = Some(val);
            n *= 2;
        }
        if !raised {
            return Err(NumError::Convergence("t-integral rule refinement did not settle".into()));
        }
    }
    Err(NumError::Precision("t-integral cancellation exceeds the precision budget".into()))
}

/// Σ α_t β_s x^{e_t} y^{e_s}/(1 + e_t + e_s): the same integral as an exact double residue series.
pub fn product_series(u: &MeijerSeriesSpec, x: f64, v: &MeijerSeriesSpec, y: f64, ctx: &PrecisionContext) -> Result<Cx> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(NumError::Domain(format!("double series needs x, y > 0, got ({x}, {y})")));
    }
    if u.m == 0 || v.m == 0 {
        return Ok(ctx.zero());
    }
    let bits = ctx.bits();
    let mut wp = bits + GUARD;
    for _ in 0..5 {
        let mut eu = ResidueExpansion::new(u, wp)?;
        let mut ev = ResidueExpansion::new(v, wp)?;
        let lx = Cx::from_real(Float::with_val(wp, x).ln());
        let ly = Cx::from_real(Float::with_val(wp, y).ln());
        let (val, lost) = crate::parametrix::double_residue_sum(&mut eu, &lx, &mut ev, &ly, 1.0)?;
        if lost + 16.0 < (wp - bits) as f64 {
            return Ok(val.with_prec(bits));
        }
        wp = bits + lost.ceil() as u32 + GUARD;
    }
    Err(NumError::Precision("double series cancellation exceeds the precision budget".into()))
}

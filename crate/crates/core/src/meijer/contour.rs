//! Direct quadrature of the Mellin–Barnes integral.

use rug::Float;

use super::MeijerSeriesSpec;
use crate::error::{NumError, Result};
use crate::gammakit::{log_gamma, pi, Cx, PrecisionContext};

/// Path s(τ) = abscissa + iτ − bend·τ², τ ∈ [−truncation_height, truncation_height].
///
/// A positive bend turns both ends of the line to the left, which makes the integrand
/// decay for every argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub abscissa: f64,
    pub truncation_height: f64,
    /// Initial nodes per unit height; doubled until successive refinements agree.
    pub node_count: usize,
    pub bend: f64,
}

const DEFAULT_BEND: f64 = 0.2;

impl ContourSpec {
    /// Vertical line when the Gamma factors beat |e^{−sL}|, bent path otherwise.
    pub fn auto(spec: &MeijerSeriesSpec, im_log: f64) -> ContourSpec {
        let abscissa = spec.numerator().iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max) + 0.75;
        let budget = (2.0 * spec.m as f64 - spec.q() as f64) * std::f64::consts::FRAC_PI_2;
        let bend = if budget - im_log.abs() > 0.5 { 0.0 } else { DEFAULT_BEND };
        ContourSpec { abscissa, truncation_height: f64::NAN, node_count: 4, bend }
    }

    fn point(&self, tau: &Float) -> (Cx, Cx) {
        let p = tau.prec();
        let mut s = Cx::from_parts(Float::with_val(p, self.abscissa), tau.clone());
        let t2 = Float::with_val(p, tau.square_ref());
        s.re -= t2 * self.bend;
        let ds = Cx::from_parts(Float::with_val(p, tau * (-2.0 * self.bend)), Float::with_val(p, 1));
        (s, ds)
    }
}

fn log_integrand(spec: &MeijerSeriesSpec, l: &Cx, s: &Cx, ctx: &PrecisionContext) -> Result<Option<Cx>> {
    let p = ctx.bits();
    let mut acc = -(s * l);
    for &b in spec.numerator() {
        let mut z = s.clone();
        z.re += b;
        acc += &log_gamma(&z, ctx)?;
    }
    for &b in spec.denominator() {
        let mut z = -s;
        z.re += 1u32;
        z.re -= b;
        match log_gamma(&z, ctx) {
            Ok(v) => acc -= &v,
            Err(NumError::Pole(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(acc.with_prec(p)))
}

fn integrand(
    spec: &MeijerSeriesSpec,
    contour: &ContourSpec,
    l: &Cx,
    tau: f64,
    ctx: &PrecisionContext,
) -> Result<(Cx, f64)> {
    let (s, ds) = contour.point(&Float::with_val(ctx.bits(), tau));
    match log_integrand(spec, l, &s, ctx)? {
        Some(lf) => {
            let log2 = lf.re.to_f64() / std::f64::consts::LN_2 + ds.log2_abs();
            Ok((&lf.exp() * &ds, log2))
        }
        None => Ok((ctx.zero(), f64::NEG_INFINITY)),
    }
}

/// Height beyond which the integrand stays below 2^{cut} on one side.
fn scan_height(
    spec: &MeijerSeriesSpec,
    contour: &ContourSpec,
    l: &Cx,
    sign: f64,
    drop_bits: f64,
) -> Result<f64> {
    let lo = PrecisionContext::with_bits(64);
    let ll = l.with_prec(64);
    let mut peak = f64::NEG_INFINITY;
    let mut below = 0;
    let step = 0.5;
    let mut tau = 0.0f64;
    while tau < 1e4 {
        let (_, m) = integrand(spec, contour, &ll, sign * tau, &lo)?;
        peak = peak.max(m);
        if m < peak - drop_bits {
            below += 1;
            if below >= 5 {
                return Ok(tau);
            }
        } else {
            below = 0;
        }
        tau += step;
    }
    Err(NumError::NonDecay(format!("integrand does not decay along the contour (peak 2^{peak:.1})")))
}

/// Contour value at an explicit log-argument L₀ = log ζ.
pub fn meijer_contour_log(
    spec: &MeijerSeriesSpec,
    contour: Option<&ContourSpec>,
    log_zeta: &Cx,
    ctx: &PrecisionContext,
) -> Result<Cx> {
    if spec.m == 0 {
        return Ok(ctx.zero());
    }
    let p0 = ctx.bits();
    let mut l = log_zeta.with_prec(p0 + 32);
    l.im -= Float::with_val(p0 + 32, pi(p0 + 32) * spec.phase);
    let im_l = l.im.to_f64();
    let mut c = match contour {
        Some(c) => c.clone(),
        None => ContourSpec::auto(spec, im_l),
    };
    if let Some(&worst) = spec.numerator().iter().map(|b| -b).collect::<Vec<_>>().iter().max_by(|a, b| a.total_cmp(b)) {
        if c.abscissa <= worst {
            return Err(NumError::Invalid(format!("abscissa {} is left of the pole at {worst}", c.abscissa)));
        }
    }
    let budget = (2.0 * spec.m as f64 - spec.q() as f64) * std::f64::consts::FRAC_PI_2;
    if c.bend == 0.0 && budget <= im_l.abs() {
        return Err(NumError::NonDecay(format!(
            "|Im L| = {:.3} exceeds the vertical decay budget {budget:.3}",
            im_l.abs()
        )));
    }
    let rel_tol = ctx.tol().min(1e-15);
    let drop_bits = -(rel_tol.log2()) + 16.0;
    let (t_lo, t_hi) = if c.truncation_height.is_finite() {
        (c.truncation_height, c.truncation_height)
    } else {
        let a = scan_height(spec, &c, &l, -1.0, drop_bits)?;
        let b = scan_height(spec, &c, &l, 1.0, drop_bits)?;
        c.truncation_height = a.max(b);
        (a, b)
    };

    let mut wp = p0 + 32;
    for _ in 0..4 {
        let wctx = PrecisionContext { mantissa_bits: wp, ..*ctx };
        let lw = l.with_prec(wp);
        let mut h = 1.0 / c.node_count.max(1) as f64;
        // trapezoid on [−t_lo, t_hi] with nodes on the grid hℤ
        let mut sum = wctx.zero();
        let mut peak = f64::NEG_INFINITY;
        let n_lo = (t_lo / h).ceil() as i64;
        let n_hi = (t_hi / h).ceil() as i64;
        for k in -n_lo..=n_hi {
            let (f, m) = integrand(spec, &c, &lw, k as f64 * h, &wctx)?;
            peak = peak.max(m);
            sum += &f;
        }
        let mut prev = sum.scale_f64(h);
        let mut converged = None;
        for _ in 0..14 {
            h *= 0.5;
            let n_lo = (t_lo / h).ceil() as i64;
            let n_hi = (t_hi / h).ceil() as i64;
            for k in -n_lo..=n_hi {
                if k % 2 != 0 {
                    let (f, m) = integrand(spec, &c, &lw, k as f64 * h, &wctx)?;
                    peak = peak.max(m);
                    sum += &f;
                }
            }
            let cur = sum.scale_f64(h);
            let diff = cur.dist(&prev);
            let scale = cur.abs().to_f64();
            prev = cur;
            if diff <= rel_tol * scale * 1e-2 {
                converged = Some(prev.clone());
                break;
            }
        }
        let Some(v) = converged else {
            return Err(NumError::Convergence("trapezoid refinement did not converge".into()));
        };
        // (1/2πi) ∫ F(s(τ)) s'(τ) dτ
        let two_pi_i = Cx::from_parts(Float::new(wp), Float::with_val(wp, pi(wp) * 2u32));
        let v = &v / &two_pi_i;
        let lost = peak - v.log2_abs() + (t_lo + t_hi).log2();
        if lost + 8.0 < (wp - p0) as f64 {
            let pre = spec.prefactor.with_prec(wp);
            return Ok((&v * &pre).with_prec(p0));
        }
        wp = p0 + lost.ceil() as u32 + 32;
    }
    Err(NumError::Precision("contour integral cancellation exceeds the precision budget".into()))
}

/// Contour value at ζ on the principal sheet.
pub fn meijer_contour(
    spec: &MeijerSeriesSpec,
    contour: Option<&ContourSpec>,
    zeta: &Cx,
    ctx: &PrecisionContext,
) -> Result<Cx> {
    if zeta.is_zero() {
        return Err(NumError::Domain("contour evaluation needs ζ ≠ 0".into()));
    }
    let l = zeta.with_prec(ctx.bits() + 32).ln();
    meijer_contour_log(spec, contour, &l, ctx)
}

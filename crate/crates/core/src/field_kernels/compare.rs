//! Kernels of related fields expressed through the same machinery, and chain separation.

use rayon::prelude::*;
use rug::Float;

use super::{limit_kernel_route, product_integral, FieldParams, KernelRoute};
use crate::error::{NumError, Result};
use crate::gammakit::{Cx, PrecisionContext};
use crate::meijer::{perturbation_direction, richardson, MeijerSeriesSpec, ResidueExpansion, PERTURBATION_STEP};
use crate::quad::tanh_sinh_unit;

/// The four kernels of the two-level field in the 0/1 labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bgs3Label {
    K00,
    K01,
    K10,
    K11,
}

impl Bgs3Label {
    pub fn parse(s: &str) -> Result<Bgs3Label> {
        match s {
            "00" => Ok(Bgs3Label::K00),
            "01" => Ok(Bgs3Label::K01),
            "10" => Ok(Bgs3Label::K10),
            "11" => Ok(Bgs3Label::K11),
            _ => Err(NumError::Invalid(format!("kernel label {s:?} is not one of 00, 01, 10, 11"))),
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Bgs3Label::K00 => (false, false),
            Bgs3Label::K01 => (false, true),
            Bgs3Label::K10 => (true, false),
            Bgs3Label::K11 => (true, true),
        }
    }
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < crate::meijer::RESONANCE_TOL
}

/// 𝒢_{xy}(ζ, ξ): the double integral with Γ-ratios in u (at ζ) and v (at ξ) over 1/(1 − u − v),
/// minus 1/(ζ + ξ) for the label 11.
pub fn bgs3_kernel(which: Bgs3Label, zeta: f64, xi: f64, a: f64, b: f64, ctx: &PrecisionContext) -> Result<Cx> {
    if !(a > -1.0 && b > -1.0 && a + b > -1.0) {
        return Err(NumError::Constraint(format!("need a, b, a + b > −1, got a = {a}, b = {b}")));
    }
    if !(zeta > 0.0 && xi > 0.0) {
        return Err(NumError::Domain(format!("arguments must be positive, got ({zeta}, {xi})")));
    }
    let (xu, yv) = which.bits();
    let eval = |a: f64, b: f64, ctx: &PrecisionContext| -> Result<Cx> {
        let su = if xu {
            MeijerSeriesSpec::from_lists(&[0.0, a], &[-b])?
        } else {
            MeijerSeriesSpec::from_lists(&[a], &[0.0, -b])?
        };
        let sv = if yv {
            MeijerSeriesSpec::from_lists(&[0.0, b], &[-a])?
        } else {
            MeijerSeriesSpec::from_lists(&[b], &[0.0, -a])?
        };
        product_integral(&su, zeta, &sv, xi, ctx)
    };
    let resonant = (xu && is_integer(a)) || (yv && is_integer(b));
    let mut v = if resonant {
        let wctx = PrecisionContext { mantissa_bits: ctx.bits() + 64, ..*ctx };
        richardson(PERTURBATION_STEP, |eps| {
            eval(a + eps * perturbation_direction(0), b + eps * perturbation_direction(1), &wctx)
        })?
        .with_prec(ctx.bits())
    } else {
        eval(a, b, ctx)?
    };
    if which == Bgs3Label::K11 {
        v.re -= Float::with_val(ctx.bits(), zeta + xi).recip();
    }
    Ok(v)
}

/// ∫₀¹ U(tx)V(ty) dt by tanh-sinh on the full function values.
fn full_product(u: &MeijerSeriesSpec, x: f64, v: &MeijerSeriesSpec, y: f64, ctx: &PrecisionContext) -> Result<Cx> {
    let bits = ctx.bits();
    let wp = bits + 64;
    let mut eu = ResidueExpansion::new(u, wp)?;
    let mut ev = ResidueExpansion::new(v, wp)?;
    let lx = Float::with_val(wp, x).ln();
    let ly = Float::with_val(wp, y).ln();
    let rctx = PrecisionContext::with_bits(wp);
    let mut prev: Option<Cx> = None;
    let mut h = 0.125;
    while h > 1.0 / 512.0 {
        let rule = tanh_sinh_unit(h, 4.0, &rctx);
        let mut acc = Cx::zero(wp);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            if t.is_zero() {
                continue;
            }
            let lt = Float::with_val(wp, t.ln_ref());
            let (fu, lu) = eu.eval_log(&Cx::from_real(Float::with_val(wp, &lt + &lx)), 0);
            let (fv, lv) = ev.eval_log(&Cx::from_real(Float::with_val(wp, &lt + &ly)), 0);
            if lu.max(lv) + 16.0 > 64.0 {
                return Err(NumError::Precision("Meijer product loses too many bits".into()));
            }
            acc += &(&fu[0] * &fv[0]).scale(w);
        }
        if let Some(pv) = &prev {
            if pv.dist(&acc) <= ctx.tol() * acc.abs().to_f64().max(1e-300) {
                return Ok(acc.with_prec(bits));
            }
        }
        prev = Some(acc);
        h /= 2.0;
    }
    Err(NumError::Convergence("tanh-sinh refinement did not settle".into()))
}

/// K_ν^M(x, y) = ∫₀¹ G^{1,0}_{0,M+1}(tx | −ν₀, …, −ν_M) G^{M,0}_{0,M+1}(ty | ν₁, …, ν_M, ν₀) dt.
///
/// `nu` lists ν₁..ν_M, optionally preceded by ν₀ = 0.
pub fn kz_kernel(m: usize, nu: &[u32], x: f64, y: f64, ctx: &PrecisionContext) -> Result<Cx> {
    if m == 0 {
        return Err(NumError::Invalid("M must be at least 1".into()));
    }
    let rest: Vec<f64> = if nu.len() == m {
        nu.iter().map(|&v| v as f64).collect()
    } else if nu.len() == m + 1 && nu[0] == 0 {
        nu[1..].iter().map(|&v| v as f64).collect()
    } else {
        return Err(NumError::Invalid(format!("need ν₁..ν_M (M = {m}) with ν₀ = 0, got {nu:?}")));
    };
    if !(x > 0.0 && y > 0.0) {
        return Err(NumError::Domain(format!("arguments must be positive, got ({x}, {y})")));
    }
    let eval = |nus: &[f64], ctx: &PrecisionContext| -> Result<Cx> {
        let neg: Vec<f64> = nus.iter().map(|v| -v).collect();
        let first = MeijerSeriesSpec::from_lists(&[0.0], &neg)?;
        let second = MeijerSeriesSpec::from_lists(nus, &[0.0])?;
        full_product(&first, x, &second, y, ctx)
    };
    if m == 1 {
        return eval(&rest, ctx);
    }
    let wctx = PrecisionContext { mantissa_bits: ctx.bits() + 64, ..*ctx };
    let v = richardson(PERTURBATION_STEP, |eps| {
        let shifted: Vec<f64> = rest.iter().enumerate().map(|(i, v)| v + eps * perturbation_direction(i)).collect();
        eval(&shifted, &wctx)
    })?;
    Ok(v.with_prec(ctx.bits()))
}

/// Which of the two scalings of the chain-separation limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationScaling {
    /// Λ^{p−q+1}: the head subchain a₁..a_{q−1} survives.
    Head,
    /// Λ^q: the tail subchain a_{q+1}..a_p survives.
    Tail,
}

/// Largest Λ the residue series are trusted with.
const LAMBDA_MAX: f64 = 1e3;

fn separated_params(q: usize, lambda: f64, fp: &FieldParams) -> Result<FieldParams> {
    let p = fp.p();
    if q == 0 || q > p {
        return Err(NumError::Invalid(format!("q = {q} outside 1..={p}")));
    }
    if !(lambda >= 1.0) {
        return Err(NumError::Domain(format!("Λ = {lambda} must be at least 1")));
    }
    if lambda > LAMBDA_MAX {
        return Err(NumError::Domain(format!("Λ = {lambda} exceeds the supported range ≤ {LAMBDA_MAX}")));
    }
    let mut a = fp.exps.a().to_vec();
    a[q - 1] = lambda;
    FieldParams::new(a, fp.ctx())
}

/// [s·G_{jℓ}(sξ, sη)] over all levels, with a_q = Λ and s = Λ^{p−q+1} or Λ^q.
pub fn separation_block(
    q: usize,
    lambda: f64,
    scaling: SeparationScaling,
    xi: f64,
    eta: f64,
    fp: &FieldParams,
) -> Result<Vec<Vec<Cx>>> {
    let p = fp.p();
    let sp = separated_params(q, lambda, fp)?;
    let power = match scaling {
        SeparationScaling::Head => p - q + 1,
        SeparationScaling::Tail => q,
    };
    let s = lambda.powi(power as i32);
    let cells: Vec<(usize, usize)> = (1..=p).flat_map(|j| (1..=p).map(move |l| (j, l))).collect();
    let vals: Vec<Cx> = cells
        .par_iter()
        .map(|&(j, l)| limit_kernel_route(j, l, s * xi, s * eta, KernelRoute::ResidueCorrected, &sp).map(|v| v.scale_f64(s)))
        .collect::<Result<_>>()?;
    Ok(vals.chunks(p).map(|r| r.to_vec()).collect())
}

/// The limiting block predicted for a scaling: G^{(q−1)}(ξ, η; a₁..a_{q−1}) in the head corner,
/// or (ξ/η)^{a_{1q}} G^{(p−q)}(ξ, η; a_{q+1}..a_p) in the tail corner; `None` outside the block.
pub fn separation_reference(
    q: usize,
    lambda: f64,
    scaling: SeparationScaling,
    xi: f64,
    eta: f64,
    fp: &FieldParams,
) -> Result<Vec<Vec<Option<Cx>>>> {
    let p = fp.p();
    let sp = separated_params(q, lambda, fp)?;
    let a = sp.exps.a().to_vec();
    let mut out = vec![vec![None; p]; p];
    let route = KernelRoute::ResidueCorrected;
    match scaling {
        SeparationScaling::Head if q >= 2 => {
            let sub = FieldParams::new(a[..q - 1].to_vec(), fp.ctx())?;
            for j in 1..q {
                for l in 1..q {
                    out[j - 1][l - 1] = Some(limit_kernel_route(j, l, xi, eta, route, &sub)?);
                }
            }
        }
        SeparationScaling::Tail if q < p => {
            let sub = FieldParams::new(a[q..].to_vec(), fp.ctx())?;
            let prec = fp.ctx().bits();
            let a1q = sp.exps.a_sum(1, q);
            let f = Float::with_val(prec, Float::with_val(prec, xi / eta).ln() * a1q).exp();
            for j in 1..=p - q {
                for l in 1..=p - q {
                    out[q + j - 1][q + l - 1] = Some(limit_kernel_route(j, l, xi, eta, route, &sub)?.scale(&f));
                }
            }
        }
        _ => {}
    }
    Ok(out)
}

/// Both scalings of the separation limit.
#[derive(Debug, Clone)]
pub struct SeparationScan {
    pub head: Vec<Vec<Cx>>,
    pub tail: Vec<Vec<Cx>>,
}

pub fn separation_scan(q: usize, lambda: f64, xi: f64, eta: f64, fp: &FieldParams) -> Result<SeparationScan> {
    Ok(SeparationScan {
        head: separation_block(q, lambda, SeparationScaling::Head, xi, eta, fp)?,
        tail: separation_block(q, lambda, SeparationScaling::Tail, xi, eta, fp)?,
    })
}

//! Hard-edge scaling of the finite kernels against the Meijer-G limit kernels.

use std::sync::Arc;

use super::{biorthogonal_system, finite_kernels, FiniteKernelSet, Potential};
use crate::error::{NumError, Result};
use crate::field_kernels::{gauged_kernel, FieldParams, KernelRoute};
use crate::gammakit::PrecisionContext;

/// The scaling constant of the three-matrix chain.
pub const C0_P3: f64 = 27.0 / 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityRow {
    pub n: usize,
    /// c₀n^{−(p+1)} n^{ϖ_ℓ−ϖ_j} 𝕂_{jℓ}(c₀ξ/n^{p+1}, c₀η/n^{p+1}).
    pub finite: f64,
    /// c₀^{(ϖ_ℓ−ϖ_j)/(p+1)} times the gauged limit kernel at (ξ, η).
    pub limit: f64,
    /// |finite − limit| / |limit|.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityTable {
    pub j: usize,
    pub l: usize,
    pub xi: f64,
    pub eta: f64,
    pub c0: f64,
    pub rows: Vec<UniversalityRow>,
}

fn resolve_c0(p: usize, c0: Option<f64>) -> Result<f64> {
    match (p, c0) {
        (_, Some(c)) if c > 0.0 && c.is_finite() => Ok(c),
        (_, Some(c)) => Err(NumError::Invalid(format!("c0 = {c} must be positive"))),
        (3, None) => Ok(C0_P3),
        (p, None) => Err(NumError::Invalid(format!("no scaling constant is known for p = {p}; pass c0"))),
    }
}

/// The limit side, independent of n.
fn limit_value(j: usize, l: usize, xi: f64, eta: f64, c0: f64, fp: &FieldParams) -> Result<f64> {
    let p = fp.p() as f64;
    let dw = fp.kappa[l - 1][j - 1].to_f64();
    let g = gauged_kernel(j, l, xi, eta, KernelRoute::ResidueCorrected, fp)?;
    Ok(c0.powf(dw / (p + 1.0)) * g.re.to_f64())
}

/// The finite side at N = n from a kernel set with n terms.
fn finite_value(ks: &FiniteKernelSet, j: usize, l: usize, xi: f64, eta: f64, c0: f64, fp: &FieldParams) -> Result<f64> {
    let n = ks.n as f64;
    let q = fp.p() as f64 + 1.0;
    let dw = fp.kappa[l - 1][j - 1].to_f64();
    let s = c0 / n.powf(q);
    let k = ks.k_kernel(j, l, s * xi, s * eta)?;
    Ok(k.to_f64() * s * n.powf(dw))
}

/// The kernel set of size n for the chain with N = n.
fn scaled_set(pot: &Potential, n: usize, ctx: &PrecisionContext) -> Result<FiniteKernelSet> {
    let mut pn = pot.clone();
    pn.n_scale = n as f64;
    let sys = biorthogonal_system(&pn, n - 1, ctx)?;
    finite_kernels(Arc::new(sys), n)
}

fn check(pot: &Potential, j: usize, l: usize, xi: f64, eta: f64, fp: &FieldParams) -> Result<()> {
    if pot.exps.a() != fp.exps.a() {
        return Err(NumError::Invalid("potential and field use different exponents".into()));
    }
    let p = pot.p();
    if j == 0 || l == 0 || j > p || l > p {
        return Err(NumError::Invalid(format!("levels ({j}, {l}) outside 1..={p}")));
    }
    if !(xi > 0.0 && eta > 0.0) {
        return Err(NumError::Domain(format!("scaled points ({xi}, {eta}) must be positive")));
    }
    Ok(())
}

/// Finite-n scaled kernels against the limit, one row per n, with N = n.
#[allow(clippy::too_many_arguments)]
pub fn universality_compare(
    pot: &Potential,
    n_list: &[usize],
    j: usize,
    l: usize,
    xi: f64,
    eta: f64,
    c0: Option<f64>,
    fp: &FieldParams,
    ctx: &PrecisionContext,
) -> Result<UniversalityTable> {
    Ok(universality_compare_points(pot, n_list, j, l, &[(xi, eta)], c0, fp, ctx)?.remove(0))
}

/// One table per (ξ, η) point, sharing the finite-n kernel sets between points.
#[allow(clippy::too_many_arguments)]
pub fn universality_compare_points(
    pot: &Potential,
    n_list: &[usize],
    j: usize,
    l: usize,
    points: &[(f64, f64)],
    c0: Option<f64>,
    fp: &FieldParams,
    ctx: &PrecisionContext,
) -> Result<Vec<UniversalityTable>> {
    if points.is_empty() {
        return Err(NumError::Invalid("no comparison points".into()));
    }
    for &(xi, eta) in points {
        check(pot, j, l, xi, eta, fp)?;
    }
    let c0 = resolve_c0(pot.p(), c0)?;
    let mut tables = Vec::with_capacity(points.len());
    for &(xi, eta) in points {
        let limit = limit_value(j, l, xi, eta, c0, fp)?;
        tables.push((UniversalityTable { j, l, xi, eta, c0, rows: Vec::with_capacity(n_list.len()) }, limit));
    }
    for &n in n_list {
        if n == 0 {
            return Err(NumError::Invalid("n must be positive".into()));
        }
        let ks = scaled_set(pot, n, ctx)?;
        for (t, limit) in tables.iter_mut() {
            let finite = finite_value(&ks, j, l, t.xi, t.eta, c0, fp)?;
            let deviation = (finite - *limit).abs() / limit.abs();
            t.rows.push(UniversalityRow { n, finite, limit: *limit, deviation });
        }
    }
    Ok(tables.into_iter().map(|(t, _)| t).collect())
}

/// The c₀ minimising the summed squared relative deviation at one n over the given points,
/// by golden-section search on ln c₀ in [ln lo, ln hi].
#[allow(clippy::too_many_arguments)]
pub fn best_fit_c0(
    pot: &Potential,
    n: usize,
    j: usize,
    l: usize,
    points: &[(f64, f64)],
    bracket: (f64, f64),
    fp: &FieldParams,
    ctx: &PrecisionContext,
) -> Result<f64> {
    if points.is_empty() || n == 0 {
        return Err(NumError::Invalid("fit needs n > 0 and at least one point".into()));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(NumError::Invalid(format!("bad c0 bracket ({lo}, {hi})")));
    }
    for &(x, y) in points {
        check(pot, j, l, x, y, fp)?;
    }
    let ks = scaled_set(pot, n, ctx)?;
    let cost = |lc: f64| -> Result<f64> {
        let c0 = lc.exp();
        let mut s = 0.0;
        for &(x, y) in points {
            let lim = limit_value(j, l, x, y, c0, fp)?;
            let fin = finite_value(&ks, j, l, x, y, c0, fp)?;
            s += ((fin - lim) / lim).powi(2);
        }
        Ok(s)
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c)?, cost(d)?);
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d)?;
        }
    }
    Ok(((a + b) / 2.0).exp())
}

//! The five commands. Each writes a CSV (or a report) to the given sink and returns the exit code.

use std::io::Write;

use cauchy_chain::field_kernels::{limit_kernel_route, separation_block, separation_reference, FieldParams, KernelRoute, SeparationScaling};
use cauchy_chain::finite_chain::{best_fit_c0, universality_compare_points, Potential};
use cauchy_chain::spectral::SeparatedCurve;
use cauchy_chain::PrecisionContext;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::suite::{self, SuiteOptions};
use crate::{exit, CliError};

type Result<T> = std::result::Result<T, CliError>;

/// Numbers are written as the shortest decimal that round-trips the f64 value.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn ctx(cfg: &RunConfig) -> PrecisionContext {
    PrecisionContext::with_bits(cfg.precision_bits)
}

/// The `#` metadata block every CSV starts with.
fn header(out: &mut dyn Write, cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> Result<()> {
    writeln!(out, "# cauchy-chain {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# command: {command}")?;
    writeln!(out, "# config-hash: {}", cfg.hash())?;
    writeln!(out, "# precision-bits: {}", cfg.precision_bits)?;
    writeln!(out, "# number-format: shortest round-trip decimal of the binary64 value")?;
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

fn level_pairs(cfg: &RunConfig) -> Vec<(usize, usize)> {
    let js: Vec<usize> = cfg.j.map_or_else(|| (1..=cfg.p).collect(), |j| vec![j]);
    let ls: Vec<usize> = cfg.ell.map_or_else(|| (1..=cfg.p).collect(), |l| vec![l]);
    js.iter().flat_map(|&j| ls.iter().map(move |&l| (j, l))).collect()
}

/// G_{jℓ}(ξ, η) on the grid by the residue-corrected route, cross-checked by the double residue
/// route, or by the t-integral route on ξ = η where the double residue series is singular.
pub fn limit_kernel(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    cfg.validate()?;
    let fp = FieldParams::new(cfg.a.clone(), &ctx(cfg))?;
    let g = cfg.grid.points();
    let cells: Vec<(usize, usize, f64, f64)> = level_pairs(cfg)
        .into_iter()
        .flat_map(|(j, l)| {
            let g = g.clone();
            g.clone().into_iter().flat_map(move |x| g.clone().into_iter().map(move |y| (j, l, x, y)))
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(j, l, x, y)| {
            let v = limit_kernel_route(j, l, x, y, KernelRoute::ResidueCorrected, &fp)?;
            let check = if x == y { KernelRoute::ContourProduct } else { KernelRoute::DoubleResidue };
            let w = limit_kernel_route(j, l, x, y, check, &fp)?;
            Ok((v.re.to_f64(), v.im.to_f64(), v.dist(&w)))
        })
        .collect::<std::result::Result<Vec<_>, cauchy_chain::NumError>>()?;
    header(out, cfg, "limit-kernel", &[("grid", cfg.grid.to_string())])?;
    let mut w = csv_writer(out);
    w.write_record(["j", "ell", "xi", "eta", "re", "im", "route", "abs_route_disagreement"])?;
    for (&(j, l, x, y), (re, im, d)) in cells.iter().zip(rows) {
        w.write_record([j.to_string(), l.to_string(), num(x), num(y), num(re), num(im), "residue".into(), num(d)])?;
    }
    w.flush()?;
    Ok(exit::OK)
}

/// One line per selected criterion; exit 1 if any fails.
pub fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    cfg.validate()?;
    for s in &cfg.only {
        if !suite::CRITERIA.iter().any(|c| c.selected_by(std::slice::from_ref(s))) {
            return Err(crate::ConfigError::Value { key: "only".into(), msg: format!("`{s}` names no criterion") }.into());
        }
    }
    let opts = SuiteOptions { only: cfg.only.clone(), perturb_c2: cfg.perturb_c2 };
    let mut all = true;
    for c in suite::CRITERIA.iter().filter(|c| c.selected_by(&opts.only)) {
        let o = suite::run_one(c, &opts);
        writeln!(out, "{o}")?;
        out.flush()?;
        all &= o.pass;
    }
    Ok(if all { exit::OK } else { exit::VERIFY_FAILED })
}

/// Scaled finite kernels against the limit kernel, one row per (point, n).
pub fn universality(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    cfg.validate()?;
    if !(2..=3).contains(&cfg.p) {
        return Err(crate::ConfigError::Invalid(format!("universality needs p ∈ {{2, 3}}, got {}", cfg.p)).into());
    }
    if cfg.n.is_empty() || cfg.points.is_empty() {
        return Err(crate::ConfigError::Invalid("universality needs at least one n and one point".into()).into());
    }
    let c = ctx(cfg);
    let fp = FieldParams::new(cfg.a.clone(), &c)?;
    let pot = Potential::laguerre(cfg.a.clone(), 1.0)?;
    let (j, l) = (cfg.j.unwrap_or(2.min(cfg.p)), cfg.ell.unwrap_or(2.min(cfg.p)));
    let mut extra = vec![("levels", format!("{j},{l}"))];
    let c0 = match (cfg.p, cfg.c0) {
        (_, Some(c0)) => c0,
        (3, None) => cauchy_chain::finite_chain::C0_P3,
        (_, None) => {
            let n = *cfg.n.iter().max().unwrap();
            let fit = best_fit_c0(&pot, n, j, l, &cfg.points, (0.05, 20.0), &fp, &c)?;
            extra.push(("best_fit_c0", num(fit)));
            extra.push(("best_fit_c0_n", n.to_string()));
            fit
        }
    };
    extra.push(("c0", num(c0)));
    let tables = universality_compare_points(&pot, &cfg.n, j, l, &cfg.points, Some(c0), &fp, &c)?;
    header(out, cfg, "universality", &extra)?;
    let mut w = csv_writer(out);
    w.write_record(["n", "xi", "eta", "finite", "limit", "deviation", "monotone"])?;
    for t in &tables {
        let flag = if t.rows.len() < 2 {
            String::new()
        } else {
            t.rows.windows(2).all(|r| r[1].deviation < r[0].deviation).to_string()
        };
        for r in &t.rows {
            w.write_record([r.n.to_string(), num(t.xi), num(t.eta), num(r.finite), num(r.limit), num(r.deviation), flag.clone()])?;
        }
    }
    w.flush()?;
    Ok(exit::OK)
}

/// ρ₁ and ρ₂ of the β-curve on the grid.
pub fn spectral(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    cfg.validate()?;
    let curve = SeparatedCurve::new(cfg.beta, &ctx(cfg))?;
    let xs = cfg.grid.points();
    let rows = xs
        .par_iter()
        .map(|&x| Ok((curve.density(1, x)?, curve.density(2, x)?)))
        .collect::<std::result::Result<Vec<_>, cauchy_chain::NumError>>()?;
    header(out, cfg, "spectral", &[("beta", num(cfg.beta)), ("q", num(curve.q.to_f64()))])?;
    let mut w = csv_writer(out);
    w.write_record(["x", "rho_1", "rho_2"])?;
    for (&x, (r1, r2)) in xs.iter().zip(rows) {
        w.write_record([num(x), num(r1), num(r2)])?;
    }
    w.flush()?;
    Ok(exit::OK)
}

/// Separation blocks for both scalings over the Λ list and the points.
pub fn separation(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    cfg.validate()?;
    if cfg.q == 0 || cfg.q > cfg.p {
        return Err(crate::ConfigError::Invalid(format!("q = {} outside 1..={}", cfg.q, cfg.p)).into());
    }
    let fp = FieldParams::new(cfg.a.clone(), &ctx(cfg))?;
    let jobs: Vec<(f64, SeparationScaling, f64, f64)> = cfg
        .lambda
        .iter()
        .flat_map(|&lam| {
            [SeparationScaling::Head, SeparationScaling::Tail]
                .into_iter()
                .flat_map(move |s| cfg.points.iter().map(move |&(x, y)| (lam, s, x, y)))
        })
        .collect();
    let blocks = jobs
        .par_iter()
        .map(|&(lam, s, x, y)| Ok((separation_block(cfg.q, lam, s, x, y, &fp)?, separation_reference(cfg.q, lam, s, x, y, &fp)?)))
        .collect::<std::result::Result<Vec<_>, cauchy_chain::NumError>>()?;
    header(out, cfg, "separation", &[("q", cfg.q.to_string())])?;
    let mut w = csv_writer(out);
    w.write_record(["lambda", "scaling", "xi", "eta", "j", "ell", "value", "target", "deviation"])?;
    for (&(lam, s, x, y), (b, r)) in jobs.iter().zip(blocks) {
        let name = match s {
            SeparationScaling::Head => "head",
            SeparationScaling::Tail => "tail",
        };
        for (j, (row, rrow)) in b.iter().zip(&r).enumerate() {
            for (l, (v, t)) in row.iter().zip(rrow).enumerate() {
                let (target, dev) = match t {
                    Some(t) => (num(t.re.to_f64()), num(v.dist(t) / t.abs().to_f64().max(1e-300))),
                    None => (String::new(), String::new()),
                };
                w.write_record([num(lam), name.into(), num(x), num(y), (j + 1).to_string(), (l + 1).to_string(), num(v.re.to_f64()), target, dev])?;
            }
        }
    }
    w.flush()?;
    Ok(exit::OK)
}

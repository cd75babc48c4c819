//! The acceptance criteria as runnable checks, one outcome line per criterion.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use cauchy_chain::field_kernels::{
    bgs3_kernel, gauged_kernel, kz_kernel, limit_kernel, limit_kernel_route, separation_block, separation_reference,
    Bgs3Label, FieldParams, KernelRoute, SeparationScaling,
};
use cauchy_chain::finite_chain::{
    biorthogonal_system, finite_kernels, universality_compare_points, BiorthogonalSystem, Potential,
};
use cauchy_chain::gammakit::pi;
use cauchy_chain::linalg::{solve, CMat, RMat};
use cauchy_chain::parametrix::{
    bilinear_concomitant, build_context, inverse_product, verify_jump, verify_monodromy, ChainExponents,
    ParametrixContext, Side, SidedPoint,
};
use cauchy_chain::quad::{exp_sinh, gauss_kronrod};
use cauchy_chain::spectral::{
    branch_points_p3, density, density_mass, q_of_beta, sheet, EquilibriumData, SeparatedCurve, SpectralCurve,
    UniformizationP3,
};
use cauchy_chain::{Cx, NumError, PrecisionContext};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

type Res<T> = std::result::Result<T, NumError>;

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub module: &'static str,
    pub name: &'static str,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, module: "parametrix", name: "concomitant_identity" },
    Criterion { id: 2, module: "parametrix", name: "monodromy_and_jumps" },
    Criterion { id: 3, module: "parametrix", name: "inverse_identity" },
    Criterion { id: 4, module: "field_kernels", name: "route_equivalence" },
    Criterion { id: 5, module: "field_kernels", name: "bessel_reduction" },
    Criterion { id: 6, module: "field_kernels", name: "bgs3_equivalences" },
    Criterion { id: 7, module: "field_kernels", name: "kz_identity" },
    Criterion { id: 8, module: "finite_chain", name: "finite_chain_structure" },
    Criterion { id: 9, module: "spectral", name: "quartic_curve" },
    Criterion { id: 10, module: "spectral", name: "beta_curve" },
    Criterion { id: 11, module: "field_kernels", name: "chain_separation" },
    Criterion { id: 12, module: "finite_chain", name: "universality_trend" },
];

impl Criterion {
    /// Whether an `only` filter entry (an id or a module name) selects this criterion.
    pub fn selected_by(&self, only: &[String]) -> bool {
        only.is_empty() || only.iter().any(|s| s == self.module || s.parse::<u8>().ok() == Some(self.id))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub only: Vec<String>,
    /// Relative corruption applied to c₂ before the concomitant check.
    pub perturb_c2: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    /// The worst measured quantity the criterion bounds.
    pub residual: f64,
    pub limit: f64,
    pub seconds: f64,
    pub note: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion={} status={} name={} residual={:.3e} limit={:.3e} seconds={:.1}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.limit,
            self.seconds
        )?;
        if !self.note.is_empty() {
            write!(f, " note=\"{}\"", self.note)?;
        }
        Ok(())
    }
}

struct Measured {
    residual: f64,
    limit: f64,
    /// Extra conditions besides residual < limit.
    extra_ok: bool,
    note: String,
}

impl Measured {
    fn bound(residual: f64, limit: f64) -> Measured {
        Measured { residual, limit, extra_ok: true, note: String::new() }
    }
}

/// Runs the selected criteria in id order.
pub fn run(opts: &SuiteOptions) -> Vec<Outcome> {
    CRITERIA.iter().filter(|c| c.selected_by(&opts.only)).map(|c| run_one(c, opts)).collect()
}

pub fn run_one(c: &Criterion, opts: &SuiteOptions) -> Outcome {
    let t = Instant::now();
    let m = match c.id {
        1 => concomitant(opts.perturb_c2),
        2 => monodromy_and_jumps(),
        3 => inverse_identity(),
        4 => route_equivalence(),
        5 => bessel_reduction(),
        6 => bgs3(),
        7 => kz(),
        8 => finite_structure(),
        9 => quartic_curve(),
        10 => beta_curve(),
        11 => separation(),
        12 => universality(),
        _ => unreachable!(),
    };
    let seconds = t.elapsed().as_secs_f64();
    match m {
        Ok(m) => Outcome {
            id: c.id,
            name: c.name,
            pass: m.extra_ok && m.residual < m.limit,
            residual: m.residual,
            limit: m.limit,
            seconds,
            note: m.note,
        },
        Err(e) => Outcome {
            id: c.id,
            name: c.name,
            pass: false,
            residual: f64::INFINITY,
            limit: f64::NAN,
            seconds,
            note: format!("numerical error: {e}"),
        },
    }
}

fn ctx256() -> PrecisionContext {
    PrecisionContext::default()
}

fn fp(a: &[f64]) -> Res<FieldParams> {
    FieldParams::new(a.to_vec(), &PrecisionContext::with_bits(128))
}

fn pc(a: &[f64]) -> Res<ParametrixContext> {
    build_context(ChainExponents::new(a.to_vec())?, &ctx256())
}

fn rel_dist(a: &Cx, b: &Cx) -> f64 {
    a.dist(b) / b.abs().to_f64().max(1.0)
}

fn grid_2d(vals: &[f64]) -> Vec<(f64, f64)> {
    vals.iter().flat_map(|&x| vals.iter().map(move |&y| (x, y))).collect()
}

fn max_of(it: impl IntoIterator<Item = Res<f64>>) -> Res<f64> {
    let mut worst = 0.0f64;
    for v in it {
        worst = worst.max(v?);
    }
    Ok(worst)
}

// ---- parametrix ----

fn concomitant(perturb_c2: f64) -> Res<Measured> {
    let prec = ctx256().bits();
    let third = Float::with_val(prec, pi(prec) / 3u32);
    let five = Cx::polar(&Float::with_val(prec, 5), &third);
    let points = [
        (Cx::new(prec, 0.5, 0.0), Side::Plus),
        (Cx::new(prec, 0.5, 0.0), Side::Minus),
        (Cx::new(prec, 2.0, 1.0), Side::Plus),
        (Cx::new(prec, 2.0, -1.0), Side::Minus),
        (five.clone(), Side::Plus),
        (five.conj(), Side::Minus),
    ];
    let mut worst = 0.0f64;
    for a in [&[0.3][..], &[0.3, -0.1], &[0.3, -0.1, 0.45]] {
        let mut c = pc(a)?;
        if perturb_c2 != 0.0 {
            c.c[2] = c.c[2].scale_f64(1.0 + perturb_c2);
        }
        let n = a.len() + 1;
        let cells: Vec<(usize, usize, usize)> =
            (0..points.len()).flat_map(|i| (1..=n).flat_map(move |j| (1..=n).map(move |k| (i, j, k)))).collect();
        let r = cells
            .par_iter()
            .map(|&(i, j, k)| {
                let (z, side) = &points[i];
                let b = bilinear_concomitant(j, k, *side, *side, z, &c)?;
                let e = if j == k { 1.0 } else { 0.0 };
                Ok(b.dist(&Cx::new(prec, e, 0.0)))
            })
            .collect::<Vec<_>>();
        worst = worst.max(max_of(r)?);
    }
    Ok(Measured::bound(worst, 1e-10))
}

fn monodromy_and_jumps() -> Res<Measured> {
    let prec = ctx256().bits();
    let zetas = [(0.8, 1.0), (0.3, 0.5), (1.5, -2.0), (2.5, 2.8), (0.6, -0.1)];
    let positive = [0.3, 0.6, 1.2, 2.0, 3.5];
    let mut worst = 0.0f64;
    for a in [&[0.3, -0.1][..], &[0.3, -0.1, 0.45]] {
        let c = pc(a)?;
        let p = a.len();
        let mut jobs: Vec<Box<dyn Fn() -> Res<f64> + Sync + Send + '_>> = vec![];
        for &(r, th) in &zetas {
            for j in 2..=p + 1 {
                let c = &c;
                jobs.push(Box::new(move || {
                    let z = Cx::polar(&Float::with_val(prec, r), &Float::with_val(prec, th));
                    verify_monodromy(j, &z, c)
                }));
            }
        }
        for &x in &positive {
            for k in 1..=(p + 1) / 2 {
                let c = &c;
                jobs.push(Box::new(move || verify_jump(k, x, c)));
            }
        }
        worst = worst.max(max_of(jobs.par_iter().map(|f| f()).collect::<Vec<_>>())?);
    }
    Ok(Measured::bound(worst, 1e-10))
}

fn inverse_identity() -> Res<Measured> {
    let c = pc(&[0.3, -0.1, 0.45])?;
    let prec = 288;
    let pts = [(0.8, 0.5), (2.1, 0.7), (0.4, 1.9), (0.8, -0.5), (2.1, -0.7), (0.4, -1.9)];
    let r = pts
        .par_iter()
        .map(|&(re, im)| {
            let side = if im > 0.0 { Side::Plus } else { Side::Minus };
            let w = SidedPoint::new(&Cx::new(prec, re, im), Some(side), prec)?;
            let m = inverse_product(&w, &w, &c)?;
            Ok(m.sub(&CMat::identity(4, m.prec())).max_abs())
        })
        .collect::<Vec<_>>();
    Ok(Measured::bound(max_of(r)?, 1e-10))
}

// ---- field kernels ----

fn route_equivalence() -> Res<Measured> {
    // the double residue route is singular on ξ = η, so the η nodes interleave the ξ nodes
    let xs = [0.4, 0.9, 1.5, 2.2, 2.9];
    let ys = [0.55, 1.05, 1.7, 2.45, 3.1];
    let pts: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let pts = &pts;
    let mut worst = 0.0f64;
    for a in [&[0.3, -0.15][..], &[0.2, 0.55, -0.3]] {
        let f = fp(a)?;
        let p = a.len();
        let cells: Vec<(usize, usize, f64, f64)> =
            (1..=p).flat_map(|j| (1..=p).flat_map(move |l| pts.iter().map(move |&(x, y)| (j, l, x, y)))).collect();
        let r = cells
            .par_iter()
            .map(|&(j, l, x, y)| {
                let g1 = limit_kernel(j, l, x, y, &f)?;
                let g2 = limit_kernel_route(j, l, x, y, KernelRoute::ResidueCorrected, &f)?;
                let g3 = limit_kernel_route(j, l, x, y, KernelRoute::DoubleResidue, &f)?;
                Ok(rel_dist(&g1, &g3).max(rel_dist(&g2, &g3)))
            })
            .collect::<Vec<_>>();
        worst = worst.max(max_of(r)?);
    }
    Ok(Measured::bound(worst, 1e-10))
}

const BESSEL_PREC: u32 = 160;

/// J_a(z) and J_a'(z) from the power series.
pub fn bessel_j(a: f64, z: f64) -> (Float, Float) {
    let p = BESSEL_PREC;
    let z = Float::with_val(p, z);
    let half = Float::with_val(p, &z / 2u32);
    let mut j = Float::new(p);
    let mut dj = Float::new(p);
    for k in 0..80u32 {
        let e = Float::with_val(p, 2 * k) + a;
        let den = Float::with_val(p, Float::factorial(k)) * Float::with_val(p, Float::with_val(p, a) + (k + 1)).gamma();
        let pw = Float::with_val(p, (&half).pow(&e)) / den;
        let t = if k % 2 == 0 { pw } else { -pw };
        dj += Float::with_val(p, &t * &e) / &z;
        j += t;
    }
    (j, dj)
}

/// 4K_Bess,a(4ξ, 4η) in closed form from J_a and J_a'.
pub fn bessel_kernel_4(a: f64, xi: f64, eta: f64) -> f64 {
    let p = BESSEL_PREC;
    let (x, y) = (2.0 * xi.sqrt(), 2.0 * eta.sqrt());
    let (jx, djx) = bessel_j(a, x);
    let (jy, djy) = bessel_j(a, y);
    if (xi - eta).abs() < 1e-14 {
        let v = Float::with_val(p, djx.square_ref()) + Float::with_val(p, jx.square_ref()) * (1.0 - a * a / (x * x));
        return v.to_f64();
    }
    let num = Float::with_val(p, &jx * &djy) * y - Float::with_val(p, &djx * &jy) * x;
    (num * 2u32 / (x * x - y * y)).to_f64()
}

fn bessel_reduction() -> Res<Measured> {
    let pts = grid_2d(&[0.05, 0.6, 1.3, 2.7]);
    let mut worst = 0.0f64;
    for a in [0.0, 0.5, 1.5] {
        let f = fp(&[a])?;
        let r = pts
            .par_iter()
            .map(|&(x, y)| {
                let g = gauged_kernel(1, 1, x, y, KernelRoute::ContourProduct, &f)?;
                Ok((g.re.to_f64() - bessel_kernel_4(a, x, y)).abs() + g.im.to_f64().abs())
            })
            .collect::<Vec<_>>();
        worst = worst.max(max_of(r)?);
    }
    let mut m = Measured::bound(worst, 1e-10);
    m.note = "gauged kernel; the raw kernel carries (xi/eta)^(a/2)".into();
    Ok(m)
}

fn bgs3() -> Res<Measured> {
    let (a, b) = (0.3, 0.7);
    let ctx = PrecisionContext::with_bits(128);
    let f = fp(&[a, b])?;
    let pts = [(0.9, 1.6), (0.3, 0.8), (1.7, 0.5), (2.4, 2.9), (1.1, 1.1)];
    let cases = [
        (Bgs3Label::K00, (2, 1)),
        (Bgs3Label::K01, (1, 1)),
        (Bgs3Label::K10, (2, 2)),
        (Bgs3Label::K11, (1, 2)),
    ];
    let jobs: Vec<_> = cases.iter().flat_map(|c| pts.iter().map(move |p| (*c, *p))).collect();
    let r = jobs
        .par_iter()
        .map(|&((lab, (j, l)), (xi, eta))| {
            let g = bgs3_kernel(lab, xi, eta, a, b, &ctx)?;
            let h = limit_kernel(j, l, eta, xi, &f)?.scale_f64((xi / eta).powf(a));
            Ok(rel_dist(&g, &h))
        })
        .collect::<Vec<_>>();
    Ok(Measured::bound(max_of(r)?, 1e-10))
}

fn kz() -> Res<Measured> {
    let ctx = PrecisionContext::with_bits(128);
    let f = fp(&[1.0, 1.0])?;
    let pts = [(1.0, 1.0), (0.6, 1.4), (1.8, 0.4), (0.2, 0.9), (2.5, 2.0)];
    let r = pts
        .par_iter()
        .map(|&(x, y)| {
            let k = kz_kernel(2, &[0, 1, 2], x, y, &ctx)?;
            let g = limit_kernel(1, 1, y, x, &f)?;
            Ok(rel_dist(&k, &g))
        })
        .collect::<Vec<_>>();
    Ok(Measured::bound(max_of(r)?, 1e-10))
}

/// Worst relative error inside the declared block, and the largest |G_{jℓ}G_{ℓj}| coupling the
/// block to the rest. The products are gauge invariant, unlike the single off-block entries.
fn block_error(block: &[Vec<Cx>], reference: &[Vec<Option<Cx>>]) -> (f64, f64) {
    let (mut inside, mut coupling) = (0.0f64, 0.0f64);
    for (j, (row, rrow)) in block.iter().zip(reference).enumerate() {
        for (l, (v, r)) in row.iter().zip(rrow).enumerate() {
            match r {
                Some(r) => inside = inside.max(v.dist(r) / r.abs().to_f64().max(1e-300)),
                None if reference[l][j].is_none() && reference[j][j].is_some() != reference[l][l].is_some() => {
                    coupling = coupling.max((v * &block[l][j]).abs().to_f64())
                }
                None => {}
            }
        }
    }
    (inside, coupling)
}

fn separation() -> Res<Measured> {
    let f = fp(&[0.3, 0.45, 0.45])?;
    let cases = [(3, SeparationScaling::Head, 1.0, 1.5), (2, SeparationScaling::Tail, 1.0, 1.2)];
    let mut worst_rate = 0.0f64;
    let mut ok = true;
    let mut notes = vec![];
    for (q, sc, xi, eta) in cases {
        let errs = [10.0, 100.0]
            .par_iter()
            .map(|&lam| {
                let b = separation_block(q, lam, sc, xi, eta, &f)?;
                let r = separation_reference(q, lam, sc, xi, eta, &f)?;
                Ok(block_error(&b, &r))
            })
            .collect::<Res<Vec<_>>>()?;
        let ((e10, o10), (e100, o100)) = (errs[0], errs[1]);
        let rate = e100 / e10;
        let in_band = (1.0 / 20.0..=1.0 / 5.0).contains(&rate);
        // the coupling between the two sub-chains decays at least like 1/Λ
        let off_ok = o100 <= o10 / 10.0 || o100 < 1e-30;
        ok &= in_band && off_ok && e100 < 0.05;
        worst_rate = worst_rate.max((rate.ln() - 0.1f64.ln()).abs());
        notes.push(format!("q={q} {sc:?}: err(10)={e10:.2e} err(100)={e100:.2e} ratio={rate:.3} coupling {o10:.2e}->{o100:.2e}"));
    }
    Ok(Measured {
        // distance of the worst ratio from 1/10 in log scale; the band [1/20, 1/5] is ±ln 2
        residual: worst_rate,
        limit: 2f64.ln() + 1e-12,
        extra_ok: ok,
        note: notes.join("; "),
    })
}

// ---- finite chain ----

fn gamma(x: &Float) -> Float {
    x.clone().gamma()
}

/// p = 2 bimoments in closed form: Γ(A)Γ(B)/((A + B − 1) N^{A+B−1}) at N = 1.
fn two_chain_moment(a: [f64; 2], j: usize, l: usize, prec: u32) -> Float {
    let x = Float::with_val(prec, a[0]) + (j as u32 + 1);
    let y = Float::with_val(prec, a[1]) + (l as u32 + 1);
    let s = Float::with_val(prec, &x + &y) - 1u32;
    gamma(&x) * gamma(&y) / s
}

/// p = 3 bimoments with each Cauchy factor written as a Laplace integral, at N = 1.
fn three_chain_moments(a: [f64; 3], nmax: usize) -> Vec<Vec<Float>> {
    let prec = 192;
    let rule = exp_sinh(1.0 / 64.0, 4.6, 4.2, &PrecisionContext::with_bits(prec));
    let shifted: Vec<Float> = rule.nodes.iter().map(|s| Float::with_val(prec, s + 1u32)).collect();
    let e = |k: usize, v: f64| Float::with_val(prec, v) + (k as u32 + 1);
    let pw = |x: &Float, y: &Float| Float::with_val(prec, x.ln_ref()) * y;
    let mid = e(0, a[1]);
    let m = rule.len();
    let core: Vec<Vec<Float>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|k| {
                    let z = Float::with_val(prec, &shifted[i] + &rule.nodes[k]);
                    (-pw(&z, &mid)).exp() * &rule.weights[i] * &rule.weights[k]
                })
                .collect()
        })
        .collect();
    let powers = |v: f64| -> Vec<Vec<Float>> {
        (0..=nmax).map(|j| shifted.iter().map(|x| (-pw(x, &e(j, v))).exp()).collect()).collect()
    };
    let left = powers(a[0]);
    let right = powers(a[2]);
    let core_right: Vec<Vec<Float>> = right
        .par_iter()
        .map(|r| {
            (0..m)
                .map(|i| {
                    let mut acc = Float::new(prec);
                    for k in 0..m {
                        acc += Float::with_val(prec, &core[i][k] * &r[k]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    (0..=nmax)
        .map(|j| {
            (0..=nmax)
                .map(|l| {
                    let mut acc = Float::new(prec);
                    for i in 0..m {
                        acc += Float::with_val(prec, &left[j][i] * &core_right[l][i]);
                    }
                    acc * gamma(&e(j, a[0])) * gamma(&mid) * gamma(&e(l, a[2]))
                })
                .collect()
        })
        .collect()
}

/// max |⟨ψ_n, φ_m⟩ − h_nδ_nm| / h_n against an external moment table.
fn biorthogonality(sys: &BiorthogonalSystem, moment: impl Fn(usize, usize) -> Float) -> f64 {
    let prec = sys.prec();
    let mut worst = 0.0f64;
    for n in 0..=sys.nmax {
        for m in 0..=sys.nmax {
            let mut v = Float::new(prec);
            for (j, cj) in sys.psi_coeffs[n].iter().enumerate() {
                for (l, dl) in sys.phi_coeffs[m].iter().enumerate() {
                    v += Float::with_val(prec, cj * dl) * moment(j, l);
                }
            }
            if n == m {
                v -= &sys.norms[n];
            }
            worst = worst.max((v / &sys.norms[n]).abs().to_f64());
        }
    }
    worst
}

fn finite_structure() -> Res<Measured> {
    let ctx = ctx256();
    let systems: Vec<Arc<BiorthogonalSystem>> = [&[0.5, 0.5][..], &[0.5, 0.0, 0.5]]
        .par_iter()
        .map(|a| Ok(Arc::new(biorthogonal_system(&Potential::laguerre(a.to_vec(), 1.0)?, 8, &ctx)?)))
        .collect::<Res<_>>()?;
    let mut notes = vec![];
    let mut ok = true;
    // Δ_n > 0 and h_n = Δ_{n+1}/Δ_n
    let mut tele = 0.0f64;
    for s in &systems {
        ok &= s.deltas.iter().all(|d| *d > 0);
        for n in 0..=s.nmax {
            let ratio = Float::with_val(s.prec(), &s.deltas[n + 1] / &s.deltas[n]);
            tele = tele.max(((ratio - &s.norms[n]) / &s.norms[n]).abs().to_f64());
        }
    }
    ok &= tele < 1e-30;
    notes.push(format!("telescoping {tele:.1e}"));
    let prec = systems[0].prec();
    let b2 = biorthogonality(&systems[0], |j, l| two_chain_moment([0.5, 0.5], j, l, prec));
    let table = three_chain_moments([0.5, 0.0, 0.5], 8);
    let b3 = biorthogonality(&systems[1], |j, l| Float::with_val(prec, &table[j][l]));
    let bio = b2.max(b3);
    ok &= bio < 1e-6;
    notes.push(format!("biorthogonality {bio:.1e}"));
    // ∫K_jj(x, x) dx = n on every level
    let jobs: Vec<(usize, usize, usize)> =
        (0..2).flat_map(|s| (1..=3).flat_map(move |n| (1..=s + 2).map(move |j| (s, n, j)))).collect();
    let trace = jobs
        .par_iter()
        .map(|&(s, n, j)| {
            let ks = finite_kernels(Arc::clone(&systems[s]), n)?;
            let f = |u: f64| {
                let x = u.exp();
                ks.k_kernel(j, j, x, x).map(|v| v.to_f64() * x).unwrap_or(f64::NAN)
            };
            let v = gauss_kronrod(&f, -55.0, 5.3, 1e-9, 40)?;
            Ok((v - n as f64).abs())
        })
        .collect::<Vec<_>>();
    let trace = max_of(trace)?;
    notes.push(format!("trace {trace:.1e}"));
    Ok(Measured { residual: trace, limit: 1e-4, extra_ok: ok, note: notes.join("; ") })
}

/// Hard-edge comparison for p = 3; strict decrease at every point and the n = 24 deviation
/// below 0.15.
pub fn universality_tables() -> Res<Vec<cauchy_chain::finite_chain::UniversalityTable>> {
    let a = vec![0.5, 0.0, 0.5];
    let ctx = PrecisionContext::with_bits(512);
    let f = FieldParams::new(a.clone(), &ctx)?;
    let pot = Potential::laguerre(a, 1.0)?;
    universality_compare_points(&pot, &[6, 12, 24], 2, 2, &[(1.0, 1.0), (1.0, 2.0), (2.0, 3.0)], Some(27.0 / 16.0), &f, &ctx)
}

fn universality() -> Res<Measured> {
    let tables = universality_tables()?;
    let mut ok = true;
    let mut last = 0.0f64;
    let mut notes = vec![];
    for t in &tables {
        let d: Vec<f64> = t.rows.iter().map(|r| r.deviation).collect();
        let mono = d.windows(2).all(|w| w[1] < w[0]);
        ok &= mono;
        last = last.max(*d.last().unwrap());
        notes.push(format!(
            "({},{}): {}{}",
            t.xi,
            t.eta,
            d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" "),
            if mono { "" } else { " not decreasing" }
        ));
    }
    Ok(Measured { residual: last, limit: 0.15, extra_ok: ok, note: notes.join("; ") })
}

// ---- spectral ----

fn quartic_curve() -> Res<Measured> {
    let ctx = ctx256();
    let prec = ctx.bits();
    let mut notes = vec![];
    let mut ok = true;
    let curve = SpectralCurve::new(3, &ctx)?;
    let (a, b) = branch_points_p3(prec);
    let disc = curve.discriminant(&a)?.to_f64().abs().max(curve.discriminant(&b)?.to_f64().abs());
    ok &= disc < 1e-15;
    notes.push(format!("discriminant {disc:.1e}"));
    let zs = [1e8, 2e8, 4e8];
    let vals = zs.iter().map(|&z| Ok(sheet(1, &Cx::new(prec, z, 0.0), None)?.re)).collect::<Res<Vec<_>>>()?;
    let m = RMat::from_fn(3, 3, |i, j| Float::with_val(prec, zs[i]).pow(-(j as i32)));
    let c = solve(&m, &vals)?;
    let want = [0.5, -1.0, -11.0 / 27.0];
    let fit = (0..3).map(|k| (c[k].to_f64() - want[k]).abs()).fold(0.0, f64::max);
    ok &= fit < 1e-6;
    notes.push(format!("expansion {fit:.1e}"));
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut uni = 0.0f64;
    for _ in 0..10 {
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let t = Cx::new(prec, 6.0 * next() - 3.0, 6.0 * next() - 3.0);
        uni = uni.max(UniformizationP3::residual(&t)?);
    }
    ok &= uni < 1e-15;
    notes.push(format!("uniformization {uni:.1e}"));
    let eq = EquilibriumData::new(&PrecisionContext::with_bits(128))?;
    let mut omega_max = f64::NEG_INFINITY;
    for x in [3.0, 5.0, 10.0] {
        omega_max = omega_max.max(eq.omega(1, x)?.re.to_f64());
    }
    for x in [-2.0, -5.0] {
        omega_max = omega_max.max(eq.omega(2, x)?.re.to_f64());
    }
    ok &= omega_max < 0.0;
    notes.push(format!("max Re omega {omega_max:.3}"));
    let c128 = PrecisionContext::with_bits(128);
    let mass = (density_mass(1, &c128)? - 1.0).abs();
    ok &= mass < 1e-6;
    notes.push(format!("mass {mass:.1e}"));
    let (x0, x1) = (1e-6, 1e-3);
    let slope = (density(1, x1, &c128)? / density(1, x0, &c128)?).ln() / (x1 / x0).ln();
    ok &= (slope + 0.75).abs() < 0.02;
    notes.push(format!("exponent {slope:.4}"));
    Ok(Measured { residual: disc.max(uni), limit: 1e-15, extra_ok: ok, note: notes.join("; ") })
}

fn beta_curve() -> Res<Measured> {
    let ctx = ctx256();
    let mut ok = true;
    let mut notes = vec![];
    let q0 = q_of_beta(0.0, &ctx)?;
    let e0 = (q0 - Float::with_val(ctx.bits(), 64) / 27u32).abs().to_f64();
    ok &= e0 < 1e-30;
    notes.push(format!("q(0) error {e0:.1e}"));
    let betas: Vec<f64> = (0..=60).map(|k| if k == 0 { 0.0 } else { 1e-3 * 1e6f64.powf(k as f64 / 60.0) }).collect();
    let qs = betas.par_iter().map(|&b| Ok(q_of_beta(b, &ctx)?.to_f64())).collect::<Res<Vec<_>>>()?;
    let mono = qs.windows(2).all(|w| w[1] >= w[0]);
    let q1000 = *qs.last().unwrap();
    ok &= mono && q1000 > 3.9 && q1000 < 4.0;
    notes.push(format!("monotone {mono}, q(1000) = {q1000:.6}"));
    let mut dbl = 0.0f64;
    for beta in [0.5, 1.0, 5.0] {
        let s = SeparatedCurve::new(beta, &ctx)?;
        let st = s.q0_structure()?;
        dbl = dbl.max(st.double_split).max(s.q0_discriminant().to_f64().abs());
        ok &= st.max_imag < 1e-10 && st.double_root > s.q.to_f64();
    }
    notes.push(format!("double root {dbl:.1e}"));
    Ok(Measured { residual: dbl, limit: 1e-10, extra_ok: ok, note: notes.join("; ") })
}

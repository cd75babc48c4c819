use std::sync::Arc;

use cauchy_chain::field_kernels::FieldParams;
use cauchy_chain::finite_chain::{
    bimoments, biorthogonal_system, correlation_density, correlation_density_reduced, eta_weight, finite_kernels,
    universality_compare, universality_compare_points, BiorthogonalSystem, FiniteKernelSet, Potential,
};
use cauchy_chain::quad::exp_sinh;
use cauchy_chain::{NumError, PrecisionContext};
use once_cell::sync::Lazy;
use std::collections::BinaryHeap;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

const PREC: u32 = 256;

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let (mut k, mut g) = (WK[7] * fc, WG[3] * fc);
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel(f64, f64, f64, f64);

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.3 == o.3
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.3.total_cmp(&o.3)
    }
}

/// Globally adaptive Gauss–Kronrod on [a, b]: split the worst panel until the summed error
/// estimate is below tol.
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::from([Panel(a, b, v, e)]);
    let (mut total, mut err) = (v, e);
    for _ in 0..20000 {
        if err <= tol {
            break;
        }
        let Panel(a, b, v, e) = heap.pop().unwrap();
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        heap.push(Panel(a, m, v1, e1));
        heap.push(Panel(m, b, v2, e2));
    }
    assert!(err <= tol * 100.0, "oracle quadrature stalled at {err:e}");
    total
}

/// ∫₀^∞ f over x = e^s, s ∈ [s_lo, s_hi].
fn half_line(f: &dyn Fn(f64) -> f64, s_lo: f64, s_hi: f64, tol: f64) -> f64 {
    adaptive(&|s: f64| {
        let x = s.exp();
        f(x) * x
    }, s_lo, s_hi, tol)
}

/// Half-line rule for integrands with exponential decay on the scale of one.
fn half_line_exp(f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    half_line(f, -80.0, 5.3, tol)
}

/// Half-line rule for kernel integrands, kept inside the range the chain grid resolves.
fn half_line_kernel(f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    half_line(f, -55.0, 5.3, tol)
}

/// Half-line rule for integrands with algebraic decay.
fn half_line_alg(f: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    half_line(f, -80.0, 75.0, tol)
}

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn gamma(x: f64) -> Float {
    Float::with_val(PREC, x).gamma()
}

/// p = 2 bimoments in closed form: Γ(A)Γ(B)/((A + B − 1) N^{A+B−1}).
fn two_chain_moment(a1: f64, a2: f64, n_scale: f64, j: usize, l: usize) -> Float {
    let a = Float::with_val(PREC, a1) + (j as u32 + 1);
    let b = Float::with_val(PREC, a2) + (l as u32 + 1);
    let s = Float::with_val(PREC, &a + &b) - 1u32;
    let pw = Float::with_val(PREC, n_scale).pow(&s);
    a.gamma() * b.gamma() / s / pw
}

/// p = 3 bimoments with each Cauchy factor written as a Laplace integral, in f64.
fn three_chain_moment(a: [f64; 3], n_scale: f64, j: usize, l: usize) -> f64 {
    let (e1, e2, e3) = (j as f64 + a[0] + 1.0, a[1] + 1.0, l as f64 + a[2] + 1.0);
    let c = gamma(e1).to_f64() * gamma(e2).to_f64() * gamma(e3).to_f64();
    let outer = |s: f64| {
        let inner = |t: f64| (n_scale + s + t).powf(-e2) * (n_scale + t).powf(-e3);
        (n_scale + s).powf(-e1) * half_line_alg(&inner, 1e-15)
    };
    c * half_line_alg(&outer, 1e-13)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn laguerre(a: &[f64], n_scale: f64) -> Potential {
    Potential::laguerre(a.to_vec(), n_scale).unwrap()
}

static SYS2: Lazy<Arc<BiorthogonalSystem>> =
    Lazy::new(|| Arc::new(biorthogonal_system(&laguerre(&[0.5, 0.5], 1.0), 8, &ctx()).unwrap()));
static SYS3: Lazy<Arc<BiorthogonalSystem>> =
    Lazy::new(|| Arc::new(biorthogonal_system(&laguerre(&[0.5, 0.0, 0.5], 1.0), 8, &ctx()).unwrap()));

fn kernels(sys: &Lazy<Arc<BiorthogonalSystem>>, n: usize) -> FiniteKernelSet {
    finite_kernels(Arc::clone(sys), n).unwrap()
}

// chain weight

#[test]
fn two_chain_weight_at_one_one() {
    let v = eta_weight(1.0, 1.0, &laguerre(&[0.0, 0.0], 1.0), &ctx()).unwrap();
    assert!(rel(v.to_f64(), (-2.0f64).exp() / 2.0) < 1e-15);
}

#[test]
fn three_chain_weight_matches_exponential_integral() {
    // ∫₀^∞ e^{−t}/(1 + t)² dt = 1 − e·E₁(1)
    let e_e1 = 0.596_347_362_323_194_074_3;
    let expect = (-2.0f64).exp() * (1.0 - e_e1);
    let v = eta_weight(1.0, 1.0, &laguerre(&[0.0, 0.0, 0.0], 1.0), &ctx()).unwrap();
    assert!(rel(v.to_f64(), expect) < 1e-12, "{} vs {expect}", v.to_f64());
}

#[test]
fn three_chain_weight_matches_adaptive_oracle() {
    let a = [0.3, -0.4, 0.7];
    let n_scale = 1.5;
    let (x, y) = (0.4, 2.3);
    let inner = |t: f64| t.powf(a[1]) * (-n_scale * t).exp() / ((x + t) * (t + y));
    let expect = x.powf(a[0]) * y.powf(a[2]) * (-n_scale * (x + y)).exp() * half_line_exp(&inner, 1e-17);
    let v = eta_weight(x, y, &laguerre(&a, n_scale), &ctx()).unwrap();
    assert!(rel(v.to_f64(), expect) < 1e-12, "{} vs {expect}", v.to_f64());
}

#[test]
fn four_chain_weight_matches_nested_oracle() {
    let (x, y) = (0.7, 1.1);
    let outer = |s: f64| {
        let inner = |t: f64| (-t).exp() / ((s + t) * (t + y));
        (-s).exp() / (x + s) * half_line_exp(&inner, 1e-17)
    };
    let expect = (-(x + y)).exp() * half_line_exp(&outer, 1e-15);
    let v = eta_weight(x, y, &laguerre(&[0.0; 4], 1.0), &ctx()).unwrap();
    assert!(rel(v.to_f64(), expect) < 1e-10, "{} vs {expect}", v.to_f64());
}

#[test]
fn chain_weight_rejects_nonpositive_points() {
    let pot = laguerre(&[0.0, 0.0, 0.0], 1.0);
    assert!(matches!(eta_weight(0.0, 1.0, &pot, &ctx()), Err(NumError::Domain(_))));
    assert!(matches!(eta_weight(1.0, -2.0, &pot, &ctx()), Err(NumError::Domain(_))));
}

#[test]
fn potential_rejects_bad_parameters() {
    assert!(Potential::laguerre(vec![0.0], 1.0).is_err());
    assert!(Potential::laguerre(vec![0.0, 0.0], 0.0).is_err());
    assert!(Potential::laguerre(vec![-1.5, 0.0], 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn palindromic_chain_weight_is_symmetric(x in 0.05f64..4.0, y in 0.05f64..4.0, a in -0.3f64..1.0, b in -0.3f64..1.0) {
        let pot = laguerre(&[a, b, a], 1.3);
        let u = eta_weight(x, y, &pot, &ctx()).unwrap().to_f64();
        let v = eta_weight(y, x, &pot, &ctx()).unwrap().to_f64();
        prop_assert!(rel(u, v) < 1e-14);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn two_chain_bimoments_match_beta_integrals(a1 in -0.7f64..1.5, a2 in -0.7f64..1.5, n_scale in 0.5f64..3.0) {
        let b = bimoments(&laguerre(&[a1, a2], n_scale), 3, PREC).unwrap();
        for j in 0..=3 {
            for l in 0..=3 {
                let exact = two_chain_moment(a1, a2, n_scale, j, l);
                let d = Float::with_val(PREC, b.matrix.get(j, l) - &exact) / &exact;
                prop_assert!(d.to_f64().abs() < 1e-22, "({j},{l}) {}", d.to_f64());
            }
        }
    }
}

// bimoments

#[test]
fn unit_two_chain_bimoment_is_one() {
    let b = bimoments(&laguerre(&[0.0, 0.0], 1.0), 0, PREC).unwrap();
    let d = Float::with_val(PREC, b.matrix.get(0, 0) - 1u32).abs();
    assert!(d.to_f64() < 1e-24);
}

#[test]
fn three_chain_bimoments_match_laplace_oracle() {
    let a = [-0.3, 0.6, 0.2];
    let b = bimoments(&laguerre(&a, 2.0), 3, PREC).unwrap();
    let table = three_chain_moments_extended(a, 2.0, 3);
    for j in 0..=3 {
        for l in 0..=3 {
            let d = (Float::with_val(PREC, b.matrix.get(j, l) - &table[j][l]) / &table[j][l]).to_f64();
            assert!(d.abs() < 1e-20, "I({j},{l}) {d}");
        }
    }
}

#[test]
fn bimoments_and_determinants_are_positive() {
    for sys in [&*SYS2, &*SYS3] {
        assert!(sys.bimoments.data.iter().all(|x| *x > 0));
        assert!(sys.deltas.iter().all(|d| *d > 0));
        assert!(sys.norms.iter().all(|h| *h > 0));
    }
}

// biorthogonal polynomials

#[test]
fn degree_zero_and_telescoping() {
    for sys in [&*SYS2, &*SYS3] {
        assert_eq!(sys.psi_coeffs[0], vec![Float::with_val(PREC, 1)]);
        assert_eq!(sys.phi_coeffs[0], vec![Float::with_val(PREC, 1)]);
        assert_eq!(sys.norms[0], *sys.bimoments.get(0, 0));
        let prod = Float::with_val(sys.prec(), &sys.norms[0] * &sys.norms[1]);
        assert!(rel(prod.to_f64(), sys.deltas[2].to_f64()) < 1e-30);
        for n in 0..=sys.nmax {
            assert_eq!(*sys.psi_coeffs[n].last().unwrap(), 1);
            assert_eq!(*sys.phi_coeffs[n].last().unwrap(), 1);
            let ratio = Float::with_val(sys.prec(), &sys.deltas[n + 1] / &sys.deltas[n]);
            assert!(rel(ratio.to_f64(), sys.norms[n].to_f64()) < 1e-30);
        }
    }
}

fn pair_with(c: &[Float], d: &[Float], moment: impl Fn(usize, usize) -> Float) -> Float {
    let mut s = Float::new(PREC);
    for (j, cj) in c.iter().enumerate() {
        for (l, dl) in d.iter().enumerate() {
            s += Float::with_val(PREC, cj * dl) * moment(j, l);
        }
    }
    s
}

#[test]
fn two_chain_biorthogonality_against_closed_form_moments() {
    let sys = &*SYS2;
    for n in 0..=8 {
        for m in 0..=8 {
            let v = pair_with(&sys.psi_coeffs[n], &sys.phi_coeffs[m], |j, l| two_chain_moment(0.5, 0.5, 1.0, j, l));
            let target = if n == m { sys.norms[n].clone() } else { Float::new(PREC) };
            let r = Float::with_val(PREC, &v - &target) / &sys.norms[n];
            assert!(r.to_f64().abs() < 1e-6, "({n},{m}) {}", r.to_f64());
        }
    }
}

/// p = 3 bimoments 0..=nmax from the same Laplace form in extended precision, with a
/// double-exponential rule on each Laplace variable.
fn three_chain_moments_extended(a: [f64; 3], n_scale: f64, nmax: usize) -> Vec<Vec<Float>> {
    let prec = 192;
    let rule = exp_sinh(1.0 / 64.0, 4.6, 4.2, &PrecisionContext::with_bits(prec));
    let nn = Float::with_val(prec, n_scale);
    let shifted: Vec<Float> = rule.nodes.iter().map(|s| Float::with_val(prec, s + &nn)).collect();
    let e = |k: usize, v: f64| Float::with_val(prec, v) + (k as u32 + 1);
    let pw = |x: &Float, y: &Float| Float::with_val(prec, x.ln_ref()) * y;
    let mid = e(0, a[1]);
    let m = rule.len();
    // (W·B·W)[i][k] = w_i w_k (N + s_i + t_k)^{−(a₂+1)}
    let core: Vec<Vec<Float>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| {
                    let z = Float::with_val(prec, &shifted[i] + &rule.nodes[k]);
                    (-pw(&z, &mid)).exp() * &rule.weights[i] * &rule.weights[k]
                })
                .collect()
        })
        .collect();
    let left: Vec<Vec<Float>> = (0..=nmax).map(|j| shifted.iter().map(|x| (-pw(x, &e(j, a[0]))).exp()).collect()).collect();
    let right: Vec<Vec<Float>> = (0..=nmax).map(|l| shifted.iter().map(|x| (-pw(x, &e(l, a[2]))).exp()).collect()).collect();
    let core_right: Vec<Vec<Float>> = right
        .iter()
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
                    acc * e(j, a[0]).gamma() * mid.clone().gamma() * e(l, a[2]).gamma()
                })
                .collect()
        })
        .collect()
}

#[test]
fn extended_laplace_oracle_agrees_with_f64_oracle() {
    let a = [0.5, 0.0, 0.5];
    let t = three_chain_moments_extended(a, 1.0, 1);
    assert!(rel(t[1][0].to_f64(), three_chain_moment(a, 1.0, 1, 0)) < 1e-11);
}

#[test]
fn three_chain_biorthogonality_against_laplace_moments() {
    let sys = &*SYS3;
    let table = three_chain_moments_extended([0.5, 0.0, 0.5], 1.0, 8);
    for j in 0..=8 {
        for l in 0..=8 {
            let d = (Float::with_val(PREC, sys.bimoments.get(j, l) - &table[j][l]) / &table[j][l]).to_f64();
            assert!(d.abs() < 1e-20, "I({j},{l}) {d}");
        }
    }
    for n in 0..=8 {
        for m in 0..=8 {
            let v = pair_with(&sys.psi_coeffs[n], &sys.phi_coeffs[m], |j, l| table[j][l].clone());
            let target = if n == m { sys.norms[n].clone() } else { Float::new(PREC) };
            let r = (Float::with_val(PREC, &v - &target) / &sys.norms[n]).to_f64();
            assert!(r.abs() < 1e-6, "({n},{m}) {r}");
        }
    }
}

#[test]
fn biorthogonality_against_own_moments_is_exact() {
    for sys in [&*SYS2, &*SYS3] {
        for n in 0..=sys.nmax {
            for m in 0..=sys.nmax {
                let v = sys.pair(&sys.psi_coeffs[n], &sys.phi_coeffs[m]);
                let target = if n == m { sys.norms[n].clone() } else { Float::new(sys.prec()) };
                let r = Float::with_val(sys.prec(), &v - &target) / &sys.norms[n];
                assert!(r.abs().to_f64() < 1e-40);
            }
        }
    }
}

#[test]
fn two_chain_determinant_is_positive() {
    let sys = biorthogonal_system(&laguerre(&[0.5, 0.5], 1.0), 1, &ctx()).unwrap();
    assert!(sys.deltas[2] > 0);
}

// kernels

#[test]
fn single_term_kernel_is_constant() {
    let sys = Arc::new(biorthogonal_system(&laguerre(&[0.0, 0.0], 1.0), 2, &ctx()).unwrap());
    let ks = finite_kernels(sys, 1).unwrap();
    let inv_h0 = 1.0 / ks.sys.norms[0].to_f64();
    for (x, y) in [(0.1, 0.2), (1.0, 3.0), (5.0, 0.01)] {
        assert!(rel(ks.m_kernel(2, 1, x, y).unwrap().to_f64(), inv_h0) < 1e-30);
    }
}

fn eta2(a: [f64; 2], x: f64, y: f64) -> f64 {
    x.powf(a[0]) * y.powf(a[1]) * (-x - y).exp() / (x + y)
}

#[test]
fn reproducing_kernel_identities() {
    let ks = kernels(&SYS2, 3);
    let a = [0.5, 0.5];
    let m = |x: f64, y: f64| ks.m_kernel(2, 1, x, y).unwrap().to_f64();
    let (x, y) = (0.5, 1.2);
    let outer = |s: f64| {
        let inner = |t: f64| m(t, y) * eta2(a, s, t);
        m(x, s) * half_line_kernel(&inner, 1e-12)
    };
    let lhs = half_line_kernel(&outer, 1e-10);
    assert!(rel(lhs, m(x, y)) < 1e-6, "{lhs} vs {}", m(x, y));

    let outer = |x: f64| half_line_kernel(&|y: f64| m(x, y) * eta2(a, y, x), 1e-12);
    let trace = half_line_kernel(&outer, 1e-10);
    assert!((trace - 3.0).abs() < 1e-6, "{trace}");
}

fn diagonal_integral(ks: &FiniteKernelSet, j: usize) -> f64 {
    half_line_kernel(&|x: f64| ks.k_kernel(j, j, x, x).unwrap().to_f64(), 1e-9)
}

#[test]
fn diagonal_kernels_integrate_to_n() {
    let ks = kernels(&SYS2, 2);
    for j in 1..=2 {
        assert!((diagonal_integral(&ks, j) - 2.0).abs() < 1e-4, "level {j}");
    }
    let ks = kernels(&SYS3, 3);
    for j in 1..=3 {
        assert!((diagonal_integral(&ks, j) - 3.0).abs() < 1e-4, "level {j}");
    }
}

#[test]
fn one_point_densities_are_nonnegative() {
    let ks = kernels(&SYS3, 4);
    for j in 1..=3 {
        for i in 0..40 {
            let x = 0.01 * 1.25f64.powi(i);
            let d = correlation_density(&[j], &[x], &ks).unwrap();
            assert!(d >= -1e-30, "level {j} at {x}: {}", d.to_f64());
        }
    }
}

#[test]
fn repeated_points_kill_the_density() {
    let ks = kernels(&SYS3, 4);
    let d = correlation_density(&[2, 2, 1], &[0.8, 0.8, 1.5], &ks).unwrap();
    assert!(d.abs().to_f64() < 1e-40);
}

#[test]
fn determinant_gauge_invariance() {
    let ks = kernels(&SYS3, 4);
    let levels = [1, 2, 3, 2, 1];
    let points = [0.3, 1.1, 0.7, 2.4, 1.9];
    let k = correlation_density(&levels, &points, &ks).unwrap().to_f64();
    let m = correlation_density_reduced(&levels, &points, &ks).unwrap().to_f64();
    assert!(rel(k, m) < 1e-8, "{k} vs {m}");
}

#[test]
fn levelwise_orthogonality() {
    let ks = kernels(&SYS3, 4);
    for l in 1..=3 {
        for n in 0..3 {
            for m in 0..3 {
                let f = |x: f64| ks.psi_level(l, n, x).unwrap().to_f64() * ks.phi_level(l, m, x).unwrap().to_f64();
                let v = half_line_kernel(&f, 1e-12);
                let target = if n == m { ks.sys.norms[n].to_f64() } else { 0.0 };
                assert!((v - target).abs() < 1e-7 * ks.sys.norms[n].to_f64(), "level {l} ({n},{m}): {v}");
            }
        }
    }
}

#[test]
fn row_recursions() {
    let ks = kernels(&SYS3, 3);
    let m = |i: usize, j: usize, x: f64, y: f64| ks.m_kernel(i, j, x, y).unwrap().to_f64();
    let w = |j: usize, z: f64| ks.weight(j, z).to_f64();
    let (x, y) = (0.6, 1.7);
    // first row from 𝕄_{31}
    for i in 1..3 {
        let v = half_line_kernel(&|z: f64| m(3, i, x, z) * w(i, z) / (z + y), 1e-13);
        assert!(rel(v, m(3, i + 1, x, y)) < 1e-8, "M_3{}", i + 1);
    }
    // neighbouring levels
    for i in 1..3 {
        let v = half_line_kernel(&|z: f64| m(i + 1, i + 1, z, y) * w(i + 1, z) / (x + z), 1e-13);
        assert!(rel(v - 1.0 / (x + y), m(i, i + 1, x, y)) < 1e-8, "M_{i}{}", i + 1);
    }
    // the rest
    for (i, j) in [(1, 1), (1, 3), (2, 1), (2, 2)] {
        let v = half_line_kernel(&|z: f64| m(i + 1, j, z, y) * w(i + 1, z) / (x + z), 1e-13);
        assert!(rel(v, m(i, j, x, y)) < 1e-8, "M_{i}{j}");
    }
}

#[test]
fn kernel_error_estimates_are_small() {
    let ks = kernels(&SYS3, 4);
    for (i, j) in [(1, 1), (1, 3), (2, 2), (3, 1)] {
        let (v, e) = ks.m_kernel_with_error(i, j, 0.9, 0.4).unwrap();
        assert!(e < 1e-20 * v.to_f64().abs().max(1.0), "({i},{j}) {e}");
    }
}

#[test]
fn kernel_rejects_bad_input() {
    let ks = kernels(&SYS3, 2);
    assert!(matches!(ks.m_kernel(0, 1, 1.0, 1.0), Err(NumError::Invalid(_))));
    assert!(matches!(ks.m_kernel(1, 4, 1.0, 1.0), Err(NumError::Invalid(_))));
    assert!(matches!(ks.m_kernel(1, 1, -1.0, 1.0), Err(NumError::Domain(_))));
    assert!(finite_kernels(Arc::clone(&SYS3), 10).is_err());
}

// scaling limit

#[test]
fn three_chain_universality_trend() {
    let a = vec![0.5, 0.0, 0.5];
    let fp = FieldParams::new(a.clone(), &ctx()).unwrap();
    let pot = laguerre(&a, 1.0);
    let tables = universality_compare_points(&pot, &[6, 12, 24], 2, 2, &[(1.0, 2.0), (2.0, 3.0), (1.0, 1.0)], None, &fp, &ctx())
        .unwrap();
    for t in &tables {
        let d: Vec<f64> = t.rows.iter().map(|r| r.deviation).collect();
        assert!(d[2] < 0.15, "({}, {}): {d:?}", t.xi, t.eta);
        if t.xi != t.eta {
            assert!(d[0] > d[1] && d[1] > d[2], "({}, {}): {d:?}", t.xi, t.eta);
        }
    }
}

#[test]
fn two_chain_comparison_needs_a_scaling_constant() {
    let a = vec![0.0, 0.0];
    let fp = FieldParams::new(a.clone(), &ctx()).unwrap();
    let pot = laguerre(&a, 1.0);
    assert!(matches!(universality_compare(&pot, &[4], 1, 1, 1.0, 1.0, None, &fp, &ctx()), Err(NumError::Invalid(_))));
}

use cauchy_chain::field_kernels::{
    bgs3_kernel, correlation_determinant, exact_big_a, gauged_kernel, kernel_grid, kz_kernel, limit_kernel,
    limit_kernel_double, limit_kernel_residue, limit_kernel_route, scaling_weights, separation_block,
    separation_reference, Bgs3Label, FieldParams, KernelRoute, SeparationScaling,
};
use cauchy_chain::{Cx, PrecisionContext};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

const PREC: u32 = 160;

/// J_a(z) and J_a'(z) from the power series.
fn bessel_j(a: f64, z: f64) -> (Float, Float) {
    let z = Float::with_val(PREC, z);
    let half = Float::with_val(PREC, &z / 2u32);
    let mut j = Float::new(PREC);
    let mut dj = Float::new(PREC);
    for k in 0..80u32 {
        let e = Float::with_val(PREC, 2 * k) + a;
        let den = Float::with_val(PREC, Float::factorial(k)) * Float::with_val(PREC, Float::with_val(PREC, a) + (k + 1)).gamma();
        let pw = Float::with_val(PREC, (&half).pow(&e)) / den;
        let t = if k % 2 == 0 { pw } else { -pw };
        dj += Float::with_val(PREC, &t * &e) / &z;
        j += t;
    }
    (j, dj)
}

/// 4K_Bess,a(4ξ, 4η) = ∫₀¹ J_a(2√(sξ)) J_a(2√(sη)) ds in closed form.
fn bessel_kernel_4(a: f64, xi: f64, eta: f64) -> f64 {
    let (x, y) = (2.0 * xi.sqrt(), 2.0 * eta.sqrt());
    let (jx, djx) = bessel_j(a, x);
    let (jy, djy) = bessel_j(a, y);
    if (xi - eta).abs() < 1e-14 {
        let v = Float::with_val(PREC, djx.square_ref()) + Float::with_val(PREC, jx.square_ref()) * (1.0 - a * a / (x * x));
        return v.to_f64();
    }
    let num = Float::with_val(PREC, &jx * &djy) * y - Float::with_val(PREC, &djx * &jy) * x;
    (num * 2u32 / (x * x - y * y)).to_f64()
}

fn close(a: &Cx, b: &Cx, tol: f64) -> bool {
    a.dist(b) <= tol * a.abs().to_f64().max(1.0)
}

fn fp(a: &[f64]) -> FieldParams {
    FieldParams::new(a.to_vec(), &PrecisionContext::with_bits(128)).unwrap()
}

#[test]
fn one_chain_is_the_bessel_kernel() {
    let pts = [(0.5, 1.3), (2.0, 0.7), (1.1, 1.1), (0.05, 3.0)];
    for a in [0.0, 0.5, 1.5] {
        let f = fp(&[a]);
        for &(xi, eta) in &pts {
            let g = gauged_kernel(1, 1, xi, eta, KernelRoute::ContourProduct, &f).unwrap();
            let want = bessel_kernel_4(a, xi, eta);
            assert!((g.re.to_f64() - want).abs() < 1e-10, "a = {a}, ({xi}, {eta}): {} vs {want}", g.re.to_f64());
            // the raw kernel carries (ξ/η)^{a/2}
            let raw = limit_kernel(1, 1, xi, eta, &f).unwrap().re.to_f64();
            assert!((raw - (xi / eta).powf(a / 2.0) * want).abs() < 1e-10 * raw.abs().max(1.0));
        }
    }
}

#[test]
fn one_chain_at_the_origin() {
    let f = fp(&[0.0]);
    let v = limit_kernel(1, 1, 0.0, 0.0, &f).unwrap();
    assert!(v.dist(&Cx::new(128, 1.0, 0.0)) < 1e-25);
}

#[test]
fn three_chain_routes_agree_at_one_two() {
    let f = fp(&[0.3, -0.2, 0.45]);
    let a = limit_kernel(1, 1, 1.0, 2.0, &f).unwrap();
    let b = limit_kernel_double(1, 1, 1.0, 2.0, &f).unwrap();
    assert!(close(&a, &b, 1e-10), "{a:?} vs {b:?}");
}

fn all_routes(a: &[f64], pts: &[(f64, f64)]) -> f64 {
    let f = fp(a);
    let p = a.len();
    let mut worst = 0.0f64;
    for j in 1..=p {
        for l in 1..=p {
            for &(xi, eta) in pts {
                let g1 = limit_kernel(j, l, xi, eta, &f).unwrap();
                let g2 = limit_kernel_residue(j, l, xi, eta, &f).unwrap();
                let g3 = limit_kernel_double(j, l, xi, eta, &f).unwrap();
                let s = g1.abs().to_f64().max(1.0);
                worst = worst.max(g1.dist(&g2) / s).max(g1.dist(&g3) / s);
            }
        }
    }
    worst
}

#[test]
fn routes_agree_on_grids() {
    let pts = [(0.4, 1.7), (1.3, 0.6), (2.2, 2.9)];
    assert!(all_routes(&[0.37], &pts) < 1e-10);
    assert!(all_routes(&[0.3, -0.15], &pts) < 1e-10);
    assert!(all_routes(&[0.2, 0.55, -0.3], &pts[..2]) < 1e-10);
}

#[test]
fn routes_agree_above_the_diagonal_for_four_chains() {
    assert!(all_routes(&[0.2, 0.55, -0.3, 0.4], &[(0.4, 1.7)]) < 1e-10);
}

#[test]
fn routes_agree_on_resonant_pack() {
    // every a_{kℓ} is an integer, so both factorized routes extrapolate a perturbed pack
    assert!(all_routes(&[1.0, 0.0], &[(0.8, 1.9)]) < 1e-10);
}

#[test]
fn ten_random_points_for_two_chain() {
    let f = fp(&[0.25, 0.6]);
    let mut rng = 0x2545F4914F6CDD1Du64;
    let mut next = || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        0.1 + 3.0 * (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 0..10 {
        let (j, l) = (1 + i % 2, 1 + (i / 2) % 2);
        let (xi, eta) = (next(), next());
        let a = limit_kernel(j, l, xi, eta, &f).unwrap();
        let b = limit_kernel_double(j, l, xi, eta, &f).unwrap();
        assert!(close(&a, &b, 1e-10), "({j},{l}) at ({xi}, {eta})");
    }
}

#[test]
fn zero_pack_diagonal_kernels_are_real() {
    let f = fp(&[0.0, 0.0]);
    for j in 1..=2 {
        let v = limit_kernel_double(j, j, 0.7, 1.6, &f).unwrap();
        assert!(v.im.to_f64().abs() < 1e-12);
        let w = limit_kernel(j, j, 0.7, 1.6, &f).unwrap();
        assert!(close(&v, &w, 1e-10));
    }
}

#[test]
fn same_parity_diagonal_is_continuous() {
    // G₁₃ has a removable pole at ξ = η handled by the series below |ξ − η| < 1e-4
    let f = fp(&[0.3, 0.25, -0.1]);
    let at = limit_kernel(1, 3, 1.2, 1.2, &f).unwrap();
    let near = limit_kernel(1, 3, 1.2, 1.2 + 5e-5, &f).unwrap();
    let off = limit_kernel(1, 3, 1.2, 1.2 + 2e-4, &f).unwrap();
    let slope = (off.re.to_f64() - near.re.to_f64()) / 1.5e-4;
    assert!((near.re.to_f64() - at.re.to_f64() - slope * 5e-5).abs() < 1e-8);
    let d = limit_kernel_double(1, 3, 1.2, 1.2 + 2e-4, &f).unwrap();
    assert!(close(&off, &d, 1e-9));
}

#[test]
fn bgs3_kernels_match_two_chain() {
    let (a, b) = (0.35, 0.2);
    let ctx = PrecisionContext::with_bits(128);
    let f = fp(&[a, b]);
    let (xi, eta): (f64, f64) = (0.9, 1.6);
    let fac = (xi / eta).powf(a);
    let cases = [
        (Bgs3Label::K00, (2, 1)),
        (Bgs3Label::K01, (1, 1)),
        (Bgs3Label::K10, (2, 2)),
        (Bgs3Label::K11, (1, 2)),
    ];
    for (lab, (j, l)) in cases {
        let g = bgs3_kernel(lab, xi, eta, a, b, &ctx).unwrap();
        let h = limit_kernel(j, l, eta, xi, &f).unwrap().scale_f64(fac);
        assert!(close(&g, &h, 1e-10), "{lab:?}: {g:?} vs {h:?}");
    }
}

#[test]
fn bgs3_resonant_labels() {
    let ctx = PrecisionContext::with_bits(128);
    let f = fp(&[0.0, 0.0]);
    let g = bgs3_kernel(Bgs3Label::K01, 1.0, 1.0, 0.0, 0.0, &ctx).unwrap();
    let h = limit_kernel(1, 1, 1.0, 1.0, &f).unwrap();
    assert!(close(&g, &h, 1e-10), "{g:?} vs {h:?}");
}

#[test]
fn kz_one_is_bessel() {
    let ctx = PrecisionContext::with_bits(128);
    let (x, y) = (0.8, 1.7);
    let k = kz_kernel(1, &[0], x, y, &ctx).unwrap();
    let want = bessel_kernel_4(0.0, y, x);
    assert!((k.re.to_f64() - want).abs() < 1e-10);
}

#[test]
fn kz_two_matches_field_kernel() {
    let ctx = PrecisionContext::with_bits(128);
    let k = kz_kernel(2, &[0, 1, 2], 1.0, 1.0, &ctx).unwrap();
    let g = limit_kernel(1, 1, 1.0, 1.0, &fp(&[1.0, 1.0])).unwrap();
    assert!(close(&k, &g, 1e-10), "{k:?} vs {g:?}");
    let k = kz_kernel(2, &[2, 3], 0.6, 1.4, &ctx).unwrap();
    let g = limit_kernel(1, 1, 1.4, 0.6, &fp(&[2.0, 1.0])).unwrap();
    assert!(close(&k, &g, 1e-10), "{k:?} vs {g:?}");
}

#[test]
fn kz_quadrature_has_converged() {
    let coarse = kz_kernel(2, &[0, 1, 2], 1.0, 1.0, &PrecisionContext::new(128, 1e-13).unwrap()).unwrap();
    let fine = kz_kernel(2, &[0, 1, 2], 1.0, 1.0, &PrecisionContext::new(128, 1e-24).unwrap()).unwrap();
    assert!(coarse.dist(&fine) < 1e-12);
}

fn block_error(block: &[Vec<Cx>], reference: &[Vec<Option<Cx>>]) -> f64 {
    let mut worst = 0.0f64;
    for (row, rrow) in block.iter().zip(reference) {
        for (v, r) in row.iter().zip(rrow) {
            if let Some(r) = r {
                worst = worst.max(v.dist(r) / r.abs().to_f64().max(1e-300));
            }
        }
    }
    worst
}

#[test]
fn chain_separates_at_the_end() {
    let f = fp(&[0.3, 0.45, 0.0]);
    let (xi, eta) = (1.0, 1.5);
    let err = |lam: f64| {
        let b = separation_block(3, lam, SeparationScaling::Head, xi, eta, &f).unwrap();
        let r = separation_reference(3, lam, SeparationScaling::Head, xi, eta, &f).unwrap();
        block_error(&b, &r)
    };
    let (e10, e100) = (err(10.0), err(100.0));
    assert!(e100 < 0.05, "deviation {e100}");
    let rate = e100 / e10;
    assert!((1.0 / 20.0..=1.0 / 5.0).contains(&rate), "rate {rate} ({e10}, {e100})");
}

#[test]
fn chain_separates_in_the_middle() {
    let f = fp(&[0.3, 0.0, 0.45]);
    let (xi, eta) = (1.0, 1.2);
    let err = |lam: f64| {
        let b = separation_block(2, lam, SeparationScaling::Tail, xi, eta, &f).unwrap();
        let r = separation_reference(2, lam, SeparationScaling::Tail, xi, eta, &f).unwrap();
        block_error(&b, &r)
    };
    let (e10, e100) = (err(10.0), err(100.0));
    assert!(e100 < 0.05, "deviation {e100}");
    let rate = e100 / e10;
    assert!((1.0 / 20.0..=1.0 / 5.0).contains(&rate), "rate {rate} ({e10}, {e100})");
}

#[test]
fn unit_lambda_is_the_plain_kernel() {
    let f = fp(&[0.3, 0.2]);
    let b = separation_block(2, 1.0, SeparationScaling::Head, 0.7, 1.3, &f).unwrap();
    let g = fp(&[0.3, 1.0]);
    for j in 1..=2 {
        for l in 1..=2 {
            let v = limit_kernel_residue(j, l, 0.7, 1.3, &g).unwrap();
            assert!(b[j - 1][l - 1].dist(&v) < 1e-25);
        }
    }
}

#[test]
fn one_point_functions_are_nonnegative() {
    let f = fp(&[0.3, -0.2]);
    for j in 0..2 {
        for &x in &[0.05, 0.3, 1.0, 2.5, 6.0] {
            let mut levels = vec![vec![], vec![]];
            levels[j].push(x);
            let c = correlation_determinant(&levels, KernelRoute::ContourProduct, &f).unwrap();
            assert!(c.value > 0.0, "level {} at {x}: {}", j + 1, c.value);
        }
    }
}

#[test]
fn repeated_points_give_zero() {
    let f = fp(&[0.3, -0.2]);
    let c = correlation_determinant(&[vec![0.8, 0.8], vec![]], KernelRoute::ContourProduct, &f).unwrap();
    assert!(c.value.abs() < 1e-20);
    assert!(c.near_singular);
}

#[test]
fn two_point_functions_below_diagonal_product() {
    let f = fp(&[0.4]);
    for &(x, y) in &[(0.3, 0.9), (1.0, 1.1), (0.5, 4.0)] {
        let c = correlation_determinant(&[vec![x, y]], KernelRoute::ContourProduct, &f).unwrap();
        let dx = correlation_determinant(&[vec![x]], KernelRoute::ContourProduct, &f).unwrap();
        let dy = correlation_determinant(&[vec![y]], KernelRoute::ContourProduct, &f).unwrap();
        assert!(c.value >= 0.0 && c.value <= dx.value * dy.value);
    }
}

#[test]
fn mixed_level_determinant_is_gauge_free() {
    // conjugating by the diagonal gauge leaves the determinant unchanged
    let f = fp(&[0.3, -0.2]);
    let levels = vec![vec![0.4, 1.2], vec![0.9]];
    let d = correlation_determinant(&levels, KernelRoute::ResidueCorrected, &f).unwrap();
    let pts: Vec<(usize, f64)> = vec![(1, 0.4), (1, 1.2), (2, 0.9)];
    let m = cauchy_chain::linalg::CMat::from_fn(3, |r, c| {
        let (i, x) = pts[r];
        let (j, y) = pts[c];
        gauged_kernel(i, j, x, y, KernelRoute::ResidueCorrected, &f).unwrap()
    });
    assert!((m.det().re.to_f64() - d.value).abs() < 1e-12 * d.value.abs().max(1.0));
}

#[test]
fn grid_flags_parity_diagonal() {
    let f = fp(&[0.3, 0.1]);
    let g = kernel_grid(1, 1, &[(0.5, 1.0), (1.0, 1.0)], KernelRoute::DoubleResidue, &f);
    assert_eq!(g.flagged(), vec![1]);
    let g = kernel_grid(1, 1, &[(0.5, 1.0), (1.0, 1.0)], KernelRoute::ContourProduct, &f);
    assert!(g.flagged().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_is_skew_and_matches_the_a_constants(a in proptest::collection::vec(-0.19f64..3.0, 1..6)) {
        let f = FieldParams::new(a.clone(), &PrecisionContext::with_bits(64)).unwrap();
        let (_, k) = scaling_weights(&f);
        let big_a = exact_big_a(&f.exps);
        let p = a.len();
        let r = |x: f64| Rational::from_f64(x).unwrap();
        for j in 0..p {
            prop_assert_eq!(&k[j][j], &Rational::new());
            for l in 0..p {
                prop_assert_eq!(Rational::from(&k[j][l] + &k[l][j]), Rational::new());
                let want = Rational::from(&r(a[j]) + &r(a[l])) * Rational::from((-(p as i32 + 1), 2))
                    + Rational::from(&big_a[j + 1] - &big_a[l]);
                prop_assert_eq!(&k[j][l], &want);
            }
        }
    }

    #[test]
    fn routes_agree_for_random_two_chains(a1 in -0.6f64..1.2, a2 in -0.6f64..1.2, xi in 0.2f64..3.0, eta in 0.2f64..3.0) {
        prop_assume!(a1 + a2 > -0.9);
        prop_assume!((xi - eta).abs() > 0.05);
        let f = fp(&[a1, a2]);
        let j = 1 + (xi * 10.0) as usize % 2;
        let l = 1 + (eta * 10.0) as usize % 2;
        let g = limit_kernel_route(j, l, xi, eta, KernelRoute::ContourProduct, &f).unwrap();
        let h = limit_kernel_double(j, l, xi, eta, &f).unwrap();
        prop_assert!(close(&g, &h, 1e-10), "{:?} vs {:?}", g, h);
    }
}

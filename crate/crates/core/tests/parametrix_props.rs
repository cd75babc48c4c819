use cauchy_chain::gammakit::{gamma, pi};
use cauchy_chain::linalg::CMat;
use cauchy_chain::parametrix::{
    assemble_sector, bilinear_concomitant, build_context, f_func, g_func, g_func_log, generalized_concomitant,
    generalized_concomitant_split, inverse_product, verify_asymptotics, verify_jump, verify_monodromy,
    verify_ray_jump, ChainExponents, Family, ParametrixContext, Ray, Side, SidedPoint,
};
use cauchy_chain::{Cx, PrecisionContext};
use proptest::prelude::*;
use rug::Float;

fn pc(a: &[f64]) -> ParametrixContext {
    build_context(ChainExponents::new(a.to_vec()).unwrap(), &PrecisionContext::default()).unwrap()
}

fn cx(re: f64, im: f64) -> Cx {
    PrecisionContext::default().cx(re, im)
}

const P3: [f64; 3] = [0.3, -0.1, 0.45];

#[test]
fn g4_matches_meijer_g_on_both_sides() {
    // g₄^{(±)} = (2/(2π)^{3/2}) G^{4,0}_{0,4}(e^{∓iπ}ζ | 0, a₃, a₂₃, a₁₃); both sides coincide at ζ = 1
    let c = pc(&P3);
    let z = cx(1.0, 0.0);
    let gp = g_func(4, Side::Plus, &z, &c).unwrap();
    let gm = g_func(4, Side::Minus, &z, &c).unwrap();
    // G^{4,0}_{0,4} at e^{−iπ} and e^{iπ} differ, but the combination is fixed by the prefactor
    let norm = 2.0 / (2.0 * std::f64::consts::PI).powf(1.5);
    let spec = cauchy_chain::meijer::MeijerSeriesSpec::from_lists(&[0.0, 0.45, 0.35, 0.65], &[]).unwrap();
    let mut l = z.ln();
    l.im -= Float::with_val(l.prec(), pi(l.prec()));
    let gm4 = cauchy_chain::meijer::meijer_series_log(&spec, &l, &PrecisionContext::default()).unwrap();
    assert!(gp.dist(&gm4.scale_f64(norm)) < 1e-14, "{gp:?} {gm4:?}");
    let mut l = z.ln();
    l.im += Float::with_val(l.prec(), pi(l.prec()));
    let gp4 = cauchy_chain::meijer::meijer_series_log(&spec, &l, &PrecisionContext::default()).unwrap();
    assert!(gm.dist(&gp4.scale_f64(norm)) < 1e-14);
}

#[test]
fn g1_at_origin() {
    let c = pc(&P3);
    let v = g_func(1, Side::Plus, &cx(0.0, 0.0), &c).unwrap();
    let ctx = PrecisionContext::default();
    let mut expect = c.c[1].clone();
    for l in 1..=3 {
        let mut x = ctx.cx(c.d[l], 0.0);
        x.re += 1u32;
        expect = &expect / &gamma(&x, &ctx).unwrap();
    }
    assert!(v.dist(&expect) < 1e-60, "{v:?} {expect:?}");
}

#[test]
fn f1_equals_g1() {
    let c = pc(&P3);
    let z = cx(0.7, 0.4);
    let f = f_func(1, Side::Plus, &z, &c).unwrap();
    let g = g_func(1, Side::Plus, &z, &c).unwrap();
    assert!(f.dist(&g) < 1e-60);
}

#[test]
fn monodromy_at_reference_point() {
    let c = pc(&P3);
    let ctx = PrecisionContext::default();
    let z = Cx::polar(&ctx.real(0.8), &Float::with_val(256, pi(256) / 3u32));
    for j in 2..=4 {
        let r = verify_monodromy(j, &z, &c).unwrap();
        assert!(r < 1e-12, "j = {j}: {r:e}");
    }
}

#[test]
fn ode_residual() {
    // Π_{ℓ=0}^{p}(Δ + a_{1ℓ}) f_j + ζ f_j = 0
    let c = pc(&P3);
    let z = SidedPoint::new(&cx(1.3, 0.0), Some(Side::Plus), 288).unwrap();
    for j in 1..=4 {
        let d = c.deltas(Family::F, j, &z, 4).unwrap();
        let mut poly = vec![1.0f64];
        for &r in &c.d {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, x) in poly.iter().enumerate() {
                next[i + 1] += x;
                next[i] += x * r;
            }
            poly = next;
        }
        let mut acc = &z.log.exp() * &d[0];
        for (i, x) in poly.iter().enumerate() {
            acc += &d[i].scale_f64(*x);
        }
        assert!(acc.abs().to_f64() < 1e-10, "j = {j}: {acc:?}");
    }
}

#[test]
fn concomitant_is_identity() {
    for a in [&[0.35][..], &[0.3, -0.1], &P3, &[0.2, 0.15, -0.3, 0.4]] {
        let c = pc(a);
        let n = a.len() + 1;
        for (re, im) in [(0.5, 0.3), (3.7, -0.4)] {
            let z = cx(re, im);
            for j in 1..=n {
                for k in 1..=n {
                    for (sf, sh) in [(Side::Plus, Side::Plus), (Side::Minus, Side::Minus)] {
                        let b = bilinear_concomitant(j, k, sf, sh, &z, &c).unwrap();
                        let e = if j == k { 1.0 } else { 0.0 };
                        assert!(b.dist(&cx(e, 0.0)) < 1e-10, "p = {}, ({j},{k}) at {re}+{im}i: {b:?}", a.len());
                    }
                }
            }
        }
    }
}

#[test]
fn mixed_sides_pick_up_the_jump() {
    // f₂^{(+)} = f₂^{(−)} + f₁, so B(f₂^{(−)}, f̂₁^{(+)}) = B(f₂^{(+)}, f̂₁^{(+)}) − 1 = −1
    let c = pc(&[0.35]);
    let z = cx(0.8, 0.6);
    let b = bilinear_concomitant(2, 1, Side::Minus, Side::Plus, &z, &c).unwrap();
    assert!(b.dist(&cx(-1.0, 0.0)) < 1e-12);
    let b = bilinear_concomitant(1, 1, Side::Minus, Side::Plus, &z, &c).unwrap();
    assert!(b.dist(&cx(1.0, 0.0)) < 1e-12);
}

#[test]
fn concomitant_is_constant() {
    let c = pc(&P3);
    let b1 = bilinear_concomitant(2, 2, Side::Plus, Side::Plus, &cx(0.5, 0.0), &c).unwrap();
    let b2 = bilinear_concomitant(2, 2, Side::Plus, Side::Plus, &cx(3.7, 0.0), &c).unwrap();
    assert!(b1.dist(&b2) < 1e-12);
}

fn tagged(re: f64, im: f64, side: Side) -> SidedPoint {
    SidedPoint::new(&cx(re, im), Some(side), 288).unwrap()
}

#[test]
fn generalized_concomitant_routes_agree() {
    for a in [&[0.35][..], &[0.3, -0.1], &P3] {
        let c = pc(a);
        let w = tagged(0.5, 0.0, Side::Plus);
        let z = tagged(1.5, 0.0, Side::Plus);
        for j in 1..=a.len() + 1 {
            for k in 1..=a.len() + 1 {
                let s = generalized_concomitant(j, k, &w, &z, &c).unwrap();
                let r = generalized_concomitant_split(j, k, &w, &z, &c).unwrap();
                assert!(s.dist(&r) < 1e-12, "p = {} ({j},{k}): {s:?} vs {r:?}", a.len());
            }
        }
    }
}

#[test]
fn generalized_concomitant_reductions() {
    let c = pc(&P3);
    let one = tagged(1.0, 0.0, Side::Plus);
    let v = generalized_concomitant(1, 1, &one, &one, &c).unwrap();
    assert!(v.dist(&cx(1.0, 0.0)) < 1e-12);
    let w = tagged(0.9, 0.2, Side::Plus);
    for j in 1..=4 {
        for k in j + 1..=4 {
            let v = generalized_concomitant(j, k, &w, &w, &c).unwrap();
            assert!(v.abs().to_f64() < 1e-12);
        }
    }
}

#[test]
fn inverse_product_on_the_diagonal() {
    let c = pc(&P3);
    for (re, im) in [(0.8, 0.5), (2.1, -0.7)] {
        let w = tagged(re, im, if im > 0.0 { Side::Plus } else { Side::Minus });
        let m = inverse_product(&w, &w, &c).unwrap();
        assert!(m.sub(&CMat::identity(4, m.prec())).max_abs() < 1e-12);
    }
}

/// Σ_{t,s} α_t β_s z^{−t} w^{−s} (K(t) − K(−s))/(t + s) over the residues of F_k and F̂_j,
/// i.e. [w^{D} 𝔾^{−1}(w)𝔾(z) z^{−D}]_{jk} evaluated from the Mellin–Barnes double integral.
fn double_residue_oracle(c: &ParametrixContext, j: usize, k: usize, w: &SidedPoint, z: &SidedPoint) -> Cx {
    let prec = 320;
    let mut ef = c.expansion(Family::F, k, z.side, prec).unwrap();
    let mut eh = c.expansion(Family::FHat, j, w.side, prec).unwrap();
    let lz = ef.phase_applied(&z.log);
    let lw = eh.phase_applied(&w.log);
    let kpoly = |u: &Float| {
        let mut acc = Float::new(prec);
        for coef in c.k_coeffs.iter().rev() {
            acc = acc * u + coef;
        }
        acc
    };
    let kprime = |u: &Float| {
        let mut acc = Float::new(prec);
        for (n, coef) in c.k_coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u + Float::with_val(prec, coef * n as u32);
        }
        acc
    };
    let go_f = ef.growth_order();
    let go_h = eh.growth_order();
    let mut total = Cx::zero(prec);
    for ff in ef.families.iter_mut() {
        let tf = ff.terms(&lz.exp(), go_f);
        let bf = ff.exponent.clone();
        for fh in eh.families.iter_mut() {
            let th = fh.terms(&lw.exp(), go_h);
            let bh = fh.exponent.clone();
            let mut acc = Cx::zero(prec);
            for (n, a) in tf.iter().enumerate() {
                let t = -Float::with_val(prec, &bf + (n + ff.start()) as u32);
                for (m, b) in th.iter().enumerate() {
                    let s = -Float::with_val(prec, &bh + (m + fh.start()) as u32);
                    let den = Float::with_val(prec, &t + &s);
                    let dd = if den.clone().abs().to_f64() < 1e-30 {
                        kprime(&t)
                    } else {
                        (kpoly(&t) - kpoly(&Float::with_val(prec, -&s))) / den
                    };
                    acc += &(a * b).scale(&dd);
                }
            }
            total += &(&acc * &(&lz.scale(&bf).exp() * &lw.scale(&bh).exp()));
        }
    }
    &(&total * ef.prefactor()) * eh.prefactor()
}

#[test]
fn inverse_product_matches_double_residue_series() {
    let c = pc(&P3);
    let xi = 0.7;
    let eta = 1.1;
    let w = tagged(xi, 0.0, Side::Plus);
    let z = tagged(-eta, 0.0, Side::Plus);
    let m = inverse_product(&w, &z, &c).unwrap();
    let mut worst = 0.0f64;
    let mut sign_flip = 0.0f64;
    for j in 1..=4 {
        for k in 1..=4 {
            let o = double_residue_oracle(&c, j, k, &w, &z);
            let o = &(&w.pow(-c.d[j - 1]) * &o) * &z.pow(c.d[k - 1]);
            worst = worst.max(m.get(j - 1, k - 1).dist(&o));
            sign_flip = sign_flip.max((m.get(j - 1, k - 1) + &o).abs().to_f64());
        }
    }
    assert!(worst < 1e-10, "worst {worst:e}, with flipped sign {sign_flip:e}");
}

#[test]
fn jumps_on_the_positive_axis() {
    let c3 = pc(&P3);
    assert!(verify_jump(1, 0.6, &c3).unwrap() < 1e-12);
    assert!(verify_jump(2, 0.6, &c3).unwrap() < 1e-12);
    let c2 = pc(&[0.3, -0.1]);
    assert!(verify_jump(1, 2.0, &c2).unwrap() < 1e-12);
    // odd j: both sides coincide
    let z = cx(0.6, 0.0);
    for j in [1, 3] {
        let a = g_func(j, Side::Plus, &z, &c3).unwrap();
        let b = g_func(j, Side::Minus, &z, &c3).unwrap();
        assert!(a.dist(&b) == 0.0);
    }
}

#[test]
fn sector_assembly_and_ray_jumps() {
    for a in [&P3[..], &[0.3, -0.1], &[0.35]] {
        let c = pc(a);
        let z = cx(0.1, 1.0);
        let s = assemble_sector(&z, &c).unwrap();
        let g = cauchy_chain::parametrix::g_matrix(&SidedPoint::new(&z, None, 288).unwrap(), &c).unwrap();
        assert!(s.sub(&g).max_abs() == 0.0);
        for ray in Ray::ALL {
            let r = verify_ray_jump(ray, 0.9, &c).unwrap();
            assert!(r < 1e-12, "p = {}, {ray:?}: {r:e}", a.len());
        }
    }
    let c = pc(&P3);
    let on_ray = Cx::polar(&Float::with_val(256, 2), &Float::with_val(256, pi(256) / 4u32));
    assert!(assemble_sector(&on_ray, &c).is_err());
}

#[test]
fn even_layout_for_p_two() {
    // (0, π/4): 𝔾 · ([[1,0],[−ζ^{−a₁},1]] ⊕ 1)
    let c = pc(&[0.3, -0.1]);
    let z = cx(1.0, 0.2);
    let s = assemble_sector(&z, &c).unwrap();
    let at = SidedPoint::new(&z, None, 288).unwrap();
    let g = cauchy_chain::parametrix::g_matrix(&at, &c).unwrap();
    let x = at.pow(-0.3);
    for r in 0..3 {
        let expect0 = g.get(r, 0) - &(g.get(r, 1) * &x);
        assert!(s.get(r, 0).dist(&expect0) < 1e-60);
        assert!(s.get(r, 1).dist(g.get(r, 1)) < 1e-60);
        assert!(s.get(r, 2).dist(g.get(r, 2)) < 1e-60);
    }
}

#[test]
fn leading_asymptotics() {
    let c = pc(&P3);
    let e200 = verify_asymptotics(4, Side::Plus, &cx(200.0, 0.0), &c).unwrap();
    assert!(e200 < 3.0 * 200f64.powf(-0.25), "{e200}");
    let e3200 = verify_asymptotics(4, Side::Plus, &cx(3200.0, 0.0), &c).unwrap();
    let ratio = e3200 / e200;
    assert!(ratio > 0.25 && ratio < 1.0, "ratio {ratio}");
    // other entries and sides
    let z = Cx::polar(&Float::with_val(256, 400), &Float::with_val(256, -1.0));
    for j in 1..=4 {
        let e = verify_asymptotics(j, Side::Plus, &z, &c).unwrap();
        assert!(e < 3.0 * 400f64.powf(-0.25), "j = {j}: {e}");
    }
    let e = verify_asymptotics(2, Side::Minus, &z, &c).unwrap();
    assert!(e < 3.0 * 400f64.powf(-0.25), "minus side: {e}");
    let z = Cx::polar(&Float::with_val(256, 400), &Float::with_val(256, 1.2));
    for j in [1, 3] {
        let e = verify_asymptotics(j, Side::Plus, &z, &c).unwrap();
        assert!(e < 3.0 * 400f64.powf(-0.25), "j = {j} upper: {e}");
    }
}

#[test]
fn functional_relation_of_kernel_functions() {
    // F_j(s+1) = F_j(s)K(s), phase factor e^{iπσ_j s} included
    let c = pc(&P3);
    let ctx = PrecisionContext::default();
    let s = ctx.cx(0.4, 0.1);
    for j in 1..=4 {
        let spec = c.spec(Family::F, j, Side::Plus).unwrap();
        let big_f = |s: &Cx| {
            let th = Float::with_val(288, pi(288) * spec.phase);
            let mut v = (&ctx.cx(0.0, 1.0) * s).scale(&th).exp();
            for &b in spec.numerator() {
                let mut x = s.clone();
                x.re += b;
                v = &v * &gamma(&x, &ctx).unwrap();
            }
            for &b in spec.denominator() {
                let mut x = -s;
                x.re += 1u32;
                x.re -= b;
                v = &v / &gamma(&x, &ctx).unwrap();
            }
            v
        };
        let mut s1 = s.clone();
        s1.re += 1.0;
        let mut ks = ctx.zero();
        for coef in c.k_coeffs.iter().rev() {
            ks = &(&ks * &s) + &Cx::from_real(coef.clone());
        }
        let lhs = big_f(&s1);
        let rhs = &big_f(&s) * &ks;
        assert!(lhs.dist(&rhs) < 1e-50 * lhs.abs().to_f64().max(1.0), "j = {j}: {lhs:?} {rhs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn concomitant_delta_random_points(
        a1 in -0.4f64..0.8, a2 in -0.4f64..0.8,
        r in 0.2f64..4.0, th in 0.1f64..3.0, upper in any::<bool>(),
    ) {
        let c = pc(&[a1, a2]);
        let ctx = PrecisionContext::default();
        let th = if upper { th } else { -th };
        let z = Cx::polar(&ctx.real(r), &ctx.real(th));
        let side = if upper { Side::Plus } else { Side::Minus };
        for j in 1..=3 {
            for k in 1..=3 {
                let b = bilinear_concomitant(j, k, side, side, &z, &c).unwrap();
                let e = if j == k { 1.0 } else { 0.0 };
                prop_assert!(b.dist(&ctx.cx(e, 0.0)) < 1e-10);
            }
        }
    }

    #[test]
    fn monodromy_random_points(a1 in -0.4f64..0.8, a2 in -0.4f64..0.8, r in 0.2f64..3.0, th in -3.0f64..3.0) {
        let c = pc(&[a1, a2]);
        let ctx = PrecisionContext::default();
        let z = Cx::polar(&ctx.real(r), &ctx.real(th));
        for j in 2..=3 {
            prop_assert!(verify_monodromy(j, &z, &c).unwrap() < 1e-10);
        }
    }
}

#[test]
fn log_sheet_evaluation_is_consistent() {
    let c = pc(&P3);
    let z = cx(0.6, 0.3);
    let v = g_func(3, Side::Plus, &z, &c).unwrap();
    let w = g_func_log(3, Side::Plus, &z.ln(), &c).unwrap();
    assert!(v.dist(&w) < 1e-60, "{v:?} {w:?}");
}

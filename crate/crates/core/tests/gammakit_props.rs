use cauchy_chain::gammakit::{gamma, log_gamma, pi, Cx, PrecisionContext};
use proptest::prelude::*;

fn away_from_integers(re: f64, im: f64) -> bool {
    im.abs() > 0.05 || (re - re.round()).abs() > 0.05
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reflection(re in -8.0f64..8.0, im in -6.0f64..6.0) {
        prop_assume!(away_from_integers(re, im));
        let ctx = PrecisionContext::default();
        let z = ctx.cx(re, im);
        let g = gamma(&z, &ctx).unwrap();
        let g1 = gamma(&(&ctx.one() - &z), &ctx).unwrap();
        let lhs = &(&g * &g1) * &z.scale(&pi(256)).sin();
        let r = lhs.scale(&pi(256).recip());
        prop_assert!(r.dist(&ctx.one()) < ctx.tol());
    }

    #[test]
    fn recurrence(re in -10.0f64..25.0, im in -15.0f64..15.0) {
        prop_assume!(away_from_integers(re, im));
        let ctx = PrecisionContext::default();
        let z = ctx.cx(re, im);
        let mut z1 = z.clone();
        z1.re += 1u32;
        let lhs = gamma(&z1, &ctx).unwrap();
        let rhs = &z * &gamma(&z, &ctx).unwrap();
        prop_assert!(lhs.dist(&rhs) / rhs.abs().to_f64() < ctx.tol());
    }

    #[test]
    fn doubling_precision(re in -20.0f64..40.0, im in -30.0f64..30.0) {
        prop_assume!(away_from_integers(re, im));
        let c1 = PrecisionContext::default();
        let c2 = c1.doubled();
        let a = log_gamma(&Cx::new(256, re, im), &c1).unwrap();
        let b = log_gamma(&Cx::new(512, re, im), &c2).unwrap();
        prop_assert!(a.with_prec(512).dist(&b) < c1.tol());
    }
}

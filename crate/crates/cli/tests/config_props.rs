use cauchy_chain_cli::{ConfigError, GridSpec, RunConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, 1e-300f64..1e-200, Just(0.1), Just(1.0 / 3.0)]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6f64..1e3, Just(27.0 / 16.0)]
}

prop_compose! {
    fn config()(
        a in prop::collection::vec(finite(), 0..5),
        n in prop::collection::vec(1usize..64, 0..4),
        c0 in prop::option::of(positive()),
        bits in 64u32..1024,
        (lo, hi, count, log) in (positive(), positive(), 0usize..50, any::<bool>()),
        points in prop::collection::vec((positive(), positive()), 0..4),
        j in prop::option::of(1usize..5),
        ell in prop::option::of(1usize..5),
        beta in 0.0f64..1e3,
        q in 1usize..5,
        lambda in prop::collection::vec(1.0f64..1e3, 0..3),
        only in prop::collection::vec("[a-z_0-9]{1,12}", 0..3),
        output in "[A-Za-z0-9_./-]{1,20}",
        perturb in -0.5f64..0.5,
    ) -> RunConfig {
        RunConfig {
            p: a.len(),
            a,
            n,
            c0,
            precision_bits: bits,
            grid: GridSpec { lo, hi, count, log },
            points,
            j,
            ell,
            beta,
            q,
            lambda,
            only,
            output,
            perturb_c2: perturb,
        }
    }
}

proptest! {
    #[test]
    fn config_round_trips_through_text(c in config()) {
        let back = RunConfig::from_text(&c.to_text()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), c.to_text());
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn grids_have_the_requested_size_and_ends(lo in 1e-4f64..10.0, w in 0.0f64..10.0, count in 0usize..40, log in any::<bool>()) {
        let g = GridSpec { lo, hi: lo + w, count, log };
        let pts = g.points();
        prop_assert_eq!(pts.len(), count);
        if count >= 2 {
            prop_assert_eq!(pts[0], lo);
            prop_assert_eq!(pts[count - 1], lo + w);
            prop_assert!(pts.windows(2).all(|p| p[1] >= p[0]));
        }
    }
}

#[test]
fn defaults_are_valid() {
    RunConfig::default().validate().unwrap();
}

#[test]
fn comments_blank_lines_and_overrides() {
    let c = RunConfig::from_text("# a run\n\np = 2\na = 0.3, -0.1  # trailing\nc0 = 1.5\n").unwrap();
    assert_eq!(c.p, 2);
    assert_eq!(c.a, vec![0.3, -0.1]);
    assert_eq!(c.c0, Some(1.5));
    c.validate().unwrap();
}

#[test]
fn hash_ignores_the_output_path_only() {
    let a = RunConfig::default();
    let mut b = a.clone();
    b.output = "elsewhere.csv".into();
    assert_eq!(a.hash(), b.hash());
    b.precision_bits = 256;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn bad_configs_are_rejected() {
    assert!(matches!(RunConfig::from_text("nonsense"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(RunConfig::from_text("colour = red"), Err(ConfigError::UnknownKey(_))));
    assert!(matches!(RunConfig::from_text("a = 1,x"), Err(ConfigError::Value { .. })));
    assert!(matches!(RunConfig::from_text("grid = 1:2"), Err(ConfigError::Value { .. })));
    assert!(matches!(RunConfig::from_text("beta = inf"), Err(ConfigError::Value { .. })));
    for text in [
        "p = 2",
        "p = 2\na = 0.5,-1.5",
        "precision_bits = 16",
        "grid = -1:2:4",
        "c0 = -1",
        "j = 4",
        "points = 1:0",
        "n = 0,4",
        "beta = -1",
        "lambda = 0.5",
    ] {
        let c = RunConfig::from_text(text).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))), "{text}");
    }
    // a `#` would read back as a comment
    let mut c = RunConfig::default();
    c.set("output", "a#b").unwrap();
    assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
}

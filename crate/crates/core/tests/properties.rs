use approx::assert_relative_eq;
use gqarch::app::{run_experiment, ExperimentConfig, ExperimentSection, Target};
use gqarch::coeffs::{power_law_coeffs, CoefficientSeq};
use gqarch::estimate::FittedParams;
use gqarch::leverage::{classify_signs, solve_leverage, SignClass, DEFAULT_MAX_ITER};
use gqarch::models::{
    embed_asym_in_gqarch, sentana_inverse, sentana_map, AsymGarch11Spec, Garch11Spec, GqarchSpec, InnovationSpec,
    LarchSpec, ModelSpec,
};
use gqarch::moments::{garch11_fourth_via_sentana, garch11_moments};
use gqarch::simulate::{simulate, simulate_gqarch, SimConfig};
use gqarch::stats::{autocov, leverage_curve};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = CoefficientSeq> {
    prop_oneof![
        prop::collection::vec(-0.6f64..0.6, 1..6).prop_map(|v| CoefficientSeq::finite(v).unwrap()),
        (-0.3f64..0.3, 0.05f64..0.45, 50usize..400).prop_map(|(b, d, n)| power_law_coeffs(b, d, n).unwrap()),
    ]
}

fn gqarch_spec() -> impl Strategy<Value = GqarchSpec> {
    (-0.5f64..0.5, 0.01f64..0.5, coeffs(), 0.0f64..0.9)
        .prop_filter_map("needs B_2 / (1 - gamma) < 1", |(a, c, seq, g)| {
            (seq.b2() / (1.0 - g) < 1.0).then(|| GqarchSpec::new(a, c, seq, g).unwrap())
        })
}

fn asym_spec() -> impl Strategy<Value = AsymGarch11Spec> {
    (-0.5f64..0.5, -0.7f64..0.7, 0.01f64..0.5, 0.0f64..0.9).prop_filter_map("fourth moment", |(a, b, c, g)| {
        let b2 = b * b;
        (3.0 * b2 * b2 + 2.0 * b2 * g + g * g < 1.0).then(|| AsymGarch11Spec::new(a, b, c, g).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn volatility_never_below_floor(spec in gqarch_spec(), seed in any::<u64>()) {
        let cfg = SimConfig::new(1000, seed).with_burn_in(0);
        let traj = simulate_gqarch(&spec, &InnovationSpec::standard_normal(), &cfg).unwrap();
        let floor = spec.variance_floor();
        prop_assert_eq!(traj.len(), 1000);
        for (t, v) in traj.sigma_sq.iter().enumerate() {
            prop_assert!(*v >= floor, "t={} v={} floor={}", t, v, floor);
        }
    }

    #[test]
    fn fourth_moment_matches_sentana_form(spec in asym_spec()) {
        let m = garch11_moments(&spec, &InnovationSpec::standard_normal()).unwrap();
        assert_relative_eq!(m.m4_0, garch11_fourth_via_sentana(&spec, 3.0), max_relative = 1e-12);
    }

    #[test]
    fn sentana_inverse_recovers_spec(spec in asym_spec()) {
        prop_assume!(spec.b.abs() > 1e-6);
        let back = sentana_inverse(&sentana_map(&spec)).unwrap();
        let flip = if (back.b > 0.0) == (spec.b > 0.0) { 1.0 } else { -1.0 };
        assert_relative_eq!(back.a * flip, spec.a, epsilon = 1e-12);
        assert_relative_eq!(back.b * flip, spec.b, epsilon = 1e-12);
        assert_relative_eq!(back.c, spec.c, epsilon = 1e-9);
        prop_assert_eq!(back.gamma, spec.gamma);
    }

    #[test]
    fn model_spec_json_round_trip(spec in gqarch_spec(), g in asym_spec()) {
        let larch = LarchSpec::new(spec.a, spec.coeffs.clone()).unwrap();
        let garch = Garch11Spec::new(0.01 + spec.c, 0.1, 0.5).unwrap();
        for m in [
            ModelSpec::Gqarch(spec.clone()),
            ModelSpec::AsymGarch11(g),
            ModelSpec::Larch(larch),
            ModelSpec::Garch11(garch),
        ] {
            let text = serde_json::to_string(&m).unwrap();
            let back: ModelSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.fingerprint(), m.fingerprint());
            prop_assert_eq!(back, m);
        }
        let p = FittedParams::Gqarch { a: spec.a.abs(), c: spec.c, beta: 0.1, d: 0.3, gamma: spec.gamma };
        let back: FittedParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn autocov_is_shift_invariant(x in prop::collection::vec(-10.0f64..10.0, 200..400), shift in -50.0f64..50.0) {
        let a = autocov(&x, 10).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let b = autocov(&y, 10).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + a.values[0]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sign_conditions_fix_leverage_signs(
        a in 0.01f64..0.5,
        beta in 0.01f64..0.3,
        d in 0.05f64..0.45,
        gamma in 0.0f64..0.6,
        flip in any::<bool>(),
    ) {
        let seq = power_law_coeffs(-beta, d, 2000).unwrap();
        let spec = GqarchSpec::new(if flip { -a } else { a }, 0.1, if flip { seq.scaled(-1.0) } else { seq }, gamma).unwrap();
        prop_assume!(spec.b2_gamma() < 0.2);
        prop_assert_eq!(classify_signs(&spec, &InnovationSpec::standard_normal(), 20), SignClass::LeverageK);
        let sol = solve_leverage(&spec, 40, None, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(sol.h[..20].iter().all(|h| *h < 0.0), "{:?}", &sol.h[..20]);
        prop_assert!(sol.l2_norm() <= sol.norm_bound);
    }
}

#[test]
fn same_seed_same_path_and_replicates_differ() {
    let spec = ModelSpec::Gqarch(gqarch::models::fixtures::gqarch_q2(2000));
    let innov = InnovationSpec::standard_normal();
    let cfg = SimConfig::new(3000, 77).with_trunc(2000);
    let a = simulate(&spec, &innov, &cfg).unwrap();
    let b = simulate(&spec, &innov, &cfg).unwrap();
    assert_eq!(a.r, b.r);
    assert_eq!(a.sigma_sq, b.sigma_sq);
    let c = simulate(&spec, &innov, &cfg.with_replicate(1)).unwrap();
    assert_ne!(a.r, c.r);
}

#[test]
fn report_does_not_depend_on_thread_count() {
    let cfg = ExperimentConfig {
        model: ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap()),
        innovation: InnovationSpec::standard_normal(),
        simulation: SimConfig::new(5000, 3).with_burn_in(200),
        experiment: ExperimentSection {
            replicates: 6,
            targets: vec![Target::M2, Target::Rho, Target::Leverage],
            write_series: false,
            ..Default::default()
        },
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let mut rep = pool.install(|| run_experiment(&cfg)).unwrap();
        rep.metadata.runtime_secs = 0.0;
        serde_json::to_string(&rep).unwrap()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn embedded_garch_leverage_sample_sign() {
    let g = AsymGarch11Spec::new(0.1, -0.25, 0.2, 0.1).unwrap();
    let spec = ModelSpec::AsymGarch11(g);
    let traj = simulate(&spec, &InnovationSpec::standard_normal(), &SimConfig::new(200_000, 5)).unwrap();
    let h = leverage_curve(&traj.r, 3).unwrap();
    assert!(h.values[0] < 0.0);
    let sol = solve_leverage(&embed_asym_in_gqarch(&g), 10, None, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.h[0] < 0.0);
}

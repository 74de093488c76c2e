mod common;

use std::sync::Arc;

use proptest::prelude::*;

use shadow_rds::green::{green_bound, Window, WindowSequence};
use shadow_rds::harness::config::Config;
use shadow_rds::harness::runner::{shadow_run, ORBIT_TOL};
use shadow_rds::harness::scenarios::{build_scenario, load_scenario, uniform_rescale, ScenarioParams, WeightFamily};
use shadow_rds::linalg::Vector;
use shadow_rds::shadowing::{make_weight, shadow_constant, ShadowingProblem, UniquenessOutcome, WeightKind};
use shadow_rds::Error;

fn shadow_cfg(name: &str, seed: u64, window: i64) -> Config {
    Config::parse(&format!("scenario = \"{name}\"\nkind = \"shadow\"\nseed = {seed}\nwindow = {window}")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificates_hold_for_admissible_perturbations(
        c in 0.0f64..0.15,
        seed in 0u64..1000,
        half in 4i64..40,
        exp_weight in any::<bool>(),
    ) {
        let mut sc = load_scenario("uniform-diag", &ScenarioParams { c: Some(c), seed, ..Default::default() }).unwrap();
        if exp_weight {
            sc.epsilon = sc.lambda() * 0.75;
            sc.weight = WeightFamily::Exponential;
        }
        // skip the corner where the constant exceeds one
        prop_assume!(sc.shadow_constants().is_ok());
        let (prob, res) = shadow_run(&sc, &shadow_cfg("uniform-diag", seed, half)).unwrap();
        prop_assert!(res.pseudo_orbit_ok);
        prop_assert!(res.shadow_bound_holds());
        prop_assert!(res.ball_holds());
        prop_assert!(res.fixed_point_holds());
        prop_assert!(res.orbit_residual <= ORBIT_TOL);
        prop_assert!(res.iterations <= res.iteration_budget());
        prop_assert!((res.l - prob.l()).abs() == 0.0);
    }

    #[test]
    fn constants_match_closed_form(lambda in 0.1f64..3.0, frac in 0.05f64..1.0, c in 0.0f64..0.2) {
        let eps = lambda * frac;
        let b = (1.0 + (-eps).exp()) / (1.0 - (-eps).exp());
        let q = 2.0 * c * (lambda - eps).exp() * b;
        match shadow_constant(lambda, eps, c) {
            Ok((l, q_got)) => {
                prop_assert!(q < 1.0);
                prop_assert!((q_got - q).abs() <= 1e-12 * q.max(1.0));
                prop_assert!((l - b / (1.0 - q)).abs() <= 1e-9 * l);
                prop_assert!(l >= green_bound(eps));
            }
            Err(Error::ContractionViolated { .. }) => prop_assert!(q >= 1.0),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn rescale_keeps_admissibility(a in 0.0f64..1.0, k in 0.01f64..10.0, half in 1i64..30) {
        let w = Window::symmetric(half).unwrap();
        let delta = make_weight(WeightKind::Exponential(a), w).unwrap();
        let s = uniform_rescale(&delta, k).unwrap();
        prop_assert_eq!(s.r(), delta.r());
        prop_assert!(s.check_admissible(delta.r()).is_ok());
        for n in w.indices() {
            prop_assert!((s.at(n) - 2.0 * k * delta.at(n)).abs() <= 1e-12 * s.at(n));
        }
    }

    #[test]
    fn exact_orbits_are_their_own_shadow(seed in any::<u64>(), half in 3i64..20) {
        let sc = load_scenario("uniform-rot-coupled", &ScenarioParams { seed: 1, ..Default::default() }).unwrap();
        let window = Window::symmetric(half).unwrap();
        let ctx = sc.context(window).unwrap();
        let mut rng = common::rng(seed);
        let x0 = common::random_sequence(Window::symmetric(1).unwrap(), 2, &mut rng).get(0).scale(1e-3);
        let y = common::exact_orbit(&ctx, &sc.pert, &x0);
        let delta = sc.weight_on(window).unwrap();
        let prob = ShadowingProblem::new(ctx, sc.pert.clone(), y.clone(), delta, sc.epsilon).unwrap();
        prop_assume!(y.sup_norm() < 1e3);
        // y is already an orbit, so the unique nearby orbit is y itself
        let res = prob.solve(1e-12, 500).unwrap();
        prop_assert!(res.x.sub(&y).unwrap().sup_norm() <= 1e-8 * (1.0 + y.sup_norm()));
    }
}

#[test]
fn zero_perturbation_gives_l_equal_three() {
    let sc = load_scenario("uniform-diag", &ScenarioParams { c: Some(0.0), seed: 1, ..Default::default() }).unwrap();
    let (_, res) = shadow_run(&sc, &shadow_cfg("uniform-diag", 1, 32)).unwrap();
    assert!((res.l - 3.0).abs() < 1e-15);
    assert_eq!(res.q, 0.0);
    assert_eq!(res.iterations, 1);
    assert!(res.max_scaled_deviation() <= 3.0);
}

#[test]
fn too_large_perturbation_is_rejected() {
    let sc = build_scenario("uniform-diag", &ScenarioParams { c: Some(0.2), seed: 1, ..Default::default() }).unwrap();
    assert!(matches!(sc.shadow_constants(), Err(Error::ContractionViolated { .. })));
    assert!(matches!(
        load_scenario("uniform-diag", &ScenarioParams { c: Some(0.2), seed: 1, ..Default::default() }),
        Err(Error::SelfTest(_))
    ));
}

#[test]
fn uniqueness_rejects_non_orbits_and_accepts_identical() {
    let sc = load_scenario("uniform-diag", &ScenarioParams { seed: 1, ..Default::default() }).unwrap();
    let window = Window::symmetric(8).unwrap();
    let ctx = sc.context(window).unwrap();
    let delta = sc.weight_on(window).unwrap();
    let x = common::exact_orbit(&ctx, &sc.pert, &Vector::from_vec(vec![0.01, -0.02]));
    let prob = ShadowingProblem::new(Arc::clone(&ctx), sc.pert.clone(), x.clone(), delta, sc.epsilon).unwrap();
    let (l, _) = sc.shadow_constants().unwrap();
    assert!(matches!(prob.check_uniqueness(&x, &x, l, 1e-8).unwrap(), UniquenessOutcome::Identical { .. }));
    let garbage = WindowSequence::from_fn(window, |n| Vector::from_element(2, n as f64));
    assert!(matches!(prob.check_uniqueness(&x, &garbage, l, 1e-8), Err(Error::NotAnOrbit { .. })));
}

#[test]
fn inadmissible_weight_is_rejected_by_the_problem() {
    let sc = load_scenario("uniform-diag", &ScenarioParams { seed: 1, ..Default::default() }).unwrap();
    let window = Window::symmetric(6).unwrap();
    let ctx = sc.context(window).unwrap();
    // polynomial weight needs e^{λ−ε} >= 2, impossible at ε = λ
    let delta = make_weight(WeightKind::Polynomial, window).unwrap();
    let y = WindowSequence::zeros(window, 2);
    assert!(matches!(
        ShadowingProblem::new(ctx, sc.pert.clone(), y, delta, sc.epsilon),
        Err(Error::Inadmissible { .. })
    ));
}

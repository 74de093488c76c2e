mod common;

use proptest::prelude::*;

use shadow_rds::green::{green_bound, Window};
use shadow_rds::harness::scenarios::{load_scenario, ScenarioParams, SCENARIO_NAMES};
use shadow_rds::linalg::Vector;
use shadow_rds::shadowing::{make_weight, WeightKind};

fn systems() -> Vec<(shadow_rds::cocycle::CocycleSystem, shadow_rds::cocycle::DichotomyData, shadow_rds::driving::BasePoint)> {
    let mut out: Vec<_> = SCENARIO_NAMES
        .iter()
        .map(|n| {
            let sc = load_scenario(n, &ScenarioParams { seed: 4, ..Default::default() }).unwrap();
            (sc.sys, sc.dich, sc.omega)
        })
        .collect();
    out.push(common::four_dim());
    out.push(common::scalar_fast());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_apply_matches_dense_solve(lo in -30i64..=0, hi in 0i64..=30, which in 0usize..6, seed in any::<u64>()) {
        let (sys, dich, omega) = systems().swap_remove(which);
        let window = Window::new(lo, hi).unwrap();
        let ctx = common::context(&sys, &dich, &omega, window);
        let oracle = common::DenseGreen::new(&sys, &dich, &omega, window);
        let z = common::random_sequence(window, sys.dim(), &mut common::rng(seed));
        let w = ctx.green_apply(&z).unwrap();
        prop_assert!(common::relative_sup_diff(&w, &oracle.solve(&z)) <= 1e-10);
    }

    #[test]
    fn green_apply_is_linear(which in 0usize..6, a in -3.0f64..3.0, seed in any::<u64>()) {
        let (sys, dich, omega) = systems().swap_remove(which);
        let window = Window::symmetric(10).unwrap();
        let ctx = common::context(&sys, &dich, &omega, window);
        let mut rng = common::rng(seed);
        let z1 = common::random_sequence(window, sys.dim(), &mut rng);
        let z2 = common::random_sequence(window, sys.dim(), &mut rng);
        let lhs = ctx.green_apply(&z1.scale(a).add(&z2).unwrap()).unwrap();
        let rhs = ctx.green_apply(&z1).unwrap().scale(a).add(&ctx.green_apply(&z2).unwrap()).unwrap();
        prop_assert!(common::relative_sup_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn residual_vanishes_with_edge_conditions(which in 0usize..6, seed in any::<u64>()) {
        let (sys, dich, omega) = systems().swap_remove(which);
        let window = Window::new(-20, 12).unwrap();
        let ctx = common::context(&sys, &dich, &omega, window);
        let z = common::random_sequence(window, sys.dim(), &mut common::rng(seed));
        let r = ctx.green_residual(&z, &ctx.green_apply(&z).unwrap()).unwrap();
        prop_assert!(r.relative() <= 1e-10);
        prop_assert!(r.left_edge <= 1e-10 && r.right_edge <= 1e-10);
    }

    #[test]
    fn bound_formula_decreases_in_epsilon(e1 in 0.01f64..3.0, e2 in 0.01f64..3.0) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(green_bound(lo) >= green_bound(hi));
        // 1 + 2/(e^ε − 1), written independently
        prop_assert!((green_bound(e1) - (1.0 + 2.0 / e1.exp_m1())).abs() <= 1e-9 * green_bound(e1));
    }
}

#[test]
fn impulse_response_of_a_stable_scalar() {
    let (sys, dich, omega) = common::scalar_fast();
    let window = Window::symmetric(8).unwrap();
    let ctx = common::context(&sys, &dich, &omega, window);
    let z = shadow_rds::green::WindowSequence::from_fn(window, |n| Vector::from_element(1, if n == -3 { 1.0 } else { 0.0 }));
    let w = ctx.green_apply(&z).unwrap();
    for n in window.indices() {
        let expected = if n >= -3 { 0.2f64.powi((n + 3) as i32) } else { 0.0 };
        assert!((w.get(n)[0] - expected).abs() < 1e-15, "n = {n}");
    }
}

#[test]
fn polynomial_weight_bound_on_fast_scalar() {
    let (sys, dich, omega) = common::scalar_fast();
    let window = Window::symmetric(30).unwrap();
    let ctx = common::context(&sys, &dich, &omega, window);
    let delta = make_weight(WeightKind::Polynomial, window).unwrap();
    let rep = ctx.green_norm_bound_check(&delta, 2f64.ln(), 60, 1).unwrap();
    assert!(rep.holds, "{rep:?}");
    assert!((rep.bound - 3.0).abs() < 1e-15);
    // the same weight is not admissible once e^{λ−ε} < 2
    assert!(ctx.green_norm_bound_check(&delta, 1.0, 5, 1).is_err());
}

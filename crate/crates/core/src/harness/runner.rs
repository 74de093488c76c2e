//! Runs one configured experiment and writes its outputs.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::green::Window;
use crate::harness::config::{Config, ExperimentKind};
use crate::harness::output::{self, LyapunovRow};
use crate::harness::scenarios::{load_scenario, Scenario, WeightFamily, SCENARIO_NAMES};
use crate::linalg::Vector;
use crate::lyapunov::{conservation_experiment, lyapunov_report, mean_log_det, ConservationSetup, Direction};
use crate::shadowing::{measure_contraction, ShadowingProblem, ShadowingResult};

/// Interior orbit residual accepted by the shadowing certificate.
pub const ORBIT_TOL: f64 = 1e-8;
pub const SUM_RULE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub pass: bool,
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

/// Whether an error comes from the invocation rather than the experiment.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::UnknownScenario(_) | Error::Config(_))
}

fn prepare(cfg: &Config, name: &str) -> Result<Scenario> {
    let mut sc = load_scenario(name, &cfg.scenario_params())?;
    if let Some(eps) = cfg.epsilon {
        sc.epsilon = eps;
    }
    if let Some(w) = &cfg.weight {
        sc.weight = WeightFamily::parse(w)?;
    }
    Ok(sc)
}

pub fn run_experiment(cfg: &Config) -> Result<RunOutcome> {
    if cfg.kind != ExperimentKind::Invariants && !SCENARIO_NAMES.contains(&cfg.scenario.as_str()) {
        return Err(Error::UnknownScenario(cfg.scenario.clone()));
    }
    match cfg.kind {
        ExperimentKind::Shadow => run_shadow(cfg),
        ExperimentKind::Lyapunov => run_lyapunov(cfg),
        ExperimentKind::Conservation => run_conservation(cfg),
        ExperimentKind::Invariants => run_invariants(cfg),
    }
}

/// Solves the shadowing problem for the scenario's jittered pseudo-orbit.
pub fn shadow_run(sc: &Scenario, cfg: &Config) -> Result<(ShadowingProblem, ShadowingResult)> {
    let window = Window::symmetric(cfg.window)?;
    let ctx = sc.context(window)?;
    let delta = sc.weight_on(window)?;
    let y = sc.pseudo_orbit(&ctx, &delta, cfg.noise, cfg.seed, cfg.tol, cfg.max_iter)?;
    let prob = ShadowingProblem::new(ctx, sc.pert.clone(), y, delta, sc.epsilon)?;
    let res = prob.solve(cfg.tol, cfg.max_iter)?;
    Ok((prob, res))
}

fn shadow_failures(res: &ShadowingResult) -> Vec<String> {
    let mut f = Vec::new();
    for d in res.deviations.iter().filter(|d| !d.pass) {
        f.push(format!("n = {}: |x - y| = {:.6e} > L·δ = {:.6e}", d.n, d.deviation, d.bound));
    }
    for d in res.defects.iter().filter(|d| !d.ok) {
        f.push(format!("n = {}: defect {:.6e} exceeds budget {:.6e}", d.n, d.norm, d.budget));
    }
    if !res.ball_holds() {
        f.push(format!("iterate left the ball: {:.12} > L = {:.12}", res.max_iterate_norm, res.l));
    }
    if !res.fixed_point_holds() {
        f.push(format!("fixed-point residual {:.3e} > 2·tol", res.fixed_point_residual));
    }
    if res.orbit_residual > ORBIT_TOL {
        f.push(format!("orbit residual {:.3e} at n = {}", res.orbit_residual, res.orbit_residual_index));
    }
    if res.iterations > res.iteration_budget() {
        f.push(format!("{} iterations exceed the budget {}", res.iterations, res.iteration_budget()));
    }
    f
}

fn shadow_summary(sc: &Scenario, res: &ShadowingResult) -> Value {
    json!({
        "L": res.l,
        "q": res.q,
        "epsilon": sc.epsilon,
        "weight": sc.weight.label(),
        "iterations": res.iterations,
        "iteration_budget": res.iteration_budget(),
        "final_step_norm": res.final_step_norm,
        "fixed_point_residual": res.fixed_point_residual,
        "orbit_residual": res.orbit_residual,
        "max_iterate_norm": res.max_iterate_norm,
        "max_scaled_deviation": res.max_scaled_deviation(),
        "pseudo_orbit_ok": res.pseudo_orbit_ok,
    })
}

fn run_shadow(cfg: &Config) -> Result<RunOutcome> {
    let sc = prepare(cfg, &cfg.scenario)?;
    let (_, res) = shadow_run(&sc, cfg)?;
    let failures = shadow_failures(&res);
    let dir = &cfg.output_dir;
    let files = vec![output::output_path(dir, "shadow.csv"), output::output_path(dir, "iterations.csv")];
    output::write_shadow_csv(&files[0], &res)?;
    output::write_iterations_csv(&files[1], &res.trace)?;
    finish(cfg, &sc, shadow_summary(&sc, &res), failures, files)
}

fn random_points(d: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))).collect()
}

fn run_lyapunov(cfg: &Config) -> Result<RunOutcome> {
    let sc = prepare(cfg, &cfg.scenario)?;
    let points = random_points(sc.sys.dim(), cfg.samples, cfg.seed);
    let rep = lyapunov_report(&sc.sys, &sc.pert, &sc.omega, &points, cfg.steps)?;
    let sum_rule = (rep.linear_exponents.iter().sum::<f64>() - mean_log_det(&sc.sys, &sc.omega, cfg.steps)?).abs();
    let mut failures = Vec::new();
    if sum_rule > SUM_RULE_TOL {
        failures.push(format!("QR exponents violate the determinant sum rule by {sum_rule:.3e}"));
    }
    if rep.linear_exponents.contains(&0.0) {
        failures.push("zero linear exponent despite a declared dichotomy".into());
    }
    let mut rows = Vec::new();
    for r in &rep.records {
        for est in [&r.lambda_plus, &r.lambda_minus] {
            if !est.settled {
                failures.push(format!("orbit {} {} exponent not settled: tail spread {:.4}", r.id, est.direction.label(), est.value - est.tail_min));
            }
            rows.push(LyapunovRow::new(r.id.to_string(), est.direction, est.steps, est.value, est.residual));
        }
    }
    let path = output::output_path(&cfg.output_dir, "lyapunov.csv");
    output::write_lyapunov_csv(&path, &rows)?;
    let summary = json!({
        "linear_exponents": rep.linear_exponents,
        "sum_rule_error": sum_rule,
        "N": cfg.steps,
        "orbits": rep.records.iter().map(|r| json!({
            "id": r.id, "x": r.x,
            "lambda_plus": r.lambda_plus.value, "lambda_minus": r.lambda_minus.value,
        })).collect::<Vec<_>>(),
    });
    finish(cfg, &sc, summary, failures, vec![path])
}

fn run_conservation(cfg: &Config) -> Result<RunOutcome> {
    let sc = prepare(cfg, &cfg.scenario)?;
    let window = Window::symmetric(cfg.window)?;
    let setup = ConservationSetup {
        ctx: sc.context(window)?,
        pert: sc.pert.clone(),
        delta: sc.weight_on(window)?,
        epsilon: sc.epsilon,
        steps: cfg.steps,
        samples: cfg.samples,
        tolerance: cfg.exponent_tol,
        solver_tol: cfg.tol,
        max_iter: cfg.max_iter,
        seed: cfg.seed,
    };
    let rep = conservation_experiment(&setup)?;
    let mut failures = Vec::new();
    if rep.sum_rule_error > SUM_RULE_TOL {
        failures.push(format!("sum rule error {:.3e}", rep.sum_rule_error));
    }
    if !rep.special_orbit_bound_holds {
        failures.push("orbit through p leaves the L·δ/2 tube".into());
    }
    for r in rep.forward.iter().filter(|r| !r.pass) {
        failures.push(format!("forward: exponent {:.6} observed as {:.6}", r.linear, r.observed.value));
    }
    for r in rep.converse.iter().filter(|r| !r.pass) {
        failures.push(format!("converse: x = {:?} has λ⁺ = {:.6}, λ⁻ = {:.6}, no match", r.x, r.lambda_plus, r.lambda_minus));
    }
    let mut rows = Vec::new();
    for r in &rep.forward {
        rows.push(LyapunovRow::new(format!("shadow-{}", r.index), r.checked, cfg.steps, r.observed.value, r.observed.residual));
    }
    for r in &rep.converse {
        rows.push(LyapunovRow::new(r.id.to_string(), Direction::Forward, cfg.steps, r.lambda_plus, 0.0));
        rows.push(LyapunovRow::new(r.id.to_string(), Direction::Backward, cfg.steps, r.lambda_minus, 0.0));
    }
    let files = vec![
        output::output_path(&cfg.output_dir, "lyapunov.csv"),
        output::output_path(&cfg.output_dir, "conservation.csv"),
    ];
    output::write_lyapunov_csv(&files[0], &rows)?;
    output::write_conservation_csv(&files[1], &rep)?;
    let summary = serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?;
    finish(cfg, &sc, summary, failures, files)
}

/// Self-test plus solver-level invariants: contraction of `T`, `‖S(0)‖ <= 1`
/// and the full shadowing certificate.
pub fn invariant_checks(sc: &Scenario, cfg: &Config) -> Result<Vec<(String, bool, String)>> {
    let mut out: Vec<(String, bool, String)> = sc
        .self_test()?
        .checks
        .into_iter()
        .map(|c| (c.name, c.pass, c.detail))
        .collect();
    let (prob, res) = shadow_run(sc, cfg)?;
    let fails = shadow_failures(&res);
    out.push(("shadow-certificate".into(), fails.is_empty(), if fails.is_empty() {
        format!("{} iterations, max |x-y|/δ = {:.6} <= L = {:.6}", res.iterations, res.max_scaled_deviation(), res.l)
    } else {
        fails.join("; ")
    }));
    let s0 = prob.weighted_norm(&prob.apply_s(&crate::green::WindowSequence::zeros(prob.window(), sc.sys.dim()))?)?;
    out.push(("s-at-zero".into(), s0 <= 1.0 + 1e-12, format!("‖S(0)‖ = {s0:.6}")));
    let ratio = measure_contraction(&prob, 50, cfg.seed)?;
    out.push(("t-contraction".into(), ratio <= prob.q() + 1e-9, format!("measured {ratio:.6} vs q = {:.6}", prob.q())));
    Ok(out)
}

fn run_invariants(cfg: &Config) -> Result<RunOutcome> {
    let names: Vec<&str> = if cfg.scenario == "all" {
        SCENARIO_NAMES.to_vec()
    } else if SCENARIO_NAMES.contains(&cfg.scenario.as_str()) {
        vec![cfg.scenario.as_str()]
    } else {
        return Err(Error::UnknownScenario(cfg.scenario.clone()));
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for name in &names {
        let checks = match prepare(cfg, name) {
            Ok(sc) => invariant_checks(&sc, cfg)?,
            Err(Error::SelfTest(msg)) => vec![("self-test".to_string(), false, msg)],
            Err(e) => return Err(e),
        };
        for (check, pass, detail) in checks {
            if !pass {
                failures.push(format!("{name}/{check}: {detail}"));
            }
            rows.push((name.to_string(), check, pass, detail));
        }
    }
    let path = output::output_path(&cfg.output_dir, "invariants.csv");
    output::write_checks_csv(&path, &rows)?;
    let summary = json!({
        "scenarios": names,
        "checks": rows.iter().map(|(s, c, p, d)| json!({"scenario": s, "check": c, "pass": p, "detail": d})).collect::<Vec<_>>(),
    });
    let pass = failures.is_empty();
    let mut files = vec![path];
    let summary_path = output::output_path(&cfg.output_dir, "summary.json");
    output::write_summary(&summary_path, &json!({
        "scenario": cfg.scenario, "kind": cfg.kind.label(), "seed": cfg.seed,
        "pass": pass, "failures": failures, "results": summary,
    }))?;
    files.push(summary_path);
    Ok(RunOutcome { pass, failures, files, summary })
}

fn finish(cfg: &Config, sc: &Scenario, results: Value, failures: Vec<String>, mut files: Vec<PathBuf>) -> Result<RunOutcome> {
    let pass = failures.is_empty();
    let summary_path = output::output_path(&cfg.output_dir, "summary.json");
    output::write_summary(&summary_path, &json!({
        "scenario": sc.name,
        "kind": cfg.kind.label(),
        "seed": cfg.seed,
        "notes": sc.notes,
        "pass": pass,
        "failures": failures,
        "results": results,
    }))?;
    files.push(summary_path);
    Ok(RunOutcome { pass, failures, files, summary: results })
}

/// Shared context helper for callers that want to build problems directly.
pub fn scenario_context(sc: &Scenario, half: i64) -> Result<Arc<crate::green::WindowContext>> {
    sc.context(Window::symmetric(half)?)
}

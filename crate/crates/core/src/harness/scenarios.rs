//! Built-in scenarios and their self-tests.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::dmatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cocycle::{
    build_envelope, check_contraction_lemma, check_dichotomy, check_norm_equivalence, CocycleSystem,
    DichotomyData, NormSettings, TemperedEnvelope,
};
use crate::driving::{BasePoint, DrivingSystem, Turn};
use crate::error::{Error, Result};
use crate::green::{WeightSequence, Window, WindowContext, WindowSequence};
use crate::linalg::{self, Mat, Vector};
use crate::shadowing::{make_weight, shadow_constant, Perturbation, ShadowingProblem, WeightKind};

pub const SCENARIO_NAMES: [&str; 4] = ["uniform-diag", "uniform-rot-coupled", "nonuniform-layered", "remark-scalar"];

pub const DEFAULT_HORIZON: usize = 60;
pub const ENVELOPE_HORIZON: usize = 200;
pub const COVERAGE_STEPS: usize = 200;
pub const COVERAGE_MIN: f64 = 0.99;

/// Knobs a config file may override. `None` means the scenario default.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScenarioParams {
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub t_quantile: Option<f64>,
    pub horizon: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum WeightFamily {
    Constant(f64),
    /// `e^{(λ−ε)|n|}`.
    Exponential,
    /// `|n| + 1`.
    Polynomial,
}

impl WeightFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(WeightFamily::Constant(1.0)),
            "exponential" => Ok(WeightFamily::Exponential),
            "polynomial" => Ok(WeightFamily::Polynomial),
            other => Err(Error::Config(format!("unknown weight family '{other}'"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightFamily::Constant(_) => "constant",
            WeightFamily::Exponential => "exponential",
            WeightFamily::Polynomial => "polynomial",
        }
    }

    pub fn build(&self, window: Window, lambda: f64, epsilon: f64) -> Result<WeightSequence> {
        match *self {
            WeightFamily::Constant(t) => make_weight(WeightKind::Constant(t), window),
            WeightFamily::Exponential => make_weight(WeightKind::Exponential(lambda - epsilon), window),
            WeightFamily::Polynomial => make_weight(WeightKind::Polynomial, window),
        }
    }
}

/// `n ↦ 2K δ(n)`, same admissibility constant.
pub fn uniform_rescale(delta: &WeightSequence, k: f64) -> Result<WeightSequence> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("K must be positive, got {k}")));
    }
    delta.scaled(2.0 * k)
}

/// Level sets `Ω_T^n` of the first time an orbit enters `{D_ρ <= T}`.
#[derive(Clone)]
pub struct NonuniformLayering {
    pub rho: f64,
    pub t_level: f64,
    /// Largest hitting index searched; beyond it the perturbation vanishes.
    pub cap: usize,
    pub envelope: TemperedEnvelope,
    base: DrivingSystem,
}

impl fmt::Debug for NonuniformLayering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonuniformLayering")
            .field("rho", &self.rho)
            .field("t_level", &self.t_level)
            .field("cap", &self.cap)
            .finish_non_exhaustive()
    }
}

impl NonuniformLayering {
    pub fn in_good_set(&self, omega: &BasePoint) -> Result<bool> {
        Ok(self.envelope.value(omega)? <= self.t_level)
    }

    /// Smallest `n >= 0` with `σ^n ω ∈ Ω'_T`, i.e. `ω ∈ Ω_T^n`.
    pub fn hitting_index(&self, omega: &BasePoint) -> Result<Option<usize>> {
        for n in 0..=self.cap {
            if self.in_good_set(&self.base.step(omega, n as i64)?)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// `e^{-ρ|n−1|}/T` on `Ω_T^n`, zero if no hit within the cap.
    pub fn layer_factor(&self, omega: &BasePoint) -> Result<f64> {
        Ok(match self.hitting_index(omega)? {
            Some(n) => (-self.rho * (n as f64 - 1.0).abs()).exp() / self.t_level,
            None => 0.0,
        })
    }

    /// Fraction of `samples` independent points whose orbit enters `Ω'_T`
    /// within `steps` steps.
    pub fn coverage(&self, steps: usize, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0;
        for _ in 0..samples {
            let w = BasePoint::shift(rng.gen(), 0);
            for n in 0..=steps {
                if self.in_good_set(&self.base.step(&w, n as i64)?)? {
                    hits += 1;
                    break;
                }
            }
        }
        Ok(hits as f64 / samples as f64)
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub notes: String,
    pub sys: CocycleSystem,
    pub dich: DichotomyData,
    pub pert: Perturbation,
    pub weight: WeightFamily,
    pub epsilon: f64,
    pub omega: BasePoint,
    pub settings: NormSettings,
    pub c: f64,
    pub layering: Option<Arc<NonuniformLayering>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.to_string(), pass, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub scenario: String,
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn rot(angle: f64) -> Mat {
    let (s, c) = (2.0 * PI * angle).sin_cos();
    dmatrix![c, -s; s, c]
}

/// `x ↦ scale · sin(x_i + phase)` componentwise: 1-Lipschitz up to `scale`,
/// bounded by `scale·√d`.
fn sine(x: &Vector, scale: f64, phase: f64) -> Vector {
    x.map(|v| scale * (v + phase).sin())
}

fn rotation_point(seed: u64) -> BasePoint {
    BasePoint::Rotation(Turn::from_raw(ChaCha8Rng::seed_from_u64(seed).gen()))
}

fn uniform_diag(params: &ScenarioParams) -> Result<Scenario> {
    let base = DrivingSystem::default_rotation();
    let c = params.c.unwrap_or(0.05);
    let ln2 = 2f64.ln();
    let sys = CocycleSystem::constant(base.clone(), dmatrix![0.5, 0.0; 0.0, 2.0]);
    // diag(1/2, 2) sits exactly at rate log 2, so there is no strictness margin
    let dich = DichotomyData::uniform(ln2, 0.0, dmatrix![1.0, 0.0; 0.0, 0.0], 1.0)?;
    let pert = if c == 0.0 {
        Perturbation::zero()
    } else {
        let b = base.clone();
        Perturbation::new(c, move |w, x| sine(x, c, 2.0 * PI * b.unit_at(w, 0)), move |_| c)?
            .with_sup_bound(c * 2f64.sqrt())
    };
    Ok(Scenario {
        name: "uniform-diag".into(),
        notes: "diag(1/2, 2) over an irrational rotation, K = 1, rate log 2, sine perturbation".into(),
        sys,
        dich,
        pert,
        weight: WeightFamily::Constant(1.0),
        epsilon: ln2,
        omega: rotation_point(params.seed),
        settings: NormSettings::new(params.horizon.unwrap_or(DEFAULT_HORIZON)).allowing_zero_margin(),
        c,
        layering: None,
    })
}

fn uniform_rot_coupled(params: &ScenarioParams) -> Result<Scenario> {
    let base = DrivingSystem::default_rotation();
    let c = params.c.unwrap_or(0.05);
    let b = base.clone();
    let sys = CocycleSystem::new(2, base.clone(), move |w| {
        let next = b.step(w, 1).expect("rotation step");
        rot(b.unit_at(&next, 0)) * dmatrix![0.4, 0.0; 0.0, 2.5] * rot(b.unit_at(w, 0)).transpose()
    });
    let b = base.clone();
    let dich = DichotomyData::new(
        2f64.ln(),
        1.25f64.ln(),
        move |w| {
            let r = rot(b.unit_at(w, 0));
            &r * dmatrix![1.0, 0.0; 0.0, 0.0] * r.transpose()
        },
        |_| 1.0,
    )?
    .with_bound_sup(1.0);
    let pert = if c == 0.0 {
        Perturbation::zero()
    } else {
        let b = base.clone();
        Perturbation::new(c, move |w, x| sine(x, c, 2.0 * PI * b.unit_at(w, 0) + 1.0), move |_| c)?
            .with_sup_bound(c * 2f64.sqrt())
    };
    Ok(Scenario {
        name: "uniform-rot-coupled".into(),
        notes: "R(θ(σω))·diag(0.4, 2.5)·R(θ(ω))ᵀ over a rotation: moving splitting, exponents ±log 2.5".into(),
        sys,
        dich,
        pert,
        weight: WeightFamily::Constant(1.0),
        epsilon: 2f64.ln(),
        omega: rotation_point(params.seed),
        settings: NormSettings::new(params.horizon.unwrap_or(DEFAULT_HORIZON)),
        c,
        layering: None,
    })
}

const SHEARS: [f64; 3] = [0.0, 1.5, 3.0];
const SYMBOL_WEIGHTS: [f64; 3] = [0.5, 0.3, 0.2];
const T_LEVEL_SAMPLES: usize = 1000;
const T_LEVEL_SEED: u64 = 0x7_1e7e1;

fn shear(h: f64) -> Mat {
    dmatrix![1.0, h; 0.0, 1.0]
}

fn nonuniform_layered(params: &ScenarioParams) -> Result<Scenario> {
    let base = DrivingSystem::bernoulli(SYMBOL_WEIGHTS.to_vec())?;
    let c = params.c.unwrap_or(0.02);
    let rho = params.rho.unwrap_or(0.1);
    let quantile = params.t_quantile.unwrap_or(0.7);
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::InvalidArgument(format!("T quantile must lie in (0, 1], got {quantile}")));
    }
    let inv_norms: Vec<f64> = SHEARS.iter().map(|&h| linalg::op_norm(&shear(-h))).collect();
    let big_m = SHEARS.iter().map(|&h| linalg::op_norm(&shear(h))).fold(0.0, f64::max);
    let k_table: Vec<f64> = inv_norms.iter().map(|n| big_m * n).collect();
    let k_max = k_table.iter().copied().fold(0.0, f64::max);

    let b = base.clone();
    let sys = CocycleSystem::new(2, base.clone(), move |w| {
        let s = b.symbol_at(w).expect("shift point");
        let s_next = b.symbol_at(&b.step(w, 1).expect("shift step")).expect("shift point");
        shear(SHEARS[s_next]) * dmatrix![1.0 / 3.0, 0.0; 0.0, 3.0] * shear(-SHEARS[s])
    });
    let (b1, b2) = (base.clone(), base.clone());
    let kt = k_table.clone();
    let dich = DichotomyData::new(
        2f64.ln(),
        1.5f64.ln(),
        move |w| {
            let h = SHEARS[b1.symbol_at(w).expect("shift point")];
            shear(h) * dmatrix![1.0, 0.0; 0.0, 0.0] * shear(-h)
        },
        move |w| kt[b2.symbol_at(w).expect("shift point")],
    )?
    .with_bound_sup(k_max);

    let omega = BasePoint::shift(params.seed, 0);
    let (envelope, _) = build_envelope(&sys, &dich, &omega, rho, ENVELOPE_HORIZON)?;
    let mut rng = ChaCha8Rng::seed_from_u64(T_LEVEL_SEED);
    let mut samples = (0..T_LEVEL_SAMPLES)
        .map(|_| envelope.value(&BasePoint::shift(rng.gen(), 0)))
        .collect::<Result<Vec<f64>>>()?;
    samples.sort_by(f64::total_cmp);
    let idx = ((quantile * T_LEVEL_SAMPLES as f64).ceil() as usize).clamp(1, T_LEVEL_SAMPLES) - 1;
    let t_level = samples[idx];

    let layering = Arc::new(NonuniformLayering {
        rho,
        t_level,
        cap: ENVELOPE_HORIZON,
        envelope,
        base: base.clone(),
    });
    let (lay_f, lay_l) = (Arc::clone(&layering), Arc::clone(&layering));
    let b = base.clone();
    let pert = if c == 0.0 {
        Perturbation::zero()
    } else {
        Perturbation::new(
            c,
            move |w, x| {
                let factor = c * lay_f.layer_factor(w).unwrap_or(0.0);
                sine(x, factor, 2.0 * PI * b.unit_at(w, 7))
            },
            move |w| c * lay_l.layer_factor(w).unwrap_or(0.0),
        )?
        .with_sup_bound(c * 2f64.sqrt() / t_level)
    };
    Ok(Scenario {
        name: "nonuniform-layered".into(),
        notes: format!(
            "sheared diag(1/3, 3) over a 3-symbol Bernoulli shift, K varies per symbol; \
             ρ = {rho}, T = {t_level:.6} ({:.0}th percentile of D), perturbation scaled per layer",
            quantile * 100.0
        ),
        sys,
        dich,
        pert,
        weight: WeightFamily::Exponential,
        epsilon: 2f64.ln() / 2.0,
        omega,
        settings: NormSettings::new(params.horizon.unwrap_or(DEFAULT_HORIZON)),
        c,
        layering: Some(layering),
    })
}

fn remark_scalar(params: &ScenarioParams) -> Result<Scenario> {
    let base = DrivingSystem::uniform_bernoulli(2)?;
    let tau = params.tau.unwrap_or(0.01);
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
    }
    let marker = params.seed;
    let sys = CocycleSystem::constant(base, dmatrix![0.5]);
    let dich = DichotomyData::uniform(2f64.ln(), 0.0, dmatrix![1.0], 1.0)?;
    // f is constant in x, hence 0-Lipschitz; it only lives on the forward orbit of ω
    let pert = if tau == 0.0 {
        Perturbation::zero()
    } else {
        Perturbation::new(
            0.0,
            move |w, x| match w {
                BasePoint::Shift { seed, offset } if *seed == marker && *offset >= 0 => {
                    Vector::from_element(x.len(), tau)
                }
                _ => Vector::zeros(x.len()),
            },
            |_| 0.0,
        )?
        .with_sup_bound(tau)
    };
    Ok(Scenario {
        name: "remark-scalar".into(),
        notes: format!("A = 1/2 on R, f = τ = {tau} on the forward orbit of ω and 0 elsewhere: λ⁺ = 0 but λ⁻ = −log 2"),
        sys,
        dich,
        pert,
        weight: WeightFamily::Constant(1.0),
        epsilon: 2f64.ln(),
        omega: BasePoint::shift(marker, 0),
        settings: NormSettings::new(params.horizon.unwrap_or(DEFAULT_HORIZON)).allowing_zero_margin(),
        c: 0.0,
        layering: None,
    })
}

/// Builds a scenario without running its self-test.
pub fn build_scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    match name {
        "uniform-diag" => uniform_diag(params),
        "uniform-rot-coupled" => uniform_rot_coupled(params),
        "nonuniform-layered" => nonuniform_layered(params),
        "remark-scalar" => remark_scalar(params),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Builds a scenario and rejects it if its self-test fails.
pub fn load_scenario(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    let sc = build_scenario(name, params)?;
    let report = sc.self_test()?;
    if !report.passed() {
        let failed: Vec<String> = report.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::SelfTest(format!("{name}: {}", failed.join("; "))));
    }
    Ok(sc)
}

/// Every built-in scenario with default parameters, each self-tested.
pub fn builtin_scenarios() -> Result<Vec<Scenario>> {
    let params = ScenarioParams { seed: 1, ..Default::default() };
    SCENARIO_NAMES.iter().map(|n| load_scenario(n, &params)).collect()
}

impl Scenario {
    pub fn lambda(&self) -> f64 {
        self.dich.rate()
    }

    pub fn context(&self, window: Window) -> Result<Arc<WindowContext>> {
        Ok(Arc::new(WindowContext::new(&self.sys, &self.dich, &self.omega, window, self.settings)?))
    }

    pub fn weight_on(&self, window: Window) -> Result<WeightSequence> {
        self.weight.build(window, self.lambda(), self.epsilon)
    }

    /// `(L, q)` for the scenario's declared constants.
    pub fn shadow_constants(&self) -> Result<(f64, f64)> {
        shadow_constant(self.lambda(), self.epsilon, self.c)
    }

    /// Defect allowed at index `n`: `δ(n)/(2K(σ^n ω))`, or in the layered
    /// scenario the per-layer bound `δ(n)e^{−ρ|n−m|}/(2T)` with `m` the
    /// hitting index of `ω`.
    pub fn defect_budget(&self, ctx: &WindowContext, delta: &WeightSequence, n: i64) -> Result<f64> {
        match &self.layering {
            Some(lay) => {
                let m = lay
                    .hitting_index(ctx.omega())?
                    .ok_or_else(|| Error::InvalidArgument("ω never enters the good set within the cap".into()))?;
                Ok(delta.at(n) * (-lay.rho * (n - m as i64).abs() as f64).exp() / (2.0 * lay.t_level))
            }
            None => Ok(delta.at(n) / (2.0 * ctx.segment().bound(n))),
        }
    }

    /// A bounded exact orbit (the shadow of the zero sequence) plus jitter
    /// small enough that every defect stays below `0.9 ·` the budget.
    /// `noise` in `[0, 1]` scales the jitter.
    pub fn pseudo_orbit(
        &self,
        ctx: &Arc<WindowContext>,
        delta: &WeightSequence,
        noise: f64,
        seed: u64,
        tol: f64,
        max_iter: usize,
    ) -> Result<WindowSequence> {
        let window = ctx.window();
        let d = self.sys.dim();
        let reference = {
            let zero = WindowSequence::zeros(window, d);
            let prob = ShadowingProblem::new(Arc::clone(ctx), self.pert.clone(), zero, delta.scaled(0.5)?, self.epsilon)?;
            prob.solve(tol, max_iter)?.x
        };
        let seg = ctx.segment();
        let budgets = window.indices().map(|n| self.defect_budget(ctx, delta, n)).collect::<Result<Vec<f64>>>()?;
        let gain = |n: i64| linalg::op_norm(seg.factor(n)) + self.pert.lipschitz_at(seg.point(n));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = window.len();
        Ok(WindowSequence::from_fn(window, |n| {
            let i = (n - window.n_min()) as usize;
            let next = if i + 1 < len { budgets[i + 1] } else { budgets[i] };
            let size = 0.45 * noise.clamp(0.0, 1.0) * budgets[i].min(next) / (1.0 + gain(n));
            let u = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let norm = u.norm();
            let r: f64 = rng.gen_range(0.0..1.0);
            let jitter = if norm > 0.0 { u * (size * r / norm) } else { Vector::zeros(d) };
            reference.get(n) + jitter
        }))
    }

    /// Dichotomy audit, norm lemmas, Lipschitz budget, Green operator checks
    /// and, for the layered scenario, the envelope and layer checks.
    pub fn self_test(&self) -> Result<SelfTestReport> {
        let mut checks = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let d = self.sys.dim();

        let dr = check_dichotomy(&self.sys, &self.dich, &self.omega, 16, 24)?;
        checks.push(Check::new(
            "dichotomy",
            dr.holds,
            format!(
                "idempotence {:.1e}, equivariance {:.1e}, stable ratio {:.6}, unstable ratio {:.6}, strict ratio {:.6}",
                dr.idempotence_error, dr.equivariance_error, dr.stable_ratio, dr.unstable_ratio, dr.strict_ratio
            ),
        ));

        let points: Vec<BasePoint> = [0i64, 5, -11]
            .iter()
            .map(|&k| self.sys.base().step(&self.omega, k))
            .collect::<Result<_>>()?;
        let mut equiv_ok = true;
        let mut lemma_ok = true;
        for w in &points {
            for _ in 0..8 {
                let x = Vector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
                equiv_ok &= check_norm_equivalence(&self.sys, &self.dich, w, &x, &self.settings)?.holds;
                lemma_ok &= check_contraction_lemma(&self.sys, &self.dich, w, &x, 3, &self.settings)?.holds;
            }
        }
        checks.push(Check::new("norm-equivalence", equiv_ok, "‖x‖ <= ‖x‖_ω <= 2K‖x‖ on 24 samples".into()));
        checks.push(Check::new("contraction-lemma", lemma_ok, "adapted-norm decay at n = 3 on 24 samples".into()));

        let lip_points: Vec<BasePoint> = (-20i64..40)
            .map(|k| self.sys.base().step(&self.omega, k))
            .collect::<Result<_>>()?;
        let lip = self.pert.check_lipschitz(&self.sys, &self.dich, &lip_points, 4, 3.0, 11)?;
        checks.push(Check::new(
            "perturbation-lipschitz",
            lip.holds,
            format!("worst observed/allowed {:.4}, declared/allowed {:.4}", lip.worst_ratio, lip.worst_declared),
        ));

        match self.shadow_constants() {
            Ok((l, q)) => checks.push(Check::new("contraction-constant", true, format!("q = {q:.6}, L = {l:.6}"))),
            Err(e) => checks.push(Check::new("contraction-constant", false, e.to_string())),
        }

        let window = Window::symmetric(12)?;
        let ctx = self.context(window)?;
        let delta = self.weight_on(window)?;
        let admissible = delta.check_admissible((self.lambda() - self.epsilon).exp());
        checks.push(Check::new(
            "weight-admissible",
            admissible.is_ok(),
            format!("{} weight, max ratio {:.6}", self.weight.label(), delta.max_ratio()),
        ));
        let mut worst_res: f64 = 0.0;
        for _ in 0..10 {
            let z = WindowSequence::from_fn(window, |_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)));
            let w = ctx.green_apply(&z)?;
            let r = ctx.green_residual(&z, &w)?;
            worst_res = worst_res.max(r.relative()).max(r.left_edge).max(r.right_edge);
        }
        checks.push(Check::new("green-residual", worst_res <= 1e-10, format!("worst relative residual {worst_res:.2e}")));
        let bound = ctx.green_norm_bound_check(&delta, self.epsilon, 12, 5)?;
        checks.push(Check::new(
            "green-bound",
            bound.holds,
            format!("max ratio {:.6} vs bound {:.6}", bound.max_ratio, bound.bound),
        ));

        if let Some(lay) = &self.layering {
            self.layering_checks(lay, &mut checks)?;
        }
        Ok(SelfTestReport { scenario: self.name.clone(), checks })
    }

    fn layering_checks(&self, lay: &NonuniformLayering, checks: &mut Vec<Check>) -> Result<()> {
        let env = lay.envelope.report(&self.omega, 16)?;
        checks.push(Check::new(
            "envelope",
            env.holds && env.certified,
            format!(
                "D(ω) = {:.6}, K(ω) = {:.6}, growth ratio {:.6}, horizon {}",
                env.d_value,
                env.k_value,
                env.growth_ratio,
                lay.envelope.horizon()
            ),
        ));
        // K(σω') <= D(σω') <= T e^{ρ|n−1|} for ω' ∈ Ω_T^n
        let mut worst: f64 = 0.0;
        let mut layers = Vec::new();
        for k in -16i64..48 {
            let w = self.sys.base().step(&self.omega, k)?;
            let Some(n) = lay.hitting_index(&w)? else { continue };
            layers.push(n);
            let next = self.sys.base().step(&w, 1)?;
            let k_next = self.dich.bound(&next);
            let d_next = lay.envelope.value(&next)?;
            let cap = lay.t_level * (lay.rho * (n as f64 - 1.0).abs()).exp();
            worst = worst.max((k_next / d_next).max(d_next / cap));
        }
        let deepest = layers.iter().copied().max().unwrap_or(0);
        checks.push(Check::new(
            "layer-chain",
            worst <= 1.0 + 1e-12,
            format!("worst ratio {worst:.6} over {} points, deepest layer {deepest}", layers.len()),
        ));
        let cov = lay.coverage(COVERAGE_STEPS, 1000, 3)?;
        checks.push(Check::new(
            "layer-coverage",
            cov >= COVERAGE_MIN,
            format!("{:.4} of samples hit the good set within {COVERAGE_STEPS} steps", cov),
        ));
        let own = lay.hitting_index(&self.omega)?;
        checks.push(Check::new(
            "base-point-layer",
            own.is_some(),
            format!("ω lies in layer {own:?}"),
        ));
        Ok(())
    }
}

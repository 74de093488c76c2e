//! Nonlinear shadowing: perturbations `f_ω`, the maps `S` and `T = Γ_ω S`,
//! the contraction solver and the certificates that come with it.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cocycle::{CocycleSystem, DichotomyData, ScalarField};
use crate::driving::BasePoint;
use crate::error::{Error, Result};
use crate::green::{green_bound, WeightSequence, Window, WindowContext, WindowSequence};
use crate::linalg::Vector;

pub type PerturbationFn = Arc<dyn Fn(&BasePoint, &Vector) -> Vector + Send + Sync>;

/// Slack used for the invariant-ball check `‖z^k‖ <= L`.
pub const BALL_SLACK: f64 = 1e-9;
/// Two orbits closer than this everywhere on the window count as the same orbit.
pub const UNIQUENESS_TOL: f64 = 1e-8;

/// The nonlinear part `f_ω` of `F_ω = A(ω) + f_ω`.
///
/// `lipschitz(ω)` is the declared Lipschitz constant of `f_ω`; it must not
/// exceed `c / K(σω)`, which [`Perturbation::check_lipschitz`] spot-checks.
#[derive(Clone)]
pub struct Perturbation {
    f: Option<PerturbationFn>,
    budget: f64,
    lipschitz: ScalarField,
    sup_bound: Option<f64>,
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation")
            .field("zero", &self.f.is_none())
            .field("budget", &self.budget)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation {
            f: None,
            budget: 0.0,
            lipschitz: Arc::new(|_| 0.0),
            sup_bound: Some(0.0),
        }
    }

    pub fn new(
        budget: f64,
        f: impl Fn(&BasePoint, &Vector) -> Vector + Send + Sync + 'static,
        lipschitz: impl Fn(&BasePoint) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(Error::InvalidArgument(format!("Lipschitz budget must be >= 0, got {budget}")));
        }
        Ok(Perturbation {
            f: Some(Arc::new(f)),
            budget,
            lipschitz: Arc::new(lipschitz),
            sup_bound: None,
        })
    }

    /// Declares `sup_{ω,x} ‖f_ω(x)‖ <= bound`.
    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    pub fn lipschitz_at(&self, omega: &BasePoint) -> f64 {
        (self.lipschitz)(omega)
    }

    pub fn apply(&self, omega: &BasePoint, x: &Vector) -> Vector {
        match &self.f {
            Some(f) => f(omega, x),
            None => Vector::zeros(x.len()),
        }
    }

    /// Samples pairs `x, y` at the given base points and checks
    /// `‖f_ω(x) − f_ω(y)‖ <= (c/K(σω))‖x − y‖`, plus the declared constant
    /// against the same budget.
    pub fn check_lipschitz(
        &self,
        sys: &CocycleSystem,
        dich: &DichotomyData,
        points: &[BasePoint],
        pairs_per_point: usize,
        scale: f64,
        seed: u64,
    ) -> Result<LipschitzReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sys.dim();
        let mut worst_ratio: f64 = 0.0;
        let mut worst_declared: f64 = 0.0;
        for omega in points {
            let next = sys.base().step(omega, 1)?;
            let allowed = self.budget / dich.bound(&next);
            let declared = self.lipschitz_at(omega);
            worst_declared = worst_declared.max(if allowed > 0.0 { declared / allowed } else if declared > 0.0 { f64::INFINITY } else { 0.0 });
            for _ in 0..pairs_per_point {
                let x = Vector::from_fn(d, |_, _| rng.gen_range(-scale..scale));
                let y = Vector::from_fn(d, |_, _| rng.gen_range(-scale..scale));
                let dist = (&x - &y).norm();
                if dist == 0.0 {
                    continue;
                }
                let diff = (self.apply(omega, &x) - self.apply(omega, &y)).norm();
                let ratio = if allowed > 0.0 {
                    diff / (allowed * dist)
                } else if diff > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst_ratio = worst_ratio.max(ratio);
            }
        }
        Ok(LipschitzReport {
            worst_ratio,
            worst_declared,
            holds: worst_ratio <= 1.0 + 1e-9 && worst_declared <= 1.0 + 1e-12,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LipschitzReport {
    /// Largest observed `‖f(x)−f(y)‖ / ((c/K(σω))‖x−y‖)`.
    pub worst_ratio: f64,
    /// Largest declared constant relative to `c/K(σω)`.
    pub worst_declared: f64,
    pub holds: bool,
}

/// `(L, q)` with `B = (1+e^{-ε})/(1−e^{-ε})`, `q = 2c e^{λ−ε} B` and `L = B/(1−q)`.
pub fn shadow_constant(lambda: f64, epsilon: f64, c: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon <= lambda) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, {lambda}]")));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("c must be >= 0, got {c}")));
    }
    let b = green_bound(epsilon);
    let q = 2.0 * c * (lambda - epsilon).exp() * b;
    if q >= 1.0 {
        return Err(Error::ContractionViolated { q });
    }
    Ok((b / (1.0 - q), q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    /// `δ ≡ t`.
    Constant(f64),
    /// `δ(n) = e^{a|n|}`.
    Exponential(f64),
    /// `δ(n) = |n| + 1`.
    Polynomial,
}

pub fn make_weight(kind: WeightKind, window: Window) -> Result<WeightSequence> {
    match kind {
        WeightKind::Constant(t) => {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("constant weight must be positive, got {t}")));
            }
            WeightSequence::new(window, vec![t; window.len()], 1.0)
        }
        WeightKind::Exponential(a) => {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidArgument(format!("exponential rate must be >= 0, got {a}")));
            }
            let values = window.indices().map(|n| (a * n.abs() as f64).exp()).collect();
            WeightSequence::new(window, values, a.exp())
        }
        WeightKind::Polynomial => {
            let values = window.indices().map(|n| n.abs() as f64 + 1.0).collect();
            let r = if window.len() > 1 { 2.0 } else { 1.0 };
            WeightSequence::new(window, values, r)
        }
    }
}

/// `F_{σ^n ω}(x) = A(σ^n ω) x + f_{σ^n ω}(x)`, for `n` inside the
/// context's precomputed segment.
pub fn nonlinear_step(ctx: &WindowContext, pert: &Perturbation, n: i64, x: &Vector) -> Vector {
    let seg = ctx.segment();
    seg.factor(n) * x + pert.apply(seg.point(n), x)
}

/// Largest `‖x_n − F_{σ^{n−1}ω}(x_{n−1})‖` over interior indices, with its index.
pub fn orbit_residual(ctx: &WindowContext, pert: &Perturbation, x: &WindowSequence) -> (f64, i64) {
    let w = x.window();
    let mut worst = (0.0, w.n_min());
    for n in (w.n_min() + 1)..=w.n_max() {
        let r = (x.get(n) - nonlinear_step(ctx, pert, n - 1, x.get(n - 1))).norm();
        if r > worst.0 {
            worst = (r, n);
        }
    }
    worst
}

/// A pseudo-orbit together with everything the shadowing solver needs.
#[derive(Clone, Debug)]
pub struct ShadowingProblem {
    ctx: Arc<WindowContext>,
    pert: Perturbation,
    y: WindowSequence,
    delta: WeightSequence,
    epsilon: f64,
    l: f64,
    q: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DefectRecord {
    pub n: i64,
    pub norm: f64,
    /// `δ(n) / (2K(σ^n ω))`.
    pub budget: f64,
    pub ok: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub step_norm: f64,
    pub z_norm: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationRecord {
    pub n: i64,
    pub delta: f64,
    pub defect: f64,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

impl ShadowingProblem {
    /// Refuses to build a problem that violates the contraction condition or
    /// whose weight is not `e^{λ−ε}`-admissible.
    pub fn new(
        ctx: Arc<WindowContext>,
        pert: Perturbation,
        y: WindowSequence,
        delta: WeightSequence,
        epsilon: f64,
    ) -> Result<Self> {
        let window = ctx.window();
        if y.window() != window || delta.window() != window {
            return Err(Error::Shape("pseudo-orbit, weight and context windows differ".into()));
        }
        if y.dim() != ctx.system().dim() {
            return Err(Error::Shape(format!("pseudo-orbit dimension {} != {}", y.dim(), ctx.system().dim())));
        }
        let lambda = ctx.dichotomy().rate();
        let (l, q) = shadow_constant(lambda, epsilon, pert.budget())?;
        delta.check_admissible((lambda - epsilon).exp())?;
        Ok(ShadowingProblem { ctx, pert, y, delta, epsilon, l, q })
    }

    pub fn context(&self) -> &WindowContext {
        &self.ctx
    }

    pub fn shared_context(&self) -> Arc<WindowContext> {
        Arc::clone(&self.ctx)
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.pert
    }

    pub fn pseudo_orbit(&self) -> &WindowSequence {
        &self.y
    }

    pub fn weight(&self) -> &WeightSequence {
        &self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn window(&self) -> Window {
        self.ctx.window()
    }

    /// Shadowing constant `L`.
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Contraction constant `q` of `T`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn nonlinear_step(&self, n: i64, x: &Vector) -> Vector {
        nonlinear_step(&self.ctx, &self.pert, n, x)
    }

    /// `y_n − F_{σ^{n−1}ω}(y_{n−1})` on interior indices (zero at `n_min`).
    pub fn defect(&self) -> WindowSequence {
        let w = self.window();
        WindowSequence::from_fn(w, |n| {
            if n == w.n_min() {
                Vector::zeros(self.y.dim())
            } else {
                self.y.get(n) - self.nonlinear_step(n - 1, self.y.get(n - 1))
            }
        })
    }

    /// Per-index pseudo-orbit check `‖defect(n)‖ <= δ(n)/(2K(σ^n ω))`.
    pub fn defect_report(&self) -> Vec<DefectRecord> {
        let defect = self.defect();
        let seg = self.ctx.segment();
        let w = self.window();
        ((w.n_min() + 1)..=w.n_max())
            .map(|n| {
                let norm = defect.get(n).norm();
                let budget = self.delta.at(n) / (2.0 * seg.bound(n));
                DefectRecord { n, norm, budget, ok: norm <= budget }
            })
            .collect()
    }

    pub fn is_pseudo_orbit(&self) -> bool {
        self.defect_report().iter().all(|r| r.ok)
    }

    /// `(Sz)_n = f_{σ^{n−1}ω}(z_{n−1} + y_{n−1}) + A(σ^{n−1}ω) y_{n−1} − y_n`,
    /// and `(Sz)_{n_min} = 0`.
    pub fn apply_s(&self, z: &WindowSequence) -> Result<WindowSequence> {
        let w = self.window();
        if z.window() != w || z.dim() != self.y.dim() {
            return Err(Error::Shape("correction does not match the problem window".into()));
        }
        let seg = self.ctx.segment();
        Ok(WindowSequence::from_fn(w, |n| {
            if n == w.n_min() {
                return Vector::zeros(self.y.dim());
            }
            let (yp, zp) = (self.y.get(n - 1), z.get(n - 1));
            let point = seg.point(n - 1);
            self.pert.apply(point, &(zp + yp)) + seg.factor(n - 1) * yp - self.y.get(n)
        }))
    }

    /// `T(z) = Γ_ω S(z)`.
    pub fn apply_t(&self, z: &WindowSequence) -> Result<WindowSequence> {
        self.ctx.green_apply(&self.apply_s(z)?)
    }

    /// Upper estimate of `‖z‖_{δ,∞}`.
    pub fn weighted_norm(&self, z: &WindowSequence) -> Result<f64> {
        Ok(self.ctx.weighted_norm(z, &self.delta)?.upper())
    }

    /// Fixed-point iteration of `T` from `z⁰ = 0`, stopping once the
    /// a-posteriori bound `q/(1−q)·‖z^{k} − z^{k−1}‖_{δ,∞}` is at most `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Result<ShadowingResult> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let q = self.q;
        let mut z = WindowSequence::zeros(self.window(), self.y.dim());
        let mut trace = Vec::new();
        let mut last_step = f64::INFINITY;
        let mut converged = false;
        for k in 1..=max_iter {
            let next = self.apply_t(&z)?;
            let step = self.weighted_norm(&next.sub(&z)?)?;
            let z_norm = self.weighted_norm(&next)?;
            trace.push(IterationRecord { k, step_norm: step, z_norm });
            z = next;
            last_step = step;
            if q == 0.0 || step * q / (1.0 - q) <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { iterations: max_iter, last_step });
        }
        let x = self.y.add(&z)?;
        let fixed_point_residual = self.weighted_norm(&self.apply_t(&z)?.sub(&z)?)?;
        let (orbit_residual, orbit_residual_index) = orbit_residual(&self.ctx, &self.pert, &x);
        let defects = self.defect_report();
        let deviations = self
            .window()
            .indices()
            .map(|n| {
                let delta = self.delta.at(n);
                let deviation = z.get(n).norm();
                let bound = self.l * delta;
                let defect = if n == self.window().n_min() {
                    0.0
                } else {
                    defects[(n - self.window().n_min() - 1) as usize].norm
                };
                DeviationRecord { n, delta, defect, deviation, bound, pass: deviation <= bound }
            })
            .collect();
        let max_iterate_norm = trace.iter().map(|r| r.z_norm).fold(0.0, f64::max);
        Ok(ShadowingResult {
            x,
            z,
            l: self.l,
            q,
            tol,
            iterations: trace.len(),
            final_step_norm: last_step,
            fixed_point_residual,
            orbit_residual,
            orbit_residual_index,
            max_iterate_norm,
            pseudo_orbit_ok: defects.iter().all(|r| r.ok),
            defects,
            deviations,
            trace,
        })
    }

    /// Compares two orbits on the window: if they stay within `L δ(n)` of
    /// each other in the adapted norm they must coincide.
    pub fn check_uniqueness(
        &self,
        x1: &WindowSequence,
        x2: &WindowSequence,
        l: f64,
        orbit_tol: f64,
    ) -> Result<UniquenessOutcome> {
        for x in [x1, x2] {
            let (res, index) = orbit_residual(&self.ctx, &self.pert, x);
            if res > orbit_tol * (1.0 + x.sup_norm()) {
                return Err(Error::NotAnOrbit { index, residual: res });
            }
        }
        let diff = x1.sub(x2)?;
        for (n, dn) in diff.iter() {
            let adapted = self.ctx.adapted_norm(n, dn)?.value;
            let ratio = adapted / (l * self.delta.at(n));
            if ratio > 1.0 {
                return Ok(UniquenessOutcome::HypothesisNotMet { index: n, ratio });
            }
        }
        let max_diff = diff.sup_norm();
        Ok(if max_diff <= UNIQUENESS_TOL {
            UniquenessOutcome::Identical { max_diff }
        } else {
            UniquenessOutcome::Violation { max_diff }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum UniquenessOutcome {
    /// The orbits are not `Lδ`-close at `index`; nothing to conclude.
    HypothesisNotMet { index: i64, ratio: f64 },
    Identical { max_diff: f64 },
    /// Close in the adapted norm yet distinct.
    Violation { max_diff: f64 },
}

impl UniquenessOutcome {
    pub fn passes(&self) -> bool {
        !matches!(self, UniquenessOutcome::Violation { .. })
    }
}

#[derive(Clone, Debug)]
pub struct ShadowingResult {
    /// True orbit `x = y + z`.
    pub x: WindowSequence,
    pub z: WindowSequence,
    pub l: f64,
    pub q: f64,
    pub tol: f64,
    pub iterations: usize,
    pub final_step_norm: f64,
    /// `‖T(z) − z‖_{δ,∞}` at the returned `z`.
    pub fixed_point_residual: f64,
    pub orbit_residual: f64,
    pub orbit_residual_index: i64,
    pub max_iterate_norm: f64,
    pub pseudo_orbit_ok: bool,
    pub defects: Vec<DefectRecord>,
    pub deviations: Vec<DeviationRecord>,
    pub trace: Vec<IterationRecord>,
}

impl ShadowingResult {
    pub fn shadow_bound_holds(&self) -> bool {
        self.deviations.iter().all(|d| d.pass)
    }

    pub fn ball_holds(&self) -> bool {
        self.max_iterate_norm <= self.l + BALL_SLACK
    }

    pub fn fixed_point_holds(&self) -> bool {
        self.fixed_point_residual <= 2.0 * self.tol
    }

    /// Largest `‖x_n − y_n‖ / δ(n)`.
    pub fn max_scaled_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.deviation / d.delta).fold(0.0, f64::max)
    }

    /// `⌈log(tol(1−q)/L)/log q⌉ + 2`, or 1 when `q = 0`.
    pub fn iteration_budget(&self) -> usize {
        if self.q == 0.0 {
            return 1;
        }
        ((self.tol * (1.0 - self.q) / self.l).ln() / self.q.ln()).ceil().max(0.0) as usize + 2
    }

    /// All certificates at once; `orbit_tol` bounds the interior orbit residual.
    pub fn certified(&self, orbit_tol: f64) -> bool {
        self.pseudo_orbit_ok
            && self.shadow_bound_holds()
            && self.ball_holds()
            && self.fixed_point_holds()
            && self.orbit_residual <= orbit_tol
    }
}

/// Measured Lipschitz ratio of `T` over random pairs inside the ball of
/// radius `L`: the worst `‖T z¹ − T z²‖ / ‖z¹ − z²‖`.
pub fn measure_contraction(prob: &ShadowingProblem, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = prob.window();
    let d = prob.pseudo_orbit().dim();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let draw = |rng: &mut ChaCha8Rng| -> Result<WindowSequence> {
            let z = WindowSequence::from_fn(w, |n| {
                Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)) * prob.weight().at(n)
            });
            let norm = prob.weighted_norm(&z)?;
            let radius = rng.gen_range(0.0..1.0) * prob.l();
            Ok(z.scale(radius / norm))
        };
        let z1 = draw(&mut rng)?;
        let z2 = draw(&mut rng)?;
        let den = prob.context().weighted_norm(&z1.sub(&z2)?, prob.weight())?.value;
        if den == 0.0 {
            continue;
        }
        let num = prob.weighted_norm(&prob.apply_t(&z1)?.sub(&prob.apply_t(&z2)?)?)?;
        worst = worst.max(num / den);
    }
    Ok(worst)
}

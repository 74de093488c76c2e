//! Linear cocycles over a driving system, their dichotomy data, adapted
//! norms and tempered envelopes.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::driving::{BasePoint, DrivingSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// Factors with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Largest `|n|` accepted by [`CocycleSystem::eval`].
pub const MAX_EVAL_STEPS: i64 = 1_000_000;

pub type MatrixField = Arc<dyn Fn(&BasePoint) -> Mat + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&BasePoint) -> f64 + Send + Sync>;

/// Generator `ω ↦ A(ω)` over a base system.
#[derive(Clone)]
pub struct CocycleSystem {
    dim: usize,
    base: DrivingSystem,
    generator: MatrixField,
}

impl fmt::Debug for CocycleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CocycleSystem")
            .field("dim", &self.dim)
            .field("base", &self.base)
            .finish_non_exhaustive()
    }
}

impl CocycleSystem {
    pub fn new(
        dim: usize,
        base: DrivingSystem,
        generator: impl Fn(&BasePoint) -> Mat + Send + Sync + 'static,
    ) -> Self {
        assert!(dim > 0, "cocycle dimension must be positive");
        CocycleSystem {
            dim,
            base,
            generator: Arc::new(generator),
        }
    }

    /// `A(ω) ≡ matrix`.
    pub fn constant(base: DrivingSystem, matrix: Mat) -> Self {
        assert!(matrix.is_square(), "generator must be square");
        let dim = matrix.nrows();
        Self::new(dim, base, move |_| matrix.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &DrivingSystem {
        &self.base
    }

    /// `A(ω)` with shape, finiteness and conditioning checked. `index` is
    /// only used to label errors.
    pub fn factor(&self, omega: &BasePoint, index: i64) -> Result<Mat> {
        let a = (self.generator)(omega);
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "generator returned {}x{} at index {index}, expected {}x{}",
                a.nrows(),
                a.ncols(),
                self.dim,
                self.dim
            )));
        }
        if !linalg::is_finite_mat(&a) {
            return Err(Error::Singular { index });
        }
        let cond = linalg::condition(&a);
        if !cond.is_finite() {
            return Err(Error::Singular { index });
        }
        if cond > MAX_CONDITION {
            return Err(Error::IllConditioned { index, cond });
        }
        Ok(a)
    }

    /// `(A(ω), A(ω)^{-1})`.
    pub fn factor_with_inverse(&self, omega: &BasePoint, index: i64) -> Result<(Mat, Mat)> {
        let a = self.factor(omega, index)?;
        let inv = a.clone().try_inverse().ok_or(Error::Singular { index })?;
        Ok((a, inv))
    }

    /// The cocycle `𝒜(ω, n)`; negative `n` uses inverse factors
    /// `A(σ^{-|n|}ω)^{-1} ⋯ A(σ^{-1}ω)^{-1}`.
    pub fn eval(&self, omega: &BasePoint, n: i64) -> Result<Mat> {
        if n.abs() > MAX_EVAL_STEPS {
            return Err(Error::StepOutOfRange { requested: n, limit: MAX_EVAL_STEPS });
        }
        let mut acc = Mat::identity(self.dim, self.dim);
        if n >= 0 {
            let mut w = *omega;
            for k in 0..n {
                acc = self.factor(&w, k)? * acc;
                w = self.base.step(&w, 1)?;
            }
        } else {
            let mut w = *omega;
            for k in 1..=(-n) {
                w = self.base.step(&w, -1)?;
                let (_, inv) = self.factor_with_inverse(&w, -k)?;
                acc = inv * acc;
            }
        }
        Ok(acc)
    }
}

/// `𝒜(ω, n)`.
pub fn cocycle_eval(sys: &CocycleSystem, omega: &BasePoint, n: i64) -> Result<Mat> {
    sys.eval(omega, n)
}

/// Projector family, rate, strictness margin and (tempered) bound of an
/// exponential dichotomy. The dichotomy is assumed to hold at rate
/// `rate + margin`; `margin > 0` is what makes truncated adapted norms
/// certifiable a priori.
#[derive(Clone)]
pub struct DichotomyData {
    projector: MatrixField,
    rate: f64,
    margin: f64,
    bound: ScalarField,
    bound_sup: Option<f64>,
}

impl fmt::Debug for DichotomyData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DichotomyData")
            .field("rate", &self.rate)
            .field("margin", &self.margin)
            .field("bound_sup", &self.bound_sup)
            .finish_non_exhaustive()
    }
}

impl DichotomyData {
    pub fn new(
        rate: f64,
        margin: f64,
        projector: impl Fn(&BasePoint) -> Mat + Send + Sync + 'static,
        bound: impl Fn(&BasePoint) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("dichotomy rate must be positive, got {rate}")));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidArgument(format!("margin must be nonnegative, got {margin}")));
        }
        Ok(DichotomyData {
            projector: Arc::new(projector),
            rate,
            margin,
            bound: Arc::new(bound),
            bound_sup: None,
        })
    }

    /// Uniform dichotomy with constant projector and constant bound.
    pub fn uniform(rate: f64, margin: f64, projector: Mat, bound: f64) -> Result<Self> {
        Self::new(rate, margin, move |_| projector.clone(), move |_| bound)
            .map(|d| d.with_bound_sup(bound))
    }

    /// Declares a global upper bound on `K`, used to certify envelopes.
    pub fn with_bound_sup(mut self, sup: f64) -> Self {
        self.bound_sup = Some(sup);
        self
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn bound_sup(&self) -> Option<f64> {
        self.bound_sup
    }

    pub fn projector(&self, omega: &BasePoint) -> Mat {
        (self.projector)(omega)
    }

    pub fn bound(&self, omega: &BasePoint) -> f64 {
        (self.bound)(omega)
    }

    pub(crate) fn bound_field(&self) -> ScalarField {
        self.bound.clone()
    }
}

/// Truncation horizon for adapted norms. `allow_zero_margin` is the
/// explicit override for dichotomies declared with `μ = 0`; the reported
/// tail then rests on the a-posteriori bound alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSettings {
    pub horizon: usize,
    pub allow_zero_margin: bool,
}

impl NormSettings {
    pub fn new(horizon: usize) -> Self {
        NormSettings { horizon, allow_zero_margin: false }
    }

    pub fn allowing_zero_margin(mut self) -> Self {
        self.allow_zero_margin = true;
        self
    }

    fn validate(&self, dich: &DichotomyData) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("adapted-norm horizon must be >= 1".into()));
        }
        if dich.margin == 0.0 && !self.allow_zero_margin {
            return Err(Error::UncertifiedTruncation);
        }
        Ok(())
    }
}

/// Truncated adapted norm: the true `‖x‖_ω` lies in `[value, value + tail]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdaptedNorm {
    pub value: f64,
    pub tail: f64,
}

impl AdaptedNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.tail
    }
}

/// Precomputed factors, inverses, projectors and bounds along
/// `σ^m(ω)` for `m` in `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Segment {
    lo: i64,
    points: Vec<BasePoint>,
    factors: Vec<Mat>,
    inverses: Vec<Mat>,
    projectors: Vec<Mat>,
    bounds: Vec<f64>,
}

impl Segment {
    pub fn build(
        sys: &CocycleSystem,
        dich: &DichotomyData,
        omega: &BasePoint,
        lo: i64,
        hi: i64,
    ) -> Result<Segment> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty segment [{lo}, {hi}]")));
        }
        let len = (hi - lo + 1) as usize;
        let mut points = Vec::with_capacity(len);
        let mut factors = Vec::with_capacity(len);
        let mut inverses = Vec::with_capacity(len);
        let mut projectors = Vec::with_capacity(len);
        let mut bounds = Vec::with_capacity(len);
        let mut w = sys.base().step(omega, lo)?;
        for m in lo..=hi {
            let (a, inv) = sys.factor_with_inverse(&w, m)?;
            let p = dich.projector(&w);
            if p.nrows() != sys.dim() || p.ncols() != sys.dim() {
                return Err(Error::Shape(format!("projector at index {m} has wrong shape")));
            }
            let k = dich.bound(&w);
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidArgument(format!("bound K must be positive, got {k} at index {m}")));
            }
            points.push(w);
            factors.push(a);
            inverses.push(inv);
            projectors.push(p);
            bounds.push(k);
            if m < hi {
                w = sys.base().step(&w, 1)?;
            }
        }
        Ok(Segment { lo, points, factors, inverses, projectors, bounds })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.points.len() as i64 - 1
    }

    pub fn dim(&self) -> usize {
        self.factors[0].nrows()
    }

    fn idx(&self, m: i64) -> usize {
        debug_assert!(m >= self.lo && m <= self.hi(), "index {m} outside segment");
        (m - self.lo) as usize
    }

    pub fn point(&self, m: i64) -> &BasePoint {
        &self.points[self.idx(m)]
    }

    /// `A(σ^m ω)`.
    pub fn factor(&self, m: i64) -> &Mat {
        &self.factors[self.idx(m)]
    }

    /// `A(σ^m ω)^{-1}`.
    pub fn inverse(&self, m: i64) -> &Mat {
        &self.inverses[self.idx(m)]
    }

    /// `Π(σ^m ω)`.
    pub fn projector(&self, m: i64) -> &Mat {
        &self.projectors[self.idx(m)]
    }

    /// `K(σ^m ω)`.
    pub fn bound(&self, m: i64) -> f64 {
        self.bounds[self.idx(m)]
    }

    pub fn complement(&self, m: i64) -> Mat {
        let p = self.projector(m);
        Mat::identity(p.nrows(), p.ncols()) - p
    }

    /// `𝒜(σ^from ω, steps) Π(σ^from ω) x`, re-projecting after every factor
    /// so rounding never leaks into the unstable direction.
    pub fn push_stable(&self, from: i64, steps: usize, x: &Vector) -> Vector {
        let mut v = self.projector(from) * x;
        for k in 0..steps as i64 {
            let m = from + k;
            v = self.projector(m + 1) * (self.factor(m) * v);
        }
        v
    }

    /// `𝒜(σ^from ω, -steps) (Id − Π(σ^from ω)) x`, re-projected likewise.
    pub fn pull_unstable(&self, from: i64, steps: usize, x: &Vector) -> Vector {
        let mut v = x - self.projector(from) * x;
        for k in 1..=steps as i64 {
            let m = from - k;
            let u = self.inverse(m) * v;
            v = &u - self.projector(m) * &u;
        }
        v
    }
}

/// Adapted norm of `x` at `σ^n ω`, computed from a segment covering
/// `[n − horizon, n + horizon]`.
pub fn adapted_norm_at(
    seg: &Segment,
    dich: &DichotomyData,
    n: i64,
    x: &Vector,
    settings: &NormSettings,
) -> Result<AdaptedNorm> {
    settings.validate(dich)?;
    let h = settings.horizon as i64;
    if n - h < seg.lo() || n + h > seg.hi() {
        return Err(Error::InvalidArgument(format!(
            "segment [{}, {}] does not cover index {n} with horizon {h}",
            seg.lo(),
            seg.hi()
        )));
    }
    let lambda = dich.rate;

    let p = seg.projector(n);
    let xs = p * x;
    let xu = x - &xs;

    let mut v = xs.clone();
    let mut stable_sup = v.norm();
    let mut stable_last = stable_sup;
    for m in 1..=h {
        v = seg.projector(n + m) * (seg.factor(n + m - 1) * v);
        stable_last = v.norm() * (lambda * m as f64).exp();
        stable_sup = stable_sup.max(stable_last);
    }

    let mut v = xu.clone();
    let mut unstable_sup = v.norm();
    let mut unstable_last = unstable_sup;
    for m in 1..=h {
        let u = seg.inverse(n - m) * v;
        v = &u - seg.projector(n - m) * &u;
        unstable_last = v.norm() * (lambda * m as f64).exp();
        unstable_sup = unstable_sup.max(unstable_last);
    }

    // Beyond the horizon every term is at most K(σ^{n±H} ω) times the last
    // computed term.
    let mut stable_tail = (seg.bound(n + h) * stable_last - stable_sup).max(0.0);
    let mut unstable_tail = (seg.bound(n - h) * unstable_last - unstable_sup).max(0.0);
    if dich.margin > 0.0 {
        let decay = seg.bound(n) * (-dich.margin * (h + 1) as f64).exp();
        stable_tail = stable_tail.min((decay * xs.norm() - stable_sup).max(0.0));
        unstable_tail = unstable_tail.min((decay * xu.norm() - unstable_sup).max(0.0));
    }

    Ok(AdaptedNorm {
        value: stable_sup + unstable_sup,
        tail: stable_tail + unstable_tail,
    })
}

/// Truncated adapted norm `‖x‖_ω` with its certified tail.
pub fn adapted_norm(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    x: &Vector,
    settings: &NormSettings,
) -> Result<AdaptedNorm> {
    settings.validate(dich)?;
    check_vector(sys, x)?;
    let h = settings.horizon as i64;
    let seg = Segment::build(sys, dich, omega, -h, h)?;
    adapted_norm_at(&seg, dich, 0, x, settings)
}

fn check_vector(sys: &CocycleSystem, x: &Vector) -> Result<()> {
    if x.len() != sys.dim() {
        return Err(Error::Shape(format!("vector of length {} for dimension {}", x.len(), sys.dim())));
    }
    Ok(())
}

const REL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormEquivalence {
    pub euclidean: f64,
    pub adapted: AdaptedNorm,
    pub upper: f64,
    pub holds: bool,
}

/// Checks `‖x‖ ≤ ‖x‖_ω ≤ 2K(ω)‖x‖`.
pub fn check_norm_equivalence(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    x: &Vector,
    settings: &NormSettings,
) -> Result<NormEquivalence> {
    let adapted = adapted_norm(sys, dich, omega, x, settings)?;
    let euclidean = x.norm();
    let upper = 2.0 * dich.bound(omega) * euclidean;
    let holds = euclidean <= adapted.upper() * (1.0 + REL_SLACK)
        && adapted.value <= upper * (1.0 + REL_SLACK);
    Ok(NormEquivalence { euclidean, adapted, upper, holds })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContractionLemmaReport {
    pub n: i64,
    pub stable_lhs: f64,
    pub unstable_lhs: f64,
    pub rhs: f64,
    pub stable_margin: f64,
    pub unstable_margin: f64,
    pub holds: bool,
}

/// Checks `‖𝒜(ω,n)Π(ω)x‖_{σ^n ω} ≤ e^{-λn}‖x‖_ω` and the unstable
/// counterpart at `σ^{-n} ω`. Margins are `rhs_upper − lhs`.
pub fn check_contraction_lemma(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    x: &Vector,
    n: i64,
    settings: &NormSettings,
) -> Result<ContractionLemmaReport> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("n must be nonnegative, got {n}")));
    }
    settings.validate(dich)?;
    check_vector(sys, x)?;
    let h = settings.horizon as i64;
    let seg = Segment::build(sys, dich, omega, -n - h, n + h)?;
    let base = adapted_norm_at(&seg, dich, 0, x, settings)?;
    let rhs = (-dich.rate * n as f64).exp() * base.upper();

    let forward = seg.push_stable(0, n as usize, x);
    let backward = seg.pull_unstable(0, n as usize, x);
    let stable_lhs = adapted_norm_at(&seg, dich, n, &forward, settings)?.value;
    let unstable_lhs = adapted_norm_at(&seg, dich, -n, &backward, settings)?.value;
    let stable_margin = rhs - stable_lhs;
    let unstable_margin = rhs - unstable_lhs;
    let slack = REL_SLACK * rhs.max(1.0);
    Ok(ContractionLemmaReport {
        n,
        stable_lhs,
        unstable_lhs,
        rhs,
        stable_margin,
        unstable_margin,
        holds: stable_margin >= -slack && unstable_margin >= -slack,
    })
}

/// Numerical audit of the dichotomy axioms at one base point.
#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    /// `‖Π² − Π‖` at `ω`.
    pub idempotence_error: f64,
    /// Worst relative error of `Π(σ^n ω)𝒜(ω,n) = 𝒜(ω,n)Π(ω)` over `|n| ≤ equivariance_range`.
    pub equivariance_error: f64,
    /// Worst `‖𝒜(ω,n)Π(ω)‖ / (K(ω)e^{-λn})` over `0 ≤ n ≤ decay_range`.
    pub stable_ratio: f64,
    /// Worst `‖𝒜(ω,-n)(Id − Π(ω))‖ / (K(ω)e^{-λn})`.
    pub unstable_ratio: f64,
    /// Same ratios with `λ` replaced by `λ + μ`.
    pub strict_ratio: f64,
    pub condition_max: f64,
    pub holds: bool,
}

pub const IDEMPOTENCE_TOL: f64 = 1e-10;
pub const EQUIVARIANCE_TOL: f64 = 1e-8;

pub fn check_dichotomy(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    equivariance_range: i64,
    decay_range: i64,
) -> Result<DichotomyReport> {
    let reach = equivariance_range.max(decay_range);
    let seg = Segment::build(sys, dich, omega, -reach - 1, reach + 1)?;
    let d = sys.dim();
    let p0 = seg.projector(0).clone();
    let idempotence_error = linalg::op_norm(&(&p0 * &p0 - &p0));

    let mut equivariance_error: f64 = 0.0;
    let mut forward = Mat::identity(d, d);
    let mut backward = Mat::identity(d, d);
    for n in 1..=equivariance_range {
        forward = seg.factor(n - 1) * forward;
        backward = seg.inverse(-n) * backward;
        let e_fwd = linalg::op_norm(&(seg.projector(n) * &forward - &forward * &p0))
            / linalg::op_norm(&forward).max(1.0);
        let e_bwd = linalg::op_norm(&(seg.projector(-n) * &backward - &backward * &p0))
            / linalg::op_norm(&backward).max(1.0);
        equivariance_error = equivariance_error.max(e_fwd).max(e_bwd);
    }

    let k = seg.bound(0);
    let lambda = dich.rate;
    let strict = lambda + dich.margin;
    let mut stable = p0.clone();
    let q0 = Mat::identity(d, d) - &p0;
    let mut unstable = q0.clone();
    let mut stable_ratio: f64 = 0.0;
    let mut unstable_ratio: f64 = 0.0;
    let mut strict_ratio: f64 = 0.0;
    for n in 0..=decay_range {
        if n > 0 {
            stable = seg.projector(n) * (seg.factor(n - 1) * stable);
            let u = seg.inverse(-n) * unstable;
            unstable = &u - seg.projector(-n) * &u;
        }
        let s = linalg::op_norm(&stable);
        let u = linalg::op_norm(&unstable);
        let nf = n as f64;
        stable_ratio = stable_ratio.max(s / (k * (-lambda * nf).exp()));
        unstable_ratio = unstable_ratio.max(u / (k * (-lambda * nf).exp()));
        strict_ratio = strict_ratio
            .max(s / (k * (-strict * nf).exp()))
            .max(u / (k * (-strict * nf).exp()));
    }

    let condition_max = (seg.lo()..=seg.hi())
        .map(|m| linalg::condition(seg.factor(m)))
        .fold(0.0_f64, f64::max);

    let holds = idempotence_error <= IDEMPOTENCE_TOL
        && equivariance_error <= EQUIVARIANCE_TOL
        && stable_ratio <= 1.0 + REL_SLACK
        && unstable_ratio <= 1.0 + REL_SLACK
        && strict_ratio <= 1.0 + REL_SLACK;
    Ok(DichotomyReport {
        idempotence_error,
        equivariance_error,
        stable_ratio,
        unstable_ratio,
        strict_ratio,
        condition_max,
        holds,
    })
}

/// `D_ρ(ω) = max_{|n| ≤ horizon} K(σ^n ω) e^{-ρ|n|}`.
#[derive(Clone)]
pub struct TemperedEnvelope {
    rho: f64,
    horizon: usize,
    base: DrivingSystem,
    bound: ScalarField,
    bound_sup: Option<f64>,
}

impl fmt::Debug for TemperedEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TemperedEnvelope")
            .field("rho", &self.rho)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    pub d_value: f64,
    pub k_value: f64,
    /// Worst `D(σ^n ω) / (D(ω) e^{ρ|n|})` over the checked range.
    pub growth_ratio: f64,
    pub certified: bool,
    pub warning: Option<String>,
    pub holds: bool,
}

impl TemperedEnvelope {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn profile(&self, omega: &BasePoint) -> Result<(f64, f64, f64)> {
        let h = self.horizon as i64;
        let mut best = (self.bound)(omega);
        let mut edge_growing = false;
        for sign in [-1i64, 1] {
            let mut prev = best;
            for k in 1..=h {
                let w = self.base.step(omega, sign * k)?;
                let term = (self.bound)(&w) * (-self.rho * k as f64).exp();
                best = best.max(term);
                if k == h && term >= prev {
                    edge_growing = true;
                }
                prev = term;
            }
        }
        Ok((best, (self.bound)(omega), if edge_growing { 1.0 } else { 0.0 }))
    }

    pub fn value(&self, omega: &BasePoint) -> Result<f64> {
        Ok(self.profile(omega)?.0)
    }

    /// Checks `K(ω) ≤ D(ω)` and `D(σ^n ω) ≤ D(ω)e^{ρ|n|}` for `|n| ≤ range`.
    pub fn report(&self, omega: &BasePoint, range: usize) -> Result<EnvelopeReport> {
        let (d_value, k_value, edge) = self.profile(omega)?;
        let mut growth_ratio: f64 = 0.0;
        for n in -(range as i64)..=(range as i64) {
            let w = self.base.step(omega, n)?;
            let dn = self.value(&w)?;
            growth_ratio = growth_ratio.max(dn / (d_value * (self.rho * n.abs() as f64).exp()));
        }
        let certified = match self.bound_sup {
            Some(sup) => sup * (-self.rho * (self.horizon + 1) as f64).exp() <= d_value,
            None => edge == 0.0,
        };
        let warning = (!certified).then(|| {
            format!(
                "horizon {} may be too small: K e^(-rho|n|) not yet decaying at the window edge",
                self.horizon
            )
        });
        let holds = k_value <= d_value && growth_ratio <= 1.0 + 1e-12;
        Ok(EnvelopeReport { d_value, k_value, growth_ratio, certified, warning, holds })
    }
}

/// Builds `D_ρ` from the dichotomy bound and reports on it at `ω`.
pub fn build_envelope(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    rho: f64,
    horizon: usize,
) -> Result<(TemperedEnvelope, EnvelopeReport)> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let env = TemperedEnvelope {
        rho,
        horizon,
        base: sys.base().clone(),
        bound: dich.bound_field(),
        bound_sup: dich.bound_sup(),
    };
    let report = env.report(omega, horizon.min(16))?;
    Ok((env, report))
}

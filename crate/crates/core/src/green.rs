//! The discrete Green operator `Γ_ω` on a finite window.
//!
//! Sequences outside the window are taken to be zero, which turns both
//! series of `Γ_ω` into finite sums. On the window the result solves
//! `w_n − A(σ^{n−1}ω) w_{n−1} = z_n` at every interior index, has stable
//! part `Π z_{n_min}` at the left edge and no unstable part at the right
//! edge.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{adapted_norm_at, CocycleSystem, DichotomyData, NormSettings, Segment};
use crate::driving::BasePoint;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

pub const MAX_WINDOW_LEN: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    n_min: i64,
    n_max: i64,
}

impl Window {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > 0 || n_max < 0 {
            return Err(Error::InvalidArgument(format!(
                "window [{n_min}, {n_max}] must contain 0"
            )));
        }
        let len = (n_max - n_min + 1) as usize;
        if len > MAX_WINDOW_LEN {
            return Err(Error::InvalidArgument(format!("window length {len} exceeds {MAX_WINDOW_LEN}")));
        }
        Ok(Window { n_min, n_max })
    }

    /// `[-half, half]`.
    pub fn symmetric(half: i64) -> Result<Self> {
        Self::new(-half, half)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> RangeInclusive<i64> {
        self.n_min..=self.n_max
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    fn offset(&self, n: i64) -> usize {
        debug_assert!(self.contains(n), "index {n} outside window");
        (n - self.n_min) as usize
    }
}

/// A vector-valued sequence on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSequence {
    window: Window,
    values: Vec<Vector>,
}

impl WindowSequence {
    pub fn new(window: Window, values: Vec<Vector>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::Shape(format!(
                "{} values for a window of length {}",
                values.len(),
                window.len()
            )));
        }
        let d = values[0].len();
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::Shape("entries of different dimension".into()));
        }
        if let Some(pos) = values.iter().position(|v| !linalg::is_finite_vec(v)) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry at index {}",
                window.n_min + pos as i64
            )));
        }
        Ok(WindowSequence { window, values })
    }

    pub fn zeros(window: Window, dim: usize) -> Self {
        WindowSequence {
            window,
            values: vec![Vector::zeros(dim); window.len()],
        }
    }

    pub fn from_fn(window: Window, mut f: impl FnMut(i64) -> Vector) -> Self {
        WindowSequence {
            window,
            values: window.indices().map(&mut f).collect(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn get(&self, n: i64) -> &Vector {
        &self.values[self.window.offset(n)]
    }

    pub fn set(&mut self, n: i64, v: Vector) {
        let i = self.window.offset(n);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vector)> {
        self.window.indices().zip(self.values.iter())
    }

    /// `max_n ‖z_n‖` in the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(linalg::is_finite_vec)
    }

    fn check_same_shape(&self, other: &WindowSequence) -> Result<()> {
        if self.window != other.window || self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "sequence on {:?} (d={}) vs {:?} (d={})",
                self.window,
                self.dim(),
                other.window,
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &WindowSequence) -> Result<WindowSequence> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &WindowSequence) -> Result<WindowSequence> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    pub fn scale(&self, factor: f64) -> WindowSequence {
        WindowSequence {
            window: self.window,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_map(&self, other: &WindowSequence, f: impl Fn(&Vector, &Vector) -> Vector) -> WindowSequence {
        WindowSequence {
            window: self.window,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

/// Positive weights `δ(n)` on a window together with their admissibility
/// constant `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    window: Window,
    values: Vec<f64>,
    r: f64,
}

impl WeightSequence {
    /// Fails with [`Error::Inadmissible`] if some consecutive ratio exceeds `r`.
    pub fn new(window: Window, values: Vec<f64>, r: f64) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::Shape(format!(
                "{} weights for a window of length {}",
                values.len(),
                window.len()
            )));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("admissibility constant must be >= 1, got {r}")));
        }
        if let Some(pos) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weight at index {} must be positive",
                window.n_min() + pos as i64
            )));
        }
        let w = WeightSequence { window, values, r };
        w.check_admissible(r)?;
        Ok(w)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn at(&self, n: i64) -> f64 {
        self.values[self.window.offset(n)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `max(δ(n+1)/δ(n), δ(n)/δ(n+1))` on the window (1 for a
    /// single-point window).
    pub fn max_ratio(&self) -> f64 {
        self.values
            .windows(2)
            .map(|p| (p[1] / p[0]).max(p[0] / p[1]))
            .fold(1.0, f64::max)
    }

    /// Checks `r`-admissibility, citing the first violating index.
    pub fn check_admissible(&self, r: f64) -> Result<()> {
        for (i, p) in self.values.windows(2).enumerate() {
            let ratio = (p[1] / p[0]).max(p[0] / p[1]);
            if ratio > r * (1.0 + 1e-12) {
                return Err(Error::Inadmissible {
                    index: self.window.n_min() + i as i64,
                    ratio,
                    r,
                });
            }
        }
        Ok(())
    }

    /// `n ↦ factor · δ(n)`; the admissibility constant is unchanged.
    pub fn scaled(&self, factor: f64) -> Result<WeightSequence> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        Ok(WeightSequence {
            window: self.window,
            values: self.values.iter().map(|v| v * factor).collect(),
            r: self.r,
        })
    }
}

/// `‖z‖_{δ,∞}` as an interval `[value, value + tail]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNorm {
    pub value: f64,
    pub tail: f64,
}

impl WeightedNorm {
    pub fn upper(&self) -> f64 {
        self.value + self.tail
    }
}

/// Cocycle data precomputed along a window, wide enough for adapted norms
/// at every window index.
#[derive(Clone, Debug)]
pub struct WindowContext {
    sys: CocycleSystem,
    dich: DichotomyData,
    omega: BasePoint,
    window: Window,
    settings: NormSettings,
    seg: Segment,
}

impl WindowContext {
    pub fn new(
        sys: &CocycleSystem,
        dich: &DichotomyData,
        omega: &BasePoint,
        window: Window,
        settings: NormSettings,
    ) -> Result<Self> {
        let h = settings.horizon as i64;
        let seg = Segment::build(sys, dich, omega, window.n_min() - h - 1, window.n_max() + h + 1)?;
        Ok(WindowContext {
            sys: sys.clone(),
            dich: dich.clone(),
            omega: *omega,
            window,
            settings,
            seg,
        })
    }

    pub fn system(&self) -> &CocycleSystem {
        &self.sys
    }

    pub fn dichotomy(&self) -> &DichotomyData {
        &self.dich
    }

    pub fn omega(&self) -> &BasePoint {
        &self.omega
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn settings(&self) -> &NormSettings {
        &self.settings
    }

    pub fn segment(&self) -> &Segment {
        &self.seg
    }

    fn check_seq(&self, z: &WindowSequence) -> Result<()> {
        if z.window() != self.window {
            return Err(Error::Shape(format!("sequence window {:?} != {:?}", z.window(), self.window)));
        }
        if z.dim() != self.sys.dim() {
            return Err(Error::Shape(format!("sequence dimension {} != {}", z.dim(), self.sys.dim())));
        }
        Ok(())
    }

    /// `‖z_n‖_{σ^n ω}` for one index.
    pub fn adapted_norm(&self, n: i64, x: &Vector) -> Result<crate::cocycle::AdaptedNorm> {
        adapted_norm_at(&self.seg, &self.dich, n, x, &self.settings)
    }

    /// `sup_n δ(n)^{-1} ‖z_n‖_{σ^n ω}`.
    pub fn weighted_norm(&self, z: &WindowSequence, delta: &WeightSequence) -> Result<WeightedNorm> {
        self.check_seq(z)?;
        if delta.window() != self.window {
            return Err(Error::Shape("weight window does not match".into()));
        }
        let mut value: f64 = 0.0;
        let mut upper: f64 = 0.0;
        for (n, zn) in z.iter() {
            let a = self.adapted_norm(n, zn)?;
            let d = delta.at(n);
            value = value.max(a.value / d);
            upper = upper.max(a.upper() / d);
        }
        Ok(WeightedNorm { value, tail: upper - value })
    }

    /// `Γ_ω z` with `z` extended by zero outside the window.
    pub fn green_apply(&self, z: &WindowSequence) -> Result<WindowSequence> {
        self.check_seq(z)?;
        let seg = &self.seg;
        let (lo, hi) = (self.window.n_min(), self.window.n_max());
        let d = self.sys.dim();
        let id = Mat::identity(d, d);
        let mut out = Vec::with_capacity(self.window.len());
        for n in lo..=hi {
            // k = 0 term of the stable series
            let mut kernel = seg.projector(n).clone();
            let mut acc = &kernel * z.get(n);
            for k in 1..=(n - lo) {
                let m = n - k;
                kernel = kernel * seg.factor(m) * seg.projector(m);
                acc += &kernel * z.get(m);
            }
            let mut kernel = &id - seg.projector(n);
            for k in 1..=(hi - n) {
                let m = n + k;
                kernel = kernel * seg.inverse(m - 1) * (&id - seg.projector(m));
                acc -= &kernel * z.get(m);
            }
            out.push(acc);
        }
        let w = WindowSequence { window: self.window, values: out };
        if !w.is_finite() {
            return Err(Error::Numerical("Green operator produced non-finite values".into()));
        }
        Ok(w)
    }

    /// Residual of `w_n − A(σ^{n−1}ω) w_{n−1} = z_n` on interior indices,
    /// plus the two edge conditions of the zero-extended problem.
    pub fn green_residual(&self, z: &WindowSequence, w: &WindowSequence) -> Result<GreenResidual> {
        self.check_seq(z)?;
        self.check_seq(w)?;
        let (lo, hi) = (self.window.n_min(), self.window.n_max());
        let seg = &self.seg;
        let values: Vec<Vector> = ((lo + 1)..=hi)
            .map(|n| w.get(n) - seg.factor(n - 1) * w.get(n - 1) - z.get(n))
            .collect();
        let max_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let left_edge = (seg.projector(lo) * (w.get(lo) - z.get(lo))).norm();
        let right_edge = (w.get(hi) - seg.projector(hi) * w.get(hi)).norm();
        Ok(GreenResidual {
            first_index: lo + 1,
            values,
            max_norm,
            left_edge,
            right_edge,
            z_sup: z.sup_norm(),
        })
    }

    /// Samples `trials` random `z` with `‖z‖_{δ,∞} = 1` and compares
    /// `‖Γ_ω z‖_{δ,∞}` against `(1+e^{-ε})/(1−e^{-ε})`.
    pub fn green_norm_bound_check(
        &self,
        delta: &WeightSequence,
        epsilon: f64,
        trials: usize,
        seed: u64,
    ) -> Result<GreenBoundReport> {
        let lambda = self.dich.rate();
        if !(epsilon > 0.0 && epsilon <= lambda) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, {lambda}]")));
        }
        delta.check_admissible((lambda - epsilon).exp())?;
        let bound = green_bound(epsilon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.sys.dim();
        let mut max_ratio: f64 = 0.0;
        let mut max_excess = f64::NEG_INFINITY;
        for trial in 0..trials {
            let z = random_sequence(&mut rng, self.window, d, delta, trial);
            let zn = self.weighted_norm(&z, delta)?;
            if zn.value == 0.0 {
                continue;
            }
            let z = z.scale(1.0 / zn.value);
            let den = WeightedNorm { value: 1.0, tail: zn.tail / zn.value };
            let num = self.weighted_norm(&self.green_apply(&z)?, delta)?;
            max_ratio = max_ratio.max(num.value);
            max_excess = max_excess.max(num.value - bound * den.upper());
        }
        Ok(GreenBoundReport {
            bound,
            max_ratio,
            max_excess,
            trials,
            holds: max_excess <= GREEN_BOUND_SLACK,
        })
    }
}

pub const GREEN_BOUND_SLACK: f64 = 1e-6;

/// `(1 + e^{-ε}) / (1 − e^{-ε})`.
pub fn green_bound(epsilon: f64) -> f64 {
    let e = (-epsilon).exp();
    (1.0 + e) / (1.0 - e)
}

fn random_sequence(
    rng: &mut ChaCha8Rng,
    window: Window,
    d: usize,
    delta: &WeightSequence,
    trial: usize,
) -> WindowSequence {
    match trial % 4 {
        // impulse at a random index
        0 => {
            let at = rng.gen_range(window.n_min()..=window.n_max());
            WindowSequence::from_fn(window, |n| {
                if n == at {
                    Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))
                } else {
                    Vector::zeros(d)
                }
            })
        }
        // one fixed direction scaled by δ, so contributions add up
        1 => {
            let dir = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            WindowSequence::from_fn(window, |n| &dir * delta.at(n))
        }
        _ => WindowSequence::from_fn(window, |n| {
            Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)) * delta.at(n)
        }),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenResidual {
    pub first_index: i64,
    #[serde(skip)]
    pub values: Vec<Vector>,
    pub max_norm: f64,
    /// `‖Π(σ^{n_min}ω)(w_{n_min} − z_{n_min})‖`.
    pub left_edge: f64,
    /// `‖(Id − Π(σ^{n_max}ω)) w_{n_max}‖`.
    pub right_edge: f64,
    pub z_sup: f64,
}

impl GreenResidual {
    /// Interior residual scaled by `1 + sup‖z_n‖`.
    pub fn relative(&self) -> f64 {
        self.max_norm / (1.0 + self.z_sup)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenBoundReport {
    pub bound: f64,
    pub max_ratio: f64,
    /// Worst `ratio − bound · (1 + tail)`; nonpositive up to slack when the bound holds.
    pub max_excess: f64,
    pub trials: usize,
    pub holds: bool,
}

pub fn weighted_norm(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    z: &WindowSequence,
    delta: &WeightSequence,
    settings: NormSettings,
) -> Result<WeightedNorm> {
    WindowContext::new(sys, dich, omega, z.window(), settings)?.weighted_norm(z, delta)
}

fn green_context(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    window: Window,
) -> Result<WindowContext> {
    // Γ_ω itself needs no horizon; the settings only matter for norms.
    let settings = NormSettings { horizon: 1, allow_zero_margin: true };
    WindowContext::new(sys, dich, omega, window, settings)
}

pub fn green_apply(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    z: &WindowSequence,
) -> Result<WindowSequence> {
    green_context(sys, dich, omega, z.window())?.green_apply(z)
}

pub fn green_residual(
    sys: &CocycleSystem,
    dich: &DichotomyData,
    omega: &BasePoint,
    z: &WindowSequence,
    w: &WindowSequence,
) -> Result<GreenResidual> {
    green_context(sys, dich, omega, z.window())?.green_residual(z, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::DrivingSystem;
    use nalgebra::{dmatrix, dvector};

    fn scalar() -> (CocycleSystem, DichotomyData) {
        let sys = CocycleSystem::constant(DrivingSystem::default_rotation(), dmatrix![0.5]);
        let dich = DichotomyData::uniform(2f64.ln(), 0.0, dmatrix![1.0], 1.0).unwrap();
        (sys, dich)
    }

    fn diag() -> (CocycleSystem, DichotomyData) {
        let sys = CocycleSystem::constant(DrivingSystem::default_rotation(), dmatrix![0.5, 0.0; 0.0, 2.0]);
        let dich = DichotomyData::uniform(2f64.ln(), 0.0, dmatrix![1.0, 0.0; 0.0, 0.0], 1.0).unwrap();
        (sys, dich)
    }

    fn settings() -> NormSettings {
        NormSettings::new(16).allowing_zero_margin()
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(1, 4).is_err());
        assert!(Window::new(-4, -1).is_err());
        assert!(Window::new(0, (1 << 16) as i64).is_err());
        assert_eq!(Window::new(-4, 4).unwrap().len(), 9);
        let seq = WindowSequence::new(Window::new(0, 1).unwrap(), vec![dvector![1.0], dvector![f64::NAN]]);
        assert!(seq.is_err());
    }

    #[test]
    fn admissibility_reports_index() {
        let w = Window::new(-2, 2).unwrap();
        let err = WeightSequence::new(w, vec![1.0, 1.0, 1.0, 3.0, 3.0], 2.0).unwrap_err();
        assert!(matches!(err, Error::Inadmissible { index: 0, .. }));
    }

    #[test]
    fn weighted_norm_examples() {
        let (sys, dich) = scalar();
        let w = Window::new(-4, 4).unwrap();
        let ones = WeightSequence::new(w, vec![1.0; 9], 1.0).unwrap();
        let omega = BasePoint::rotation(0.0);
        let zero = WindowSequence::zeros(w, 1);
        assert_eq!(weighted_norm(&sys, &dich, &omega, &zero, &ones, settings()).unwrap().value, 0.0);
        let impulse = WindowSequence::from_fn(w, |n| if n == 0 { dvector![1.0] } else { dvector![0.0] });
        let v = weighted_norm(&sys, &dich, &omega, &impulse, &ones, settings()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_dominates_each_index() {
        let (sys, dich) = diag();
        let w = Window::new(-6, 6).unwrap();
        let delta = WeightSequence::new(w, w.indices().map(|n| 1.0 + n.abs() as f64).collect(), 2.0).unwrap();
        let omega = BasePoint::rotation(0.3);
        let ctx = WindowContext::new(&sys, &dich, &omega, w, settings()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let z = WindowSequence::from_fn(w, |_| dvector![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let total = ctx.weighted_norm(&z, &delta).unwrap().value;
            for (n, zn) in z.iter() {
                assert!(total >= ctx.adapted_norm(n, zn).unwrap().value / delta.at(n));
            }
        }
    }

    #[test]
    fn green_of_zero_is_zero() {
        let (sys, dich) = diag();
        let w = Window::new(-5, 5).unwrap();
        let out = green_apply(&sys, &dich, &BasePoint::rotation(0.0), &WindowSequence::zeros(w, 2)).unwrap();
        assert!(out.sup_norm() == 0.0);
    }

    #[test]
    fn scalar_impulse_response() {
        let (sys, dich) = scalar();
        let w = Window::new(-4, 4).unwrap();
        let omega = BasePoint::rotation(0.0);
        let z = WindowSequence::from_fn(w, |n| if n == 0 { dvector![1.0] } else { dvector![0.0] });
        let out = green_apply(&sys, &dich, &omega, &z).unwrap();
        for n in w.indices() {
            let expected = if n >= 0 { 0.5f64.powi(n as i32) } else { 0.0 };
            assert_eq!(out.get(n)[0], expected, "n = {n}");
        }
        let res = green_residual(&sys, &dich, &omega, &z, &out).unwrap();
        assert_eq!(res.max_norm, 0.0);
        assert_eq!(res.first_index, -3);
    }

    #[test]
    fn residual_vanishes_for_diag() {
        let (sys, dich) = diag();
        let w = Window::new(-8, 8).unwrap();
        let omega = BasePoint::rotation(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let z = WindowSequence::from_fn(w, |_| dvector![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let out = green_apply(&sys, &dich, &omega, &z).unwrap();
            let res = green_residual(&sys, &dich, &omega, &z, &out).unwrap();
            assert!(res.relative() <= 1e-10);
            assert!(res.left_edge <= 1e-12 && res.right_edge <= 1e-12);
        }
    }

    #[test]
    fn bound_formula() {
        assert!((green_bound(2f64.ln()) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn bound_check_scalar_impulse_and_random() {
        let (sys, dich) = scalar();
        let w = Window::new(-10, 10).unwrap();
        let omega = BasePoint::rotation(0.0);
        let ctx = WindowContext::new(&sys, &dich, &omega, w, settings()).unwrap();
        let ones = WeightSequence::new(w, vec![1.0; w.len()], 1.0).unwrap();
        let impulse = WindowSequence::from_fn(w, |n| if n == 0 { dvector![1.0] } else { dvector![0.0] });
        let ratio = ctx.weighted_norm(&ctx.green_apply(&impulse).unwrap(), &ones).unwrap().value
            / ctx.weighted_norm(&impulse, &ones).unwrap().value;
        assert!(ratio <= 3.0);
        let rep = ctx.green_norm_bound_check(&ones, 2f64.ln(), 100, 3).unwrap();
        assert!(rep.holds && rep.max_ratio <= 3.0 + 1e-6, "{rep:?}");
    }

    #[test]
    fn bound_check_rejects_inadmissible_weight() {
        let (sys, dich) = diag();
        let w = Window::new(-3, 3).unwrap();
        let ctx = WindowContext::new(&sys, &dich, &BasePoint::rotation(0.0), w, settings()).unwrap();
        let steep = WeightSequence::new(w, w.indices().map(|n| 3f64.powi(n.abs() as i32)).collect(), 3.0).unwrap();
        let err = ctx.green_norm_bound_check(&steep, 2f64.ln() / 2.0, 5, 0).unwrap_err();
        assert!(matches!(err, Error::Inadmissible { .. }));
    }
}

//! Independent oracles and extra cocycles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{dmatrix, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shadow_rds::cocycle::{CocycleSystem, DichotomyData, NormSettings};
use shadow_rds::driving::{BasePoint, DrivingSystem};
use shadow_rds::green::{Window, WindowContext, WindowSequence};
use shadow_rds::linalg::Vector;
use shadow_rds::lyapunov::invert_step;
use shadow_rds::shadowing::Perturbation;

/// Dense least-squares solve of the windowed boundary-value problem
///
///   w_n − A(σ^{n−1}ω) w_{n−1} = z_n          for n_min < n <= n_max
///   Π(σ^{n_min}ω) w_{n_min} = Π(σ^{n_min}ω) z_{n_min}
///   (I − Π(σ^{n_max}ω)) w_{n_max} = 0
///
/// built straight from the cocycle and projector callbacks, without any of
/// the library's precomputed segments.
pub struct DenseGreen {
    window: Window,
    d: usize,
    rows: usize,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    proj_lo: DMatrix<f64>,
}

impl DenseGreen {
    pub fn new(sys: &CocycleSystem, dich: &DichotomyData, omega: &BasePoint, window: Window) -> Self {
        let d = sys.dim();
        let len = window.len();
        let rows = (len - 1) * d + 2 * d;
        let mut m = DMatrix::<f64>::zeros(rows, len * d);
        let lo = window.n_min();
        for n in (lo + 1)..=window.n_max() {
            let i = (n - lo) as usize;
            let r = (i - 1) * d;
            let a = sys.factor(&sys.base().step(omega, n - 1).unwrap(), n - 1).unwrap();
            for k in 0..d {
                m[(r + k, i * d + k)] = 1.0;
            }
            m.view_mut((r, (i - 1) * d), (d, d)).copy_from(&(-a));
        }
        let at = |n: i64| sys.base().step(omega, n).unwrap();
        let proj_lo = dich.projector(&at(lo));
        let proj_hi = dich.projector(&at(window.n_max()));
        let r = (len - 1) * d;
        m.view_mut((r, 0), (d, d)).copy_from(&proj_lo);
        let comp = DMatrix::<f64>::identity(d, d) - proj_hi;
        m.view_mut((r + d, (len - 1) * d), (d, d)).copy_from(&comp);
        DenseGreen { window, d, rows, svd: m.svd(true, true), proj_lo }
    }

    pub fn solve(&self, z: &WindowSequence) -> WindowSequence {
        let d = self.d;
        let len = self.window.len();
        let lo = self.window.n_min();
        let mut rhs = DVector::<f64>::zeros(self.rows);
        for n in (lo + 1)..=self.window.n_max() {
            let i = (n - lo) as usize;
            rhs.rows_mut((i - 1) * d, d).copy_from(z.get(n));
        }
        rhs.rows_mut((len - 1) * d, d).copy_from(&(&self.proj_lo * z.get(lo)));
        let sol = self.svd.solve(&rhs, 1e-14).unwrap();
        WindowSequence::from_fn(self.window, |n| {
            let i = (n - lo) as usize;
            sol.rows(i * d, d).into_owned()
        })
    }
}

pub fn random_sequence(window: Window, d: usize, rng: &mut ChaCha8Rng) -> WindowSequence {
    WindowSequence::from_fn(window, |_| Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)))
}

/// Largest `‖a_n − b_n‖` over the window, relative to `sup‖b_n‖`.
pub fn relative_sup_diff(a: &WindowSequence, b: &WindowSequence) -> f64 {
    let diff = a.iter().map(|(n, v)| (v - b.get(n)).norm()).fold(0.0, f64::max);
    diff / b.sup_norm().max(f64::MIN_POSITIVE)
}

fn plane_rotation(d: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut g = DMatrix::<f64>::identity(d, d);
    let (s, c) = theta.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

/// Orthogonal frame depending on the rotation angle of `ω`.
fn frame4(base: &DrivingSystem, w: &BasePoint) -> DMatrix<f64> {
    let t = 2.0 * PI * base.unit_at(w, 0);
    plane_rotation(4, 0, 2, t) * plane_rotation(4, 1, 3, 2.0 * t + 0.3) * plane_rotation(4, 0, 1, 0.7)
}

/// `Q(σω) diag(0.3, 0.45, 2.2, 3) Q(ω)ᵀ` over a rotation, with the matching
/// rank-2 stable projector. Rate log 2, margin log 1.05, `K = 1`.
pub fn four_dim() -> (CocycleSystem, DichotomyData, BasePoint) {
    let base = DrivingSystem::default_rotation();
    let b = base.clone();
    let sys = CocycleSystem::new(4, base.clone(), move |w| {
        let next = b.step(w, 1).unwrap();
        let core = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, 0.45, 2.2, 3.0]));
        frame4(&b, &next) * core * frame4(&b, w).transpose()
    });
    let b = base.clone();
    let dich = DichotomyData::new(
        2f64.ln(),
        1.05f64.ln(),
        move |w| {
            let q = frame4(&b, w);
            let p = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
            &q * p * q.transpose()
        },
        |_| 1.0,
    )
    .unwrap()
    .with_bound_sup(1.0);
    (sys, dich, BasePoint::rotation(0.217))
}

/// Scalar contraction `A = 1/5` declared at rate log 4 with margin log 1.25.
/// With `ε = log 2` the weight `|n| + 1` is `e^{λ−ε}`-admissible.
pub fn scalar_fast() -> (CocycleSystem, DichotomyData, BasePoint) {
    let sys = CocycleSystem::constant(DrivingSystem::default_rotation(), dmatrix![0.2]);
    let dich = DichotomyData::uniform(4f64.ln(), 1.25f64.ln(), dmatrix![1.0], 1.0).unwrap();
    (sys, dich, BasePoint::rotation(0.5))
}

pub fn context(sys: &CocycleSystem, dich: &DichotomyData, omega: &BasePoint, window: Window) -> WindowContext {
    WindowContext::new(sys, dich, omega, window, NormSettings::new(60)).unwrap()
}

/// Sign of the backward orbit of a scalar `x` after `steps` inverse steps:
/// `+1` or `−1` once it has escaped past `escape`, `0` if still inside.
fn backward_escape(
    sys: &CocycleSystem,
    pert: &Perturbation,
    omega: &BasePoint,
    x: f64,
    steps: usize,
    escape: f64,
) -> i32 {
    let mut v = Vector::from_element(1, x);
    let mut point = *omega;
    for k in 1..=steps as i64 {
        point = sys.base().step(&point, -1).unwrap();
        let (_, a_inv) = sys.factor_with_inverse(&point, -k).unwrap();
        v = invert_step(&a_inv, pert, &point, &v, -k).unwrap();
        if v[0].abs() > escape {
            return if v[0] > 0.0 { 1 } else { -1 };
        }
    }
    0
}

/// Bisection for the unique scalar initial condition whose backward orbit
/// stays bounded: points to its right escape to `+∞`, to its left to `−∞`.
pub fn bisect_special_point(
    sys: &CocycleSystem,
    pert: &Perturbation,
    omega: &BasePoint,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let probe = |x: f64| backward_escape(sys, pert, omega, x, 200, 1e6);
    assert_eq!(probe(lo), -1, "left end must escape downwards");
    assert_eq!(probe(hi), 1, "right end must escape upwards");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid) {
            1 => hi = mid,
            -1 => lo = mid,
            _ => return mid,
        }
    }
    0.5 * (lo + hi)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact orbit of `F` on the window through `x0` at `n = 0`, pushed forward
/// with `F` and pulled back by inverting each step.
pub fn exact_orbit(ctx: &WindowContext, pert: &Perturbation, x0: &Vector) -> WindowSequence {
    let w = ctx.window();
    let seg = ctx.segment();
    let mut vals = std::collections::BTreeMap::new();
    vals.insert(0i64, x0.clone());
    let mut x = x0.clone();
    for n in 1..=w.n_max() {
        x = seg.factor(n - 1) * &x + pert.apply(seg.point(n - 1), &x);
        vals.insert(n, x.clone());
    }
    let mut x = x0.clone();
    for n in (w.n_min()..0).rev() {
        x = invert_step(seg.inverse(n), pert, seg.point(n), &x, n).unwrap();
        vals.insert(n, x.clone());
    }
    WindowSequence::from_fn(w, |n| vals[&n].clone())
}

//! Small dense helpers on top of nalgebra. Dimensions are tiny (d <= 8),
//! so everything goes through the SVD where a 2-norm is needed.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Operator 2-norm.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Smallest and largest singular value.
pub fn singular_range(m: &Mat) -> (f64, f64) {
    if m.nrows() == 1 && m.ncols() == 1 {
        let a = m[(0, 0)].abs();
        return (a, a);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    (min, max)
}

/// 2-norm condition number; infinite for a singular matrix.
pub fn condition(m: &Mat) -> f64 {
    let (min, max) = singular_range(m);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Euclidean norm scaled by the largest entry, so that it neither
/// overflows nor underflows where the plain sum of squares would.
pub fn scaled_norm(v: &Vector) -> f64 {
    let m = v.amax();
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * (v / m).norm()
}

pub fn is_finite_mat(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn is_finite_vec(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Relative distance `|a - b| / max(|b|, 1)` in the operator norm.
pub fn rel_diff(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(a - b)) / op_norm(b).max(1.0)
}

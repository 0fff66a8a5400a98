//! Small linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, Matrix3, UnitQuaternion, Vector3, Vector6};

/// Skew-symmetric cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn linear(w: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(w[0], w[1], w[2])
}

pub fn angular(w: &Vector6<f64>) -> Vector3<f64> {
    Vector3::new(w[3], w[4], w[5])
}

pub fn stack(top: &Vector3<f64>, bottom: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(top.x, top.y, top.z, bottom.x, bottom.y, bottom.z)
}

/// Rotation vector (axis * angle) of a unit quaternion, angle in `[0, π]`.
pub fn rotation_vector(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    // Pick the hemisphere with w >= 0 so the angle never exceeds π.
    let q = if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        *q
    };
    q.scaled_axis()
}

/// Numerical rank from singular values, relative tolerance.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn is_symmetric(m: &Matrix3<f64>, tol: f64) -> bool {
    (m - m.transpose()).amax() <= tol
}

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::math::skew;

/// A set of unit directions on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vector3<f64>>,
}

impl DirectionSet {
    /// Wrap existing vectors. Vectors already unit to 1e-12 are kept bit-for-bit,
    /// others are normalised; zero or non-finite vectors are rejected.
    pub fn from_vectors(vectors: Vec<Vector3<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Argument("direction set must not be empty".into()));
        }
        let mut directions = Vec::with_capacity(vectors.len());
        for v in vectors {
            let n = v.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Argument("directions must be finite and nonzero".into()));
            }
            directions.push(if (n - 1.0).abs() <= 1e-12 { v } else { v / n });
        }
        Ok(Self { directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.directions
    }

    pub fn get(&self, i: usize) -> &Vector3<f64> {
        &self.directions[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.directions.iter()
    }

    /// Apply a rotation to every direction.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self { directions: self.directions.iter().map(|d| (r * d).normalize()).collect() }
    }

    /// Indices and cosines of the `k` directions closest to `d` (largest dot product first).
    pub fn nearest(&self, d: &Vector3<f64>, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.directions.len());
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        for (i, p) in self.directions.iter().enumerate() {
            let c = p.dot(d);
            if best.len() < k || c > best[best.len() - 1].1 {
                let pos = best.iter().position(|&(_, bc)| c > bc).unwrap_or(best.len());
                best.insert(pos, (i, c));
                best.truncate(k);
            }
        }
        best
    }
}

/// Spherical Fibonacci lattice: `φ_i = arccos(1 − 2i/n)`, `θ_i = π(1 + √5) i`.
pub fn fibonacci_directions(n_s: usize) -> Result<DirectionSet> {
    if n_s == 0 {
        return Err(Error::Argument("fibonacci_directions needs n_s >= 1".into()));
    }
    let golden = std::f64::consts::PI * (1.0 + 5f64.sqrt());
    let directions = (0..n_s)
        .map(|i| {
            let phi = (1.0 - 2.0 * i as f64 / n_s as f64).clamp(-1.0, 1.0).acos();
            let theta = golden * i as f64;
            Vector3::new(theta.cos() * phi.sin(), theta.sin() * phi.sin(), phi.cos())
        })
        .collect();
    Ok(DirectionSet { directions })
}

/// Rotation taking the unit vector `d` onto `+z`.
///
/// Uses `R = I + K + K² / (1 + c)` with `K = [d × e_z]^×` and `c = d·e_z`,
/// which equals the `(1 − c)/s²` form away from the poles. For the lower
/// hemisphere the vector is first flipped by `diag(1, −1, −1)` so the formula
/// is only ever evaluated with `c ≥ 0`; `d = −e_z` maps to exactly that flip.
pub fn rotation_to_z(d: &Vector3<f64>) -> Matrix3<f64> {
    let d = d.normalize();
    if d.z < 0.0 {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        return rotation_to_z_upper(&(flip * d)) * flip;
    }
    rotation_to_z_upper(&d)
}

fn rotation_to_z_upper(d: &Vector3<f64>) -> Matrix3<f64> {
    let v = d.cross(&Vector3::z());
    let c = d.z;
    if v.norm() == 0.0 {
        return Matrix3::identity();
    }
    let k = skew(&v);
    Matrix3::identity() + k + k * k / (1.0 + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_direction_is_north_pole() {
        let s = fibonacci_directions(10).unwrap();
        assert!((s.get(0) - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn two_point_lattice_second_point() {
        let s = fibonacci_directions(2).unwrap();
        let theta = std::f64::consts::PI * (1.0 + 5f64.sqrt());
        let expect = Vector3::new(theta.cos(), theta.sin(), 0.0);
        assert!((s.get(1) - expect).norm() < 1e-15);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(matches!(fibonacci_directions(0), Err(Error::Argument(_))));
    }

    #[test]
    fn unit_norm_and_distinct() {
        for n in [1, 2, 3, 17, 500] {
            let s = fibonacci_directions(n).unwrap();
            for (i, p) in s.iter().enumerate() {
                assert!((p.norm() - 1.0).abs() < 1e-12);
                for q in &s.directions()[..i] {
                    assert!((p - q).norm() > 1e-9);
                }
            }
        }
    }

    #[test]
    fn rotation_to_z_special_cases() {
        assert_eq!(rotation_to_z(&Vector3::z()), Matrix3::identity());
        let r = rotation_to_z(&Vector3::x());
        assert!((r * Vector3::x() - Vector3::z()).norm() < 1e-12);
        let r = rotation_to_z(&-Vector3::z());
        assert_eq!(r, Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)));
    }

    #[test]
    fn rotation_to_z_orthonormal_everywhere() {
        let dirs = fibonacci_directions(300).unwrap();
        let extra = [Vector3::new(1e-9, 0.0, -1.0), Vector3::new(0.0, 1e-12, 1.0)];
        for d in dirs.iter().chain(extra.iter()) {
            let d = d.normalize();
            let r = rotation_to_z(&d);
            assert!((r * d - Vector3::z()).norm() < 1e-9);
            assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_orders_by_cosine() {
        let s = fibonacci_directions(50).unwrap();
        let q = Vector3::new(0.3, -0.2, 0.9).normalize();
        let near = s.nearest(&q, 3);
        let mut all: Vec<f64> = s.iter().map(|p| p.dot(&q)).collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (k, (_, c)) in near.iter().enumerate() {
            assert_eq!(*c, all[k]);
        }
    }
}

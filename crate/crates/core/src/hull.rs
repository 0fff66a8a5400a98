//! Incremental 3D convex hull.

use std::collections::HashSet;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Triangulated convex hull with outward-oriented faces.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexHull {
    pub points: Vec<Vector3<f64>>,
    /// Counter-clockwise seen from outside.
    pub faces: Vec<[usize; 3]>,
}

/// Supporting plane `n·x ≤ offset` with unit `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

fn face_normal(p: &[Vector3<f64>], f: &[usize; 3]) -> Vector3<f64> {
    (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]]))
}

impl ConvexHull {
    /// Hull of `points`; fails with a degeneracy error when they do not span 3D.
    pub fn new(points: &[Vector3<f64>]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Degenerate(format!("hull needs 4 points, got {}", points.len())));
        }
        let lo = points.iter().fold(Vector3::repeat(f64::INFINITY), |a, p| a.inf(p));
        let hi = points.iter().fold(Vector3::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
        let scale = (hi - lo).norm();
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Degenerate("hull points coincide or are not finite".into()));
        }
        let eps = 1e-10 * scale;

        let i0 = 0;
        let i1 = (0..points.len())
            .max_by(|&a, &b| (points[a] - points[i0]).norm().total_cmp(&(points[b] - points[i0]).norm()))
            .unwrap();
        let axis = points[i1] - points[i0];
        let i2 = (0..points.len())
            .max_by(|&a, &b| {
                axis.cross(&(points[a] - points[i0])).norm().total_cmp(&axis.cross(&(points[b] - points[i0])).norm())
            })
            .unwrap();
        let n = axis.cross(&(points[i2] - points[i0]));
        if n.norm() <= eps * scale {
            return Err(Error::Degenerate("hull points are collinear".into()));
        }
        let i3 = (0..points.len())
            .max_by(|&a, &b| n.dot(&(points[a] - points[i0])).abs().total_cmp(&n.dot(&(points[b] - points[i0])).abs()))
            .unwrap();
        if n.dot(&(points[i3] - points[i0])).abs() <= eps * n.norm() {
            return Err(Error::Degenerate("hull points are coplanar".into()));
        }

        let mut faces: Vec<[usize; 3]> = vec![[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i2, i3, i0]];
        let inside = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
        for f in &mut faces {
            if face_normal(points, f).dot(&(inside - points[f[0]])) > 0.0 {
                f.swap(1, 2);
            }
        }

        let seed = [i0, i1, i2, i3];
        for (idx, p) in points.iter().enumerate() {
            if seed.contains(&idx) {
                continue;
            }
            let visible: Vec<bool> = faces
                .iter()
                .map(|f| {
                    let nrm = face_normal(points, f);
                    nrm.dot(&(p - points[f[0]])) > eps * nrm.norm()
                })
                .collect();
            if !visible.iter().any(|&v| v) {
                continue;
            }
            let edges: HashSet<(usize, usize)> = faces
                .iter()
                .zip(&visible)
                .filter(|(_, &v)| v)
                .flat_map(|(f, _)| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
                .collect();
            let mut next: Vec<[usize; 3]> = faces.iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| *f).collect();
            for f in faces.iter().zip(&visible).filter(|(_, &v)| v).map(|(f, _)| f) {
                for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                    if !edges.contains(&(b, a)) {
                        next.push([a, b, idx]);
                    }
                }
            }
            faces = next;
        }
        Ok(Self { points: points.to_vec(), faces })
    }

    /// Indices of points that are hull vertices, ascending.
    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn planes(&self) -> Vec<Plane> {
        self.faces
            .iter()
            .map(|f| {
                let normal = face_normal(&self.points, f).normalize();
                Plane { normal, offset: normal.dot(&self.points[f[0]]) }
            })
            .collect()
    }

    /// Largest signed plane distance; ≤ 0 inside.
    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        self.planes().iter().map(|p| p.normal.dot(x) - p.offset).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| self.points[f[0]].dot(&self.points[f[1]].cross(&self.points[f[2]])))
            .sum::<f64>()
            / 6.0
    }

    pub fn area(&self) -> f64 {
        self.faces.iter().map(|f| face_normal(&self.points, f).norm()).sum::<f64>() / 2.0
    }

    /// `V − E + F` of the triangulated surface.
    pub fn euler_characteristic(&self) -> i64 {
        let edges: HashSet<(usize, usize)> =
            self.faces.iter().flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]).map(|(a, b)| (a.min(b), a.max(b))).collect();
        self.vertices().len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }
}

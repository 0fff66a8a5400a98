//! Planar α-shape area of a projected point cloud.

use delaunator::{triangulate, Point};
use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::directions::rotation_to_z;
use crate::error::{Error, Result};
use crate::vehicle::Assembly;

/// Radius parameter of the α-complex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaRadius {
    /// Fixed radius in metres.
    Fixed(f64),
    /// A multiple of the mean projected point spacing `sqrt(hull_area / n)`,
    /// chosen per cloud.
    SpacingMultiple(f64),
}

impl AlphaRadius {
    pub fn validate(&self) -> Result<()> {
        let (AlphaRadius::Fixed(a) | AlphaRadius::SpacingMultiple(a)) = *self;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Argument(format!("alpha must be positive, got {a}")));
        }
        Ok(())
    }
}

/// Result of an α-shape area evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    /// Set when the cloud is collinear (or otherwise has no 2-D extent).
    pub degenerate: bool,
    /// The α radius actually used.
    pub alpha: f64,
}

/// Area of the α-shape of a planar cloud: the summed area of Delaunay
/// triangles whose circumradius is below α.
pub fn alpha_shape_area(points: &[Vector2<f64>], alpha: AlphaRadius) -> Result<AreaEstimate> {
    if points.len() < 3 {
        return Err(Error::Argument(format!(
            "alpha shape needs at least 3 points, got {}",
            points.len()
        )));
    }
    alpha.validate()?;
    let pts: Vec<Point> = points.iter().map(|p| Point { x: p.x, y: p.y }).collect();
    let tri = triangulate(&pts);
    if tri.triangles.is_empty() {
        return Ok(AreaEstimate { area: 0.0, degenerate: true, alpha: 0.0 });
    }
    let radius = match alpha {
        AlphaRadius::Fixed(a) => a,
        AlphaRadius::SpacingMultiple(k) => {
            let hull = polygon_area(tri.hull.iter().map(|&i| points[i]));
            k * (hull / points.len() as f64).sqrt()
        }
    };
    let mut area = 0.0;
    for t in tri.triangles.chunks_exact(3) {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        let ab = (b - a).norm();
        let bc = (c - b).norm();
        let ca = (a - c).norm();
        let twice = ((b - a).perp(&(c - a))).abs();
        if twice == 0.0 {
            continue;
        }
        let circumradius = ab * bc * ca / (2.0 * twice);
        if circumradius < radius {
            area += 0.5 * twice;
        }
    }
    Ok(AreaEstimate { area, degenerate: area == 0.0, alpha: radius })
}

fn polygon_area(vertices: impl Iterator<Item = Vector2<f64>>) -> f64 {
    let v: Vec<_> = vertices.collect();
    let n = v.len();
    let twice: f64 = (0..n).map(|i| v[i].perp(&v[(i + 1) % n])).sum();
    0.5 * twice.abs()
}

/// Project a 3-D cloud onto the plane orthogonal to `d` and return its α-shape area.
pub fn projected_area(points: &[Vector3<f64>], d: &Vector3<f64>, alpha: AlphaRadius) -> Result<AreaEstimate> {
    let n = d.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Argument("projection direction must be nonzero".into()));
    }
    let r = rotation_to_z(&(d / n));
    let projected: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| {
            let q = r * p;
            Vector2::new(q.x, q.y)
        })
        .collect();
    alpha_shape_area(&projected, alpha)
}

/// Uniform samples inside every module cube of the assembly, assembly frame.
///
/// Deterministic for a fixed seed. Modules are sampled in order from one stream.
pub fn sample_body_points(assembly: &Assembly, count_per_module: usize, seed: u64) -> Result<Vec<Vector3<f64>>> {
    if count_per_module == 0 {
        return Err(Error::Argument("need at least one sample per module".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 0.5 * assembly.edge_length();
    let mut out = Vec::with_capacity(count_per_module * assembly.len());
    for i in 0..assembly.len() {
        let c = assembly.module_center(i);
        for _ in 0..count_per_module {
            let u = Vector3::new(
                rng.random_range(-h..h),
                rng.random_range(-h..h),
                rng.random_range(-h..h),
            );
            out.push(c + u);
        }
    }
    Ok(out)
}

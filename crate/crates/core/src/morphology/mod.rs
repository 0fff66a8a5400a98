//! Smoothness energies of radial surfaces built over direction sets.

mod harmonics;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::capability::{PowerSpace, WrenchSpace};
use crate::error::{Error, Result};
use crate::hull::ConvexHull;
use crate::hydro::DirectionSet;

pub use harmonics::{dirichlet_energy, real_sh, sh_count, sh_index, DirichletResult, DEFAULT_L_MAX};

/// Surface with vertex `i` at `radii[i] · directions[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSurface {
    pub directions: DirectionSet,
    pub radii: Vec<f64>,
    /// Outward-oriented triangles from the hull of the unit directions.
    pub faces: Vec<[usize; 3]>,
}

impl RadialSurface {
    pub fn new(directions: DirectionSet, radii: Vec<f64>) -> Result<Self> {
        let n = directions.len();
        if radii.len() != n {
            return Err(Error::Argument(format!("{} radii for {n} directions", radii.len())));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Argument("radii must be finite and non-negative".into()));
        }
        let zeros = radii.iter().filter(|&&r| r == 0.0).count();
        if 2 * zeros > n {
            return Err(Error::Degenerate(format!("{zeros} of {n} radii are zero")));
        }
        let hull = ConvexHull::new(directions.directions())?;
        if hull.vertices().len() != n {
            return Err(Error::Topology(format!(
                "only {} of {n} directions lie on their convex hull",
                hull.vertices().len()
            )));
        }
        let surface = Self { directions, radii, faces: hull.faces };
        if surface.euler_characteristic() != 2 {
            return Err(Error::Topology("direction hull is not a closed sphere".into()));
        }
        Ok(surface)
    }

    pub fn from_wrench_space(space: &WrenchSpace) -> Result<Self> {
        Self::new(space.directions.clone(), space.extents.clone())
    }

    /// Unattainable directions become zero radii.
    pub fn from_power_space(space: &PowerSpace) -> Result<Self> {
        Self::new(space.directions.clone(), space.attainable_radii())
    }

    pub fn vertex(&self, i: usize) -> Vector3<f64> {
        self.directions.get(i) * self.radii[i]
    }

    pub fn vertices(&self) -> Vec<Vector3<f64>> {
        (0..self.radii.len()).map(|i| self.vertex(i)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashMap::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *edges.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
        self.radii.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Every edge shared by exactly two faces with opposite orientation.
    pub fn is_closed(&self) -> bool {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for e in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &c)| c == 1 && directed.get(&(b, a)) == Some(&1))
    }

    /// Wavefront OBJ text.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in self.vertices() {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }
}

/// Per-vertex discrete curvature quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub mean: Vec<f64>,
    /// Angle defect `2π − Σθ`, i.e. `K_i a_i`.
    pub angle_defect: Vec<f64>,
    pub vertex_area: Vec<f64>,
}

fn angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

pub fn curvature(surface: &RadialSurface) -> Curvature {
    let x = surface.vertices();
    let n = x.len();
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut laplace = vec![Vector3::zeros(); n];
    let mut area = vec![0.0; n];
    let mut angle_sum = vec![0.0; n];
    for f in &surface.faces {
        let p = [x[f[0]], x[f[1]], x[f[2]]];
        let e = |i: usize, j: usize| p[j] - p[i];
        let th0 = angle(&e(0, 1), &e(0, 2));
        let th1 = angle(&e(1, 2), &e(1, 0));
        // Closing the triangle this way keeps each face's angle sum at π even when it degenerates.
        let th = [th0, th1, PI - th0 - th1];
        for k in 0..3 {
            angle_sum[f[k]] += th[k];
        }
        let tri_area = 0.5 * e(0, 1).cross(&e(0, 2)).norm();
        if tri_area <= 1e-14 * scale * scale {
            continue;
        }
        let cot: Vec<f64> = th.iter().map(|t| t.cos() / t.sin()).collect();
        for k in 0..3 {
            let (i, j, o) = (f[(k + 1) % 3], f[(k + 2) % 3], k);
            // Edge (i, j) is opposite corner k.
            let w = cot[o];
            laplace[i] += (x[i] - x[j]) * w;
            laplace[j] += (x[j] - x[i]) * w;
        }
        let obtuse = th.iter().position(|&t| t > PI / 2.0);
        for k in 0..3 {
            let a = match obtuse {
                Some(o) if o == k => tri_area / 2.0,
                Some(_) => tri_area / 4.0,
                None => {
                    let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                    (e(k, j).norm_squared() * cot[l] + e(k, l).norm_squared() * cot[j]) / 8.0
                }
            };
            area[f[k]] += a;
        }
    }
    let mean = (0..n).map(|i| if area[i] > 0.0 { laplace[i].norm() / (4.0 * area[i]) } else { 0.0 }).collect();
    let angle_defect = angle_sum.iter().map(|s| 2.0 * PI - s).collect();
    Curvature { mean, angle_defect, vertex_area: area }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WillmoreResult {
    pub energy: f64,
    /// `Σ H² a`.
    pub bending: f64,
    /// `Σ K a`.
    pub total_gaussian: f64,
}

/// `Σ H_i² a_i − Σ K_i a_i`.
pub fn willmore_energy(surface: &RadialSurface) -> Result<WillmoreResult> {
    if !surface.is_closed() {
        return Err(Error::Topology("Willmore energy needs a closed oriented mesh".into()));
    }
    let c = curvature(surface);
    let bending = c.mean.iter().zip(&c.vertex_area).map(|(h, a)| h * h * a).sum::<f64>();
    let total_gaussian = c.angle_defect.iter().sum::<f64>();
    Ok(WillmoreResult { energy: bending - total_gaussian, bending, total_gaussian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::fibonacci_directions;

    fn sphere(n: usize, r: f64) -> RadialSurface {
        RadialSurface::new(fibonacci_directions(n).unwrap(), vec![r; n]).unwrap()
    }

    #[test]
    fn unit_sphere_mesh() {
        let s = sphere(200, 1.0);
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.is_closed());
        let w = willmore_energy(&s).unwrap();
        assert!((w.total_gaussian - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn tetrahedral_minimum() {
        let dirs = DirectionSet::from_vectors(vec![
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ])
        .unwrap();
        let s = RadialSurface::new(dirs, vec![1.0; 4]).unwrap();
        assert_eq!(s.faces.len(), 4);
        assert!((willmore_energy(&s).unwrap().total_gaussian - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_energy_is_scale_free() {
        let a = willmore_energy(&sphere(500, 1.0)).unwrap().energy;
        let b = willmore_energy(&sphere(500, 5.0)).unwrap().energy;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn mostly_zero_radii_rejected() {
        let mut r = vec![0.0; 20];
        r[0] = 1.0;
        assert!(matches!(RadialSurface::new(fibonacci_directions(20).unwrap(), r), Err(Error::Degenerate(_))));
    }

    #[test]
    fn obj_export() {
        let s = sphere(12, 1.0);
        let text = s.to_obj();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 20);
    }
}

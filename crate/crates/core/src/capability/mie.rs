//! Maximum-volume inscribed ellipsoid of a convex hull, by a log-barrier Newton method.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use super::WrenchSpace;
use crate::error::{Error, Result};
use crate::hull::{ConvexHull, Plane};

type Vec9 = SVector<f64, 9>;
type Mat9 = SMatrix<f64, 9, 9>;

/// `{ B u + c : ‖u‖ ≤ 1 }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipsoid {
    pub center: Vector3<f64>,
    pub shape: Matrix3<f64>,
}

impl Ellipsoid {
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.shape.determinant()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MieResult {
    pub volume: f64,
    pub degenerate: bool,
    pub ellipsoid: Option<Ellipsoid>,
}

impl MieResult {
    fn degenerate() -> Self {
        Self { volume: 0.0, degenerate: true, ellipsoid: None }
    }
}

pub fn mie_volume(space: &WrenchSpace) -> Result<MieResult> {
    if space.extents.iter().all(|&l| l <= 0.0) {
        return Ok(MieResult::degenerate());
    }
    mie_volume_of_points(&space.boundary_points())
}

/// MIE of the convex hull of `points`; flat hulls report zero volume with the degeneracy flag.
pub fn mie_volume_of_points(points: &[Vector3<f64>]) -> Result<MieResult> {
    let hull = match ConvexHull::new(points) {
        Ok(h) => h,
        Err(Error::Degenerate(_)) => return Ok(MieResult::degenerate()),
        Err(e) => return Err(e),
    };
    let verts = hull.vertices();
    let scale = verts.iter().map(|&i| points[i].norm()).fold(0.0, f64::max);
    let centroid = verts.iter().map(|&i| points[i]).sum::<Vector3<f64>>() / verts.len() as f64;
    let planes: Vec<Plane> = hull
        .planes()
        .into_iter()
        .map(|p| Plane { normal: p.normal, offset: (p.offset - p.normal.dot(&centroid)) / scale })
        .collect();
    let e = inscribed_ellipsoid(&planes)?;
    let ellipsoid = Ellipsoid { center: e.center * scale + centroid, shape: e.shape * scale };
    Ok(MieResult { volume: ellipsoid.volume(), degenerate: false, ellipsoid: Some(ellipsoid) })
}

fn shape_of(theta: &Vec9) -> Matrix3<f64> {
    Matrix3::new(theta[0], theta[3], theta[4], theta[3], theta[1], theta[5], theta[4], theta[5], theta[2])
}

/// `B a = G θ_B`.
fn shape_map(a: &Vector3<f64>) -> SMatrix<f64, 3, 6> {
    SMatrix::<f64, 3, 6>::from_row_slice(&[
        a.x, 0.0, 0.0, a.y, a.z, 0.0, //
        0.0, a.y, 0.0, a.x, 0.0, a.z, //
        0.0, 0.0, a.z, 0.0, a.x, a.y,
    ])
}

fn basis(k: usize) -> Matrix3<f64> {
    let (i, j) = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)][k];
    let mut e = Matrix3::zeros();
    e[(i, j)] = 1.0;
    e[(j, i)] = 1.0;
    e
}

/// Slacks `b_i − aᵢᵀc − ‖B aᵢ‖`, or `None` outside the domain.
fn slacks(planes: &[Plane], theta: &Vec9) -> Option<Vec<f64>> {
    let b = shape_of(theta);
    b.cholesky()?;
    let c = Vector3::new(theta[6], theta[7], theta[8]);
    let s: Vec<f64> = planes.iter().map(|p| p.offset - p.normal.dot(&c) - (b * p.normal).norm()).collect();
    s.iter().all(|&x| x > 0.0).then_some(s)
}

fn barrier(planes: &[Plane], theta: &Vec9, t: f64) -> Option<f64> {
    let s = slacks(planes, theta)?;
    Some(-t * shape_of(theta).determinant().ln() - s.iter().map(|x| x.ln()).sum::<f64>())
}

fn derivatives(planes: &[Plane], theta: &Vec9, t: f64) -> (Vec9, Mat9) {
    let b = shape_of(theta);
    let b_inv = b.try_inverse().unwrap_or_else(Matrix3::zeros);
    let c = Vector3::new(theta[6], theta[7], theta[8]);
    let mut grad = Vec9::zeros();
    let mut hess = Mat9::zeros();
    let mats: Vec<Matrix3<f64>> = (0..6).map(|k| b_inv * basis(k)).collect();
    for k in 0..6 {
        grad[k] = -t * mats[k].trace();
        for l in 0..6 {
            hess[(k, l)] = t * (mats[k] * mats[l]).trace();
        }
    }
    for p in planes {
        let g_map = shape_map(&p.normal);
        let u = b * p.normal;
        let un = u.norm();
        let s = p.offset - p.normal.dot(&c) - un;
        let mut dg = Vec9::zeros();
        dg.fixed_rows_mut::<6>(0).copy_from(&(-(g_map.transpose() * u) / un));
        dg.fixed_rows_mut::<3>(6).copy_from(&(-p.normal));
        grad -= dg / s;
        hess += dg * dg.transpose() / (s * s);
        let proj = (Matrix3::identity() - u * u.transpose() / (un * un)) / un;
        let curv = g_map.transpose() * proj * g_map / s;
        let mut block = hess.fixed_view_mut::<6, 6>(0, 0);
        block += curv;
    }
    (grad, hess)
}

/// Planes must enclose the origin strictly.
fn inscribed_ellipsoid(planes: &[Plane]) -> Result<Ellipsoid> {
    let margin = planes.iter().map(|p| p.offset).fold(f64::INFINITY, f64::min);
    if !(margin > 0.0) {
        return Err(Error::Degenerate("inscribed ellipsoid start point is not interior".into()));
    }
    let mut theta = Vec9::zeros();
    for k in 0..3 {
        theta[k] = 0.5 * margin;
    }
    let m = planes.len() as f64;
    let mut t = 1.0;
    for _ in 0..60 {
        for _ in 0..200 {
            let (grad, hess) = derivatives(planes, &theta, t);
            let step = match hess.cholesky() {
                Some(ch) => ch.solve(&(-grad)),
                None => return Err(Error::Conditioning("inscribed ellipsoid Hessian is not positive definite".into())),
            };
            let decrement = -grad.dot(&step);
            if decrement / 2.0 < 1e-12 {
                break;
            }
            let f0 = barrier(planes, &theta, t).unwrap();
            let mut s = 1.0;
            loop {
                let trial = theta + step * s;
                if let Some(f) = barrier(planes, &trial, t) {
                    if f <= f0 - 0.25 * s * decrement {
                        theta = trial;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-20 {
                    break;
                }
            }
            if s < 1e-20 {
                break;
            }
        }
        if m / t < 1e-9 {
            break;
        }
        t *= 8.0;
    }
    Ok(Ellipsoid { center: Vector3::new(theta[6], theta[7], theta[8]), shape: shape_of(&theta) })
}

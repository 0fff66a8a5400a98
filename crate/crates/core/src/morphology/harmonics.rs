//! Real orthonormal spherical harmonics and the Dirichlet roughness energy.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::hydro::DirectionSet;

pub const DEFAULT_L_MAX: usize = 10;

/// Index of `(l, m)` in the coefficient vector, `m ∈ [−l, l]`.
pub fn sh_index(l: usize, m: i64) -> usize {
    (l * l) as usize + (m + l as i64) as usize
}

pub fn sh_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Every `Y_l^m(d)` for `l ≤ l_max`, ordered by [`sh_index`].
pub fn real_sh(l_max: usize, d: &Vector3<f64>) -> Vec<f64> {
    let d = d.normalize();
    let x = d.z.clamp(-1.0, 1.0);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let phi = d.y.atan2(d.x);

    // Orthonormal associated Legendre values p[l][m] = N_l^m P_l^m(x), without Condon-Shortley phase.
    let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
    p[0][0] = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        p[m][m] = p[m - 1][m - 1] * s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
    }
    for m in 0..l_max {
        let mf = m as f64;
        p[m + 1][m] = x * (2.0 * mf + 3.0).sqrt() * p[m][m];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }

    let mut out = vec![0.0; sh_count(l_max)];
    let sqrt2 = std::f64::consts::SQRT_2;
    for l in 0..=l_max {
        out[sh_index(l, 0)] = p[l][0];
        for m in 1..=l {
            let (sin, cos) = (m as f64 * phi).sin_cos();
            out[sh_index(l, m as i64)] = sqrt2 * p[l][m] * cos;
            out[sh_index(l, -(m as i64))] = sqrt2 * p[l][m] * sin;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletResult {
    pub energy: f64,
    pub l_max: usize,
    /// `a_{l,m}` ordered by [`sh_index`].
    pub coefficients: Vec<f64>,
    pub condition_number: f64,
}

impl DirichletResult {
    pub fn coefficient(&self, l: usize, m: i64) -> f64 {
        self.coefficients[sh_index(l, m)]
    }

    /// `Σ_m a_{l,m}²` per degree.
    pub fn power_spectrum(&self) -> Vec<f64> {
        (0..=self.l_max)
            .map(|l| (-(l as i64)..=l as i64).map(|m| self.coefficient(l, m).powi(2)).sum())
            .collect()
    }
}

/// Least-squares harmonic fit of `radii` and its energy `Σ l(l+1) a_{l,m}²`.
pub fn dirichlet_energy(directions: &DirectionSet, radii: &[f64], l_max: usize) -> Result<DirichletResult> {
    let n = directions.len();
    let k = sh_count(l_max);
    if radii.len() != n {
        return Err(Error::Argument(format!("{} radii for {n} directions", radii.len())));
    }
    if radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::Argument("radii must be finite".into()));
    }
    if n < k {
        return Err(Error::Conditioning(format!("{n} directions cannot determine {k} harmonic coefficients")));
    }
    let mut y = DMatrix::zeros(n, k);
    for (i, d) in directions.iter().enumerate() {
        for (j, v) in real_sh(l_max, d).into_iter().enumerate() {
            y[(i, j)] = v;
        }
    }
    // Condition number from the Gram spectrum; the fit itself goes through Householder QR.
    let gram = y.transpose() * &y;
    let eig = gram.symmetric_eigenvalues();
    let (emax, emin) = (eig.max(), eig.min());
    let condition_number = (emax / emin.max(0.0)).sqrt();
    if !(emin > 1e-20 * emax) {
        return Err(Error::Conditioning(format!("harmonic basis is rank deficient (condition {condition_number:e})")));
    }
    let qr = y.qr();
    let qt_r = qr.q().transpose() * DVector::from_column_slice(radii);
    let a = qr
        .r()
        .solve_upper_triangular(&qt_r)
        .ok_or_else(|| Error::Conditioning("singular triangular factor in harmonic fit".into()))?;
    let mut energy = 0.0;
    for l in 0..=l_max {
        for m in -(l as i64)..=l as i64 {
            energy += (l * (l + 1)) as f64 * a[sh_index(l, m)].powi(2);
        }
    }
    Ok(DirichletResult { energy, l_max, coefficients: a.iter().copied().collect(), condition_number })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::fibonacci_directions;
    use std::f64::consts::PI;

    #[test]
    fn low_degree_closed_forms() {
        let d = Vector3::new(0.3, -0.5, 0.8).normalize();
        let y = real_sh(2, &d);
        assert!((y[sh_index(0, 0)] - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!((y[sh_index(1, 0)] - (3.0 / (4.0 * PI)).sqrt() * d.z).abs() < 1e-15);
        assert!((y[sh_index(1, 1)] - (3.0 / (4.0 * PI)).sqrt() * d.x).abs() < 1e-15);
        assert!((y[sh_index(1, -1)] - (3.0 / (4.0 * PI)).sqrt() * d.y).abs() < 1e-15);
        let c = 0.5 * (15.0 / PI).sqrt();
        assert!((y[sh_index(2, -2)] - c * d.x * d.y).abs() < 1e-14);
        assert!((y[sh_index(2, 0)] - 0.25 * (5.0 / PI).sqrt() * (3.0 * d.z * d.z - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal_under_dense_quadrature() {
        let dirs = fibonacci_directions(20000).unwrap();
        let k = sh_count(4);
        let mut gram = DMatrix::<f64>::zeros(k, k);
        for d in dirs.iter() {
            let y = DVector::from_vec(real_sh(4, d));
            gram += &y * y.transpose();
        }
        gram *= 4.0 * PI / dirs.len() as f64;
        assert!((gram - DMatrix::identity(k, k)).amax() < 2e-3);
    }

    #[test]
    fn constant_radius_has_no_energy() {
        let dirs = fibonacci_directions(300).unwrap();
        let r = dirichlet_energy(&dirs, &vec![2.5; 300], DEFAULT_L_MAX).unwrap();
        assert!(r.energy < 1e-20);
        assert!((r.coefficient(0, 0) - 2.5 * (4.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn too_few_directions() {
        let dirs = fibonacci_directions(100).unwrap();
        assert!(matches!(dirichlet_energy(&dirs, &vec![1.0; 100], 10), Err(Error::Conditioning(_))));
    }
}

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Highest supported polynomial degree; the basis is `[1, x, ..., x^5]`.
pub const MAX_DEGREE: usize = 5;

/// Polynomial in the monomial basis, coefficients ordered from the constant term up.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Argument(format!(
                "polynomial needs 1..={} coefficients, got {}",
                MAX_DEGREE + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn linear(slope: f64) -> Self {
        Self { coeffs: vec![0.0, slope] }
    }

    pub fn quadratic(k: f64) -> Self {
        Self { coeffs: vec![0.0, 0.0, k] }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }

    /// Strict monotonicity on `[lo, hi]`, checked on a dense grid.
    pub fn is_strictly_monotone(&self, lo: f64, hi: f64) -> bool {
        const GRID: usize = 1024;
        let mut sign = 0.0;
        let mut prev = self.eval(lo);
        for k in 1..=GRID {
            let x = lo + (hi - lo) * k as f64 / GRID as f64;
            let y = self.eval(x);
            let step = y - prev;
            if step == 0.0 {
                return false;
            }
            if sign == 0.0 {
                sign = step.signum();
            } else if step.signum() != sign {
                return false;
            }
            prev = y;
        }
        true
    }
}

/// One thruster in its module's frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ThrusterSpec {
    /// Mounting point, metres, module frame.
    pub position: Vector3<f64>,
    /// Unit thrust direction, module frame.
    pub direction: Vector3<f64>,
    pub f_min: f64,
    pub f_max: f64,
    /// Thrust as a function of command.
    pub cmd_poly: Polynomial,
    /// Electrical power as a function of thrust.
    pub power_poly: Polynomial,
    /// Declared command range `[lo, hi]`.
    pub cmd_range: [f64; 2],
}

impl ThrusterSpec {
    /// Default bidirectional thruster: 10 N peak, `f = 10 u` on `u ∈ [-1, 1]`, `P = 25 f²`.
    pub fn with_default_models(position: Vector3<f64>, direction: Vector3<f64>) -> Self {
        Self {
            position,
            direction: direction.normalize(),
            f_min: -10.0,
            f_max: 10.0,
            cmd_poly: Polynomial::linear(10.0),
            power_poly: Polynomial::quadratic(25.0),
            cmd_range: [-1.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.direction.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::Configuration(format!(
                "thruster direction must be a unit vector (norm {n})"
            )));
        }
        if !self.position.iter().all(|x| x.is_finite()) {
            return Err(Error::Configuration("thruster position must be finite".into()));
        }
        if !(self.f_min <= 0.0 && 0.0 <= self.f_max) || !self.f_min.is_finite() || !self.f_max.is_finite() {
            return Err(Error::Configuration(format!(
                "thrust limits must satisfy f_min <= 0 <= f_max (got [{}, {}])",
                self.f_min, self.f_max
            )));
        }
        let [lo, hi] = self.cmd_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Configuration("command range must be finite with lo < hi".into()));
        }
        if !self.cmd_poly.is_strictly_monotone(lo, hi) {
            return Err(Error::Configuration(
                "command polynomial must be strictly monotone over the command range".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct_sum() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0, 0.0, -0.25]).unwrap();
        let x: f64 = 0.7;
        let direct = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3) - 0.25 * x.powi(5);
        assert!((p.eval(x) - direct).abs() < 1e-14);
        let d = -2.0 + x + 9.0 * x * x - 1.25 * x.powi(4);
        assert!((p.derivative(x) - d).abs() < 1e-14);
    }

    #[test]
    fn rejects_oversized_polynomial() {
        assert!(Polynomial::new(vec![0.0; 7]).is_err());
        assert!(Polynomial::new(vec![]).is_err());
    }

    #[test]
    fn monotonicity_detects_turning_point() {
        assert!(Polynomial::linear(10.0).is_strictly_monotone(-1.0, 1.0));
        assert!(!Polynomial::quadratic(1.0).is_strictly_monotone(-1.0, 1.0));
        // u^3 has a stationary point but is still strictly increasing
        let cubic = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(cubic.is_strictly_monotone(-1.0, 1.0));
    }

    #[test]
    fn validation_catches_bad_limits_and_direction() {
        let mut t = ThrusterSpec::with_default_models(Vector3::zeros(), Vector3::x());
        assert!(t.validate().is_ok());
        t.f_min = 1.0;
        assert!(t.validate().is_err());
        let mut t = ThrusterSpec::with_default_models(Vector3::zeros(), Vector3::x());
        t.direction = Vector3::new(1.0, 1e-4, 0.0);
        assert!(t.validate().is_err());
    }
}

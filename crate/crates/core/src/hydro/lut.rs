use nalgebra::{Vector3, Vector6};
use rayon::prelude::*;

use super::alpha_shape::{projected_area, sample_body_points, AlphaRadius};
use super::directions::{fibonacci_directions, DirectionSet};
use crate::error::{Error, Result};
use crate::math::{angular, linear, stack};
use crate::vehicle::Assembly;

pub const DEFAULT_RHO: f64 = 1000.0;
pub const DEFAULT_CD: f64 = 1.05;
/// Exponent on angular speed for rotational drag.
pub const ROTATIONAL_DRAG_EXPONENT: f64 = 5.0 / 3.0;
/// Default α radius as a fraction of the module edge.
pub const DEFAULT_ALPHA_EDGE_FRACTION: f64 = 0.25;
const NEIGHBOURS: usize = 3;

/// Inputs to [`build_drag_lut`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DragLutConfig {
    pub n_s: usize,
    pub rho: f64,
    pub c_d: f64,
    /// Interior samples per module.
    pub samples: usize,
    /// α-shape radius; `None` uses a quarter of the module edge.
    pub alpha: Option<AlphaRadius>,
    pub seed: u64,
}

impl Default for DragLutConfig {
    fn default() -> Self {
        Self {
            n_s: 200,
            rho: DEFAULT_RHO,
            c_d: DEFAULT_CD,
            samples: 20_000,
            alpha: None,
            seed: 0,
        }
    }
}

impl DragLutConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.samples == 0 {
            return Err(Error::Argument("n_s and samples must be positive".into()));
        }
        if !(self.rho > 0.0) || !(self.c_d > 0.0) || !self.rho.is_finite() || !self.c_d.is_finite() {
            return Err(Error::Argument("rho and c_d must be positive".into()));
        }
        self.alpha.map_or(Ok(()), |a| a.validate())
    }
}

/// Direction-indexed frontal areas and drag coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DragLut {
    directions: DirectionSet,
    frontal_area: Vec<f64>,
    rho: f64,
    c_d: f64,
    seed: u64,
    samples: usize,
}

impl DragLut {
    pub fn from_parts(
        directions: DirectionSet,
        frontal_area: Vec<f64>,
        rho: f64,
        c_d: f64,
        seed: u64,
        samples: usize,
    ) -> Result<Self> {
        if directions.len() != frontal_area.len() {
            return Err(Error::Argument("one frontal area per direction is required".into()));
        }
        if frontal_area.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Argument("frontal areas must be positive and finite".into()));
        }
        if !(rho > 0.0) || !(c_d > 0.0) || !rho.is_finite() || !c_d.is_finite() {
            return Err(Error::Argument("rho and c_d must be positive".into()));
        }
        Ok(Self { directions, frontal_area, rho, c_d, seed, samples })
    }

    /// Isotropic table: the same area in every direction.
    pub fn uniform(area: f64, rho: f64, c_d: f64) -> Result<Self> {
        let directions = fibonacci_directions(12)?;
        Self::from_parts(directions, vec![area; 12], rho, c_d, 0, 0)
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn frontal_areas(&self) -> &[f64] {
        &self.frontal_area
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `½ ρ C_d A_i`, the per-unit-speed force coefficient of row `i`.
    pub fn force_coefficient(&self, i: usize) -> f64 {
        0.5 * self.rho * self.c_d * self.frontal_area[i]
    }

    /// Rotational rows use the same `½ ρ C_d A_i`.
    pub fn torque_coefficient(&self, i: usize) -> f64 {
        self.force_coefficient(i)
    }

    /// Frontal area along `d`, inverse-distance weighted over the 3 nearest rows.
    pub fn area(&self, d: &Vector3<f64>) -> f64 {
        let d = d.normalize();
        let near = self.directions.nearest(&d, NEIGHBOURS);
        let mut num = 0.0;
        let mut den = 0.0;
        for &(i, cos) in &near {
            let angle = cos.clamp(-1.0, 1.0).acos();
            if angle < 1e-12 {
                return self.frontal_area[i];
            }
            let w = 1.0 / (angle * angle);
            num += w * self.frontal_area[i];
            den += w;
        }
        num / den
    }

    /// Drag wrench acting on the body for a body-frame relative twist.
    ///
    /// Force `−½ρC_d A(v̂) |v| v`; torque `−½ρC_d A(ω̂) |ω|^(5/3) ω̂`.
    pub fn query_drag(&self, relative_twist: &Vector6<f64>) -> Vector6<f64> {
        let v = linear(relative_twist);
        let w = angular(relative_twist);
        let k = 0.5 * self.rho * self.c_d;
        let force = match v.try_normalize(0.0) {
            Some(dir) => -dir * translational_drag_magnitude(k * self.area(&dir), v.norm()),
            None => Vector3::zeros(),
        };
        let torque = match w.try_normalize(0.0) {
            Some(axis) => -axis * rotational_drag_magnitude(k * self.area(&axis), w.norm()),
            None => Vector3::zeros(),
        };
        stack(&force, &torque)
    }
}

/// Quadratic drag law.
pub fn translational_drag_magnitude(coefficient: f64, speed: f64) -> f64 {
    coefficient * speed * speed
}

/// Rotational drag law, `k |ω|^(5/3)`.
pub fn rotational_drag_magnitude(coefficient: f64, speed: f64) -> f64 {
    coefficient * speed.powf(ROTATIONAL_DRAG_EXPONENT)
}

/// Monte-Carlo frontal-area table for an assembly.
///
/// Directions are processed in parallel; each row depends only on its own
/// direction and the shared point cloud, so the result is order independent.
pub fn build_drag_lut(assembly: &Assembly, config: &DragLutConfig) -> Result<DragLut> {
    config.validate()?;
    let directions = fibonacci_directions(config.n_s)?;
    let alpha = config.alpha.unwrap_or(AlphaRadius::Fixed(DEFAULT_ALPHA_EDGE_FRACTION * assembly.edge_length()));
    let points = sample_body_points(assembly, config.samples, config.seed)?;
    let areas = directions
        .directions()
        .par_iter()
        .map(|d| projected_area(&points, d, alpha))
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = areas.iter().position(|a| a.degenerate) {
        return Err(Error::Degenerate(format!("projected cloud along direction {i} has no area")));
    }
    DragLut::from_parts(
        directions,
        areas.iter().map(|a| a.area).collect(),
        config.rho,
        config.c_d,
        config.seed,
        config.samples,
    )
}

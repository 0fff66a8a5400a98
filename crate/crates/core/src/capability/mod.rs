//! Actuation capability: reachable wrench spaces, unit-wrench power, inscribed ellipsoids and thrust spread.

mod mie;

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use rayon::prelude::*;

use crate::control::{thruster_power, AllocationModel};
use crate::error::{Error, Result};
use crate::hydro::{fibonacci_directions, DirectionSet};
use crate::lp::{solve_standard, LpOutcome};
use crate::vehicle::ThrusterSpec;

pub use mie::{mie_volume, mie_volume_of_points, Ellipsoid, MieResult};

/// Which half of the wrench a direction addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WrenchMode {
    Force,
    Torque,
}

impl WrenchMode {
    pub fn embed(self, d: &Vector3<f64>) -> Vector6<f64> {
        let mut e = Vector6::zeros();
        e.fixed_rows_mut::<3>(self.offset()).copy_from(d);
        e
    }

    /// First row of the addressed block.
    pub fn offset(self) -> usize {
        match self {
            WrenchMode::Force => 0,
            WrenchMode::Torque => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WrenchMode::Force => "force",
            WrenchMode::Torque => "torque",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReachOptions {
    /// Leave the complementary wrench rows unconstrained instead of pinning them to zero.
    pub free_rows: bool,
}

/// Per-direction maximal wrench magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct WrenchSpace {
    pub mode: WrenchMode,
    pub directions: DirectionSet,
    pub extents: Vec<f64>,
    /// Thrust vector attaining each extent.
    pub optimal_forces: Vec<DVector<f64>>,
}

impl WrenchSpace {
    pub fn boundary_points(&self) -> Vec<Vector3<f64>> {
        self.directions.iter().zip(&self.extents).map(|(d, &l)| d * l).collect()
    }
}

/// Largest `λ ≥ 0` with `J F = λ e`, `f_min ≤ F ≤ f_max`, and the thrust vector achieving it.
pub fn wrench_extent(
    model: &AllocationModel,
    mode: WrenchMode,
    direction: &Vector3<f64>,
    options: ReachOptions,
) -> Result<(f64, DVector<f64>)> {
    let n = model.thruster_count();
    let e = mode.embed(direction);
    let rows: Vec<usize> = if options.free_rows { (mode.offset()..mode.offset() + 3).collect() } else { (0..6).collect() };
    // Variables: x = F − f_min (n), λ, slack s with x + s = f_max − f_min (n).
    let m = rows.len() + n;
    let mut a = DMatrix::zeros(m, 2 * n + 1);
    let mut b = DVector::zeros(m);
    for (i, &r) in rows.iter().enumerate() {
        let mut shift = 0.0;
        for j in 0..n {
            a[(i, j)] = model.jacobian[(r, j)];
            shift += model.jacobian[(r, j)] * model.limits[j].0;
        }
        a[(i, n)] = -e[r];
        b[i] = -shift;
    }
    for j in 0..n {
        let i = rows.len() + j;
        a[(i, j)] = 1.0;
        a[(i, n + 1 + j)] = 1.0;
        b[i] = model.limits[j].1 - model.limits[j].0;
    }
    let mut c = DVector::zeros(2 * n + 1);
    c[n] = -1.0;
    match solve_standard(&a, &b, &c)? {
        LpOutcome::Optimal { x, .. } => {
            let forces = DVector::from_iterator(n, (0..n).map(|j| x[j] + model.limits[j].0));
            Ok((x[n], forces))
        }
        // Zero thrust is always feasible, so this only arises from round-off.
        LpOutcome::Infeasible => Ok((0.0, DVector::zeros(n))),
        LpOutcome::Unbounded => Err(Error::Conditioning("wrench extent LP is unbounded".into())),
    }
}

pub fn reachable_wrench_space(model: &AllocationModel, mode: WrenchMode, n_s: usize) -> Result<WrenchSpace> {
    if n_s < 4 {
        return Err(Error::Argument(format!("n_s must be at least 4, got {n_s}")));
    }
    reachable_wrench_space_over(model, mode, &fibonacci_directions(n_s)?, ReachOptions::default())
}

/// Wrench space over an explicit direction set; directions are solved in parallel.
pub fn reachable_wrench_space_over(
    model: &AllocationModel,
    mode: WrenchMode,
    directions: &DirectionSet,
    options: ReachOptions,
) -> Result<WrenchSpace> {
    let solved: Vec<(f64, DVector<f64>)> = directions
        .directions()
        .par_iter()
        .map(|d| wrench_extent(model, mode, d, options))
        .collect::<Result<_>>()?;
    let (extents, optimal_forces) = solved.into_iter().unzip();
    Ok(WrenchSpace { mode, directions: directions.clone(), extents, optimal_forces })
}

/// Electrical power needed for a unit wrench along each direction.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpace {
    pub mode: WrenchMode,
    pub directions: DirectionSet,
    /// Watts; `NaN` where the unit wrench is unattainable.
    pub power: Vec<f64>,
    pub attainable: Vec<bool>,
}

impl PowerSpace {
    /// Sum over attainable directions.
    pub fn total_power(&self) -> f64 {
        self.power.iter().zip(&self.attainable).filter(|(_, &ok)| ok).map(|(p, _)| p).sum()
    }

    pub fn attainable_radii(&self) -> Vec<f64> {
        self.power.iter().zip(&self.attainable).map(|(&p, &ok)| if ok { p } else { 0.0 }).collect()
    }
}

fn check_specs(model: &AllocationModel, specs: &[&ThrusterSpec]) -> Result<()> {
    if specs.len() != model.thruster_count() {
        return Err(Error::Argument(format!("{} thruster models for {} thrusters", specs.len(), model.thruster_count())));
    }
    Ok(())
}

pub fn power_space(model: &AllocationModel, specs: &[&ThrusterSpec], mode: WrenchMode, n_s: usize) -> Result<PowerSpace> {
    power_space_over(model, specs, mode, &fibonacci_directions(n_s)?)
}

pub fn power_space_over(
    model: &AllocationModel,
    specs: &[&ThrusterSpec],
    mode: WrenchMode,
    directions: &DirectionSet,
) -> Result<PowerSpace> {
    check_specs(model, specs)?;
    let mut power = Vec::with_capacity(directions.len());
    let mut attainable = Vec::with_capacity(directions.len());
    for d in directions.iter() {
        let e = mode.embed(d);
        let f = &model.pseudo_inverse * e;
        if (model.wrench(&f) - e).norm() > 1e-9 {
            power.push(f64::NAN);
            attainable.push(false);
        } else {
            power.push(specs.iter().zip(f.iter()).map(|(s, &fi)| thruster_power(s, fi)).sum());
            attainable.push(true);
        }
    }
    Ok(PowerSpace { mode, directions: directions.clone(), power, attainable })
}

/// Source of the thrust vectors entering [`thrust_variance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Pseudo-inverse allocation of each unit wrench.
    Power,
    /// LP-optimal thrusts at the reachable boundary.
    Wrench,
}

/// Spread of thruster effort.
#[derive(Clone, Debug, PartialEq)]
pub struct ThrustVariance {
    /// Variance across thrusters of their mean absolute thrust.
    pub sigma2: f64,
    pub means: Vec<f64>,
    /// `samples[i]` holds thruster `i`'s absolute thrust for every direction.
    pub samples: Vec<Vec<f64>>,
}

pub fn thrust_variance(
    model: &AllocationModel,
    mode: WrenchMode,
    directions: &DirectionSet,
    weighting: Weighting,
) -> Result<ThrustVariance> {
    let forces: Vec<DVector<f64>> = match weighting {
        Weighting::Power => directions.iter().map(|d| &model.pseudo_inverse * mode.embed(d)).collect(),
        Weighting::Wrench => reachable_wrench_space_over(model, mode, directions, ReachOptions::default())?.optimal_forces,
    };
    Ok(variance_of(model.thruster_count(), &forces))
}

fn variance_of(n: usize, forces: &[DVector<f64>]) -> ThrustVariance {
    let samples: Vec<Vec<f64>> = (0..n).map(|i| forces.iter().map(|f| f[i].abs()).collect()).collect();
    let count = forces.len().max(1) as f64;
    let means: Vec<f64> = samples.iter().map(|s| s.iter().sum::<f64>() / count).collect();
    let mu = means.iter().sum::<f64>() / n as f64;
    let sigma2 = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / n as f64;
    ThrustVariance { sigma2, means, samples }
}

//! Modeling, simulation and capability analysis for reconfigurable lattice
//! assemblies of thruster-actuated underwater cube modules.

pub mod error;
pub mod math;
pub mod vehicle;

pub use error::{Error, Result};
pub mod hydro;
pub mod dynamics;
pub mod control;
pub mod lp;
pub mod hull;
pub mod capability;
pub mod morphology;
pub mod planner;
pub mod harness;

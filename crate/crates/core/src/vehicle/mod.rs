//! Modules, lattice assemblies and their composite rigid-body properties.

mod assembly;
mod mass;
pub mod schema;
mod thruster;

pub use assembly::{
    default_thruster_layout, Assembly, CubeRotation, ModuleSpec, PlacedModule, DEFAULT_BODY_POINTS,
    DEFAULT_EDGE, WATER_DENSITY,
};
pub use mass::{
    compose_mass_properties, coriolis_from_mass_matrix, coriolis_matrix, mass_matrix,
    mass_matrix_about, parallel_axis, MassProperties,
};
pub use thruster::{Polynomial, ThrusterSpec, MAX_DEGREE};

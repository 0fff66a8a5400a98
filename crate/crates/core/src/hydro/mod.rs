//! Direction-dependent drag from Monte-Carlo frontal areas.

mod alpha_shape;
mod directions;
pub mod lut_file;
mod lut;

pub use alpha_shape::{alpha_shape_area, projected_area, sample_body_points, AlphaRadius, AreaEstimate};
pub use directions::{fibonacci_directions, rotation_to_z, DirectionSet};
pub use lut::{
    build_drag_lut, rotational_drag_magnitude, translational_drag_magnitude, DragLut, DragLutConfig,
    DEFAULT_ALPHA_EDGE_FRACTION, DEFAULT_CD, DEFAULT_RHO, ROTATIONAL_DRAG_EXPONENT,
};

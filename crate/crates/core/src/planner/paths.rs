//! Reference paths for tracking scenarios.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

fn check_count(count: usize) -> Result<()> {
    if count < 8 {
        return Err(Error::Argument(format!("at least 8 waypoints required, got {count}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Argument(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Helix `(r cos t, r sin t, pitch · t / 2π)` over `turns` revolutions, sampled uniformly in `t`.
pub fn spiral_waypoints(radius: f64, pitch: f64, turns: f64, count: usize) -> Result<Vec<Vector3<f64>>> {
    check_positive("radius", radius)?;
    check_positive("turns", turns)?;
    if !pitch.is_finite() {
        return Err(Error::Argument("pitch must be finite".into()));
    }
    check_count(count)?;
    let span = 2.0 * PI * turns;
    Ok((0..count)
        .map(|i| {
            let t = span * i as f64 / (count - 1) as f64;
            Vector3::new(radius * t.cos(), radius * t.sin(), pitch * t / (2.0 * PI))
        })
        .collect())
}

/// Boundary curve of a Möbius strip of the given centre radius and half width.
///
/// The edge winds twice around the centre circle before closing, so `u` spans `[0, 4π]`;
/// the last sample coincides with the first.
pub fn mobius_waypoints(radius: f64, half_width: f64, count: usize) -> Result<Vec<Vector3<f64>>> {
    check_positive("radius", radius)?;
    if !(half_width.is_finite() && half_width >= 0.0 && half_width < radius) {
        return Err(Error::Argument(format!("half width must lie in [0, radius), got {half_width}")));
    }
    check_count(count)?;
    Ok((0..count)
        .map(|i| {
            let u = 4.0 * PI * i as f64 / (count - 1) as f64;
            let rho = radius + half_width * (u / 2.0).cos();
            Vector3::new(rho * u.cos(), rho * u.sin(), half_width * (u / 2.0).sin())
        })
        .collect())
}

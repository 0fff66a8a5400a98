use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::math::rotation_vector;

/// A timed pose, for trace and reference series alike.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rmse {
    /// Metres.
    pub position: f64,
    /// Radians.
    pub orientation: f64,
    pub samples: usize,
}

/// Reference pose at `t` by linear interpolation (slerp for attitude).
///
/// `None` outside the span of `series`.
pub fn interpolate(series: &[PoseSample], t: f64) -> Option<PoseSample> {
    let first = series.first()?;
    let last = series.last()?;
    const EPS: f64 = 1e-9;
    if t < first.t - EPS || t > last.t + EPS {
        return None;
    }
    let k = series.partition_point(|s| s.t < t);
    if k < series.len() && (series[k].t - t).abs() <= EPS {
        return Some(series[k]);
    }
    if k == 0 {
        return Some(*first);
    }
    if k == series.len() {
        return Some(*last);
    }
    let (a, b) = (&series[k - 1], &series[k]);
    let s = (t - a.t) / (b.t - a.t);
    Some(PoseSample {
        t,
        position: a.position.lerp(&b.position, s),
        orientation: a.orientation.try_slerp(&b.orientation, s, 1e-12).unwrap_or(a.orientation),
    })
}

/// Root-mean-square position and rotation-vector errors over the samples of
/// `trace` that fall inside the span of `reference`.
pub fn rmse(trace: &[PoseSample], reference: &[PoseSample]) -> Result<Rmse> {
    let mut sq_p = 0.0;
    let mut sq_o = 0.0;
    let mut n = 0usize;
    for s in trace {
        if let Some(r) = interpolate(reference, s.t) {
            sq_p += (s.position - r.position).norm_squared();
            sq_o += rotation_vector(&(r.orientation * s.orientation.inverse())).norm_squared();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Argument("trace and reference do not overlap in time".into()));
    }
    Ok(Rmse { position: (sq_p / n as f64).sqrt(), orientation: (sq_o / n as f64).sqrt(), samples: n })
}

/// Incremental form of [`docking_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct DockingMonitor {
    pub target: f64,
    pub tolerance: f64,
    pub window: f64,
    entered: Option<f64>,
    docked: Option<f64>,
}

impl DockingMonitor {
    pub fn new(target: f64, window: f64, tolerance: f64) -> Self {
        Self { target, tolerance, window, entered: None, docked: None }
    }

    /// Feed one synchronized distance sample; returns the docking time once reached.
    pub fn push(&mut self, t: f64, distance: f64) -> Option<f64> {
        if self.docked.is_some() {
            return self.docked;
        }
        if (distance - self.target).abs() <= self.tolerance {
            let since = *self.entered.get_or_insert(t);
            if t - since >= self.window - 1e-9 {
                self.docked = Some(t);
            }
        } else {
            self.entered = None;
        }
        self.docked
    }

    pub fn docked_at(&self) -> Option<f64> {
        self.docked
    }
}

/// First time the centre distance has stayed within `l ± tol` for `window` seconds.
///
/// The traces must share their time stamps; the check runs over their common prefix.
pub fn docking_check(a: &[PoseSample], b: &[PoseSample], l: f64, window: f64, tol: f64) -> Option<f64> {
    let mut monitor = DockingMonitor::new(l, window, tol);
    for (sa, sb) in a.iter().zip(b) {
        if let Some(t) = monitor.push(sa.t, (sa.position - sb.position).norm()) {
            return Some(t);
        }
    }
    None
}

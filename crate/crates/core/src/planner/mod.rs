//! Minimum-snap piecewise-polynomial trajectories.

mod paths;

use nalgebra::{DMatrix, DVector, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::control::Reference;
use crate::error::{Error, Result};

pub use paths::{mobius_waypoints, spiral_waypoints};

pub const DEFAULT_ORDER: usize = 7;
/// 1-norm condition estimate above which a plan is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// `n! / (n − k)!`.
fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ((n - k + 1)..=n).map(|x| x as f64).product()
    }
}

/// Snap Gram matrix on `τ ∈ [0, 1]`: `∫ p⁽⁴⁾(τ)² dτ = cᵀ Q c`.
pub fn snap_gram(order: usize) -> DMatrix<f64> {
    DMatrix::from_fn(order + 1, order + 1, |i, j| {
        if i < 4 || j < 4 {
            0.0
        } else {
            falling(i, 4) * falling(j, 4) / (i + j - 7) as f64
        }
    })
}

/// `∫₀ᵀ (d⁴p/dt⁴)² dt` of `p(s) = Σ αᵢ sⁱ`.
pub fn segment_snap_cost(alpha: &[f64], duration: f64) -> f64 {
    let mut total = 0.0;
    for (i, a) in alpha.iter().enumerate().skip(4) {
        for (j, b) in alpha.iter().enumerate().skip(4) {
            let p = i + j - 7;
            total += a * b * falling(i, 4) * falling(j, 4) * duration.powi(p as i32) / p as f64;
        }
    }
    total
}

/// One polynomial piece; `coeffs[axis][i]` multiplies `(t − start)^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub duration: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl Segment {
    /// `d^m/dt^m` of axis `axis` at local time `s`.
    pub fn derivative(&self, axis: usize, m: usize, s: f64) -> f64 {
        let c = &self.coeffs[axis];
        let mut acc = 0.0;
        for i in (m..c.len()).rev() {
            acc = acc * s + c[i] * falling(i, m);
        }
        acc
    }
}

/// Piecewise polynomial through timed waypoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub order: usize,
    pub times: Vec<f64>,
    /// `waypoints[j][axis]`.
    pub waypoints: Vec<Vec<f64>>,
    pub segments: Vec<Segment>,
}

impl TrajectoryPlan {
    pub fn dimension(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            p => (p - 1).min(self.segments.len() - 1),
        };
        (k, t - self.times[k])
    }

    /// `d^m/dt^m` of every axis; clamped to the end poses (at rest) outside the time span.
    pub fn derivative(&self, m: usize, t: f64) -> Vec<f64> {
        let dim = self.dimension();
        if t <= self.start_time() || t >= self.end_time() {
            let (seg, s) = if t <= self.start_time() {
                (&self.segments[0], 0.0)
            } else {
                let last = self.segments.last().unwrap();
                (last, last.duration)
            };
            return (0..dim).map(|a| if m == 0 { seg.derivative(a, 0, s) } else { 0.0 }).collect();
        }
        let (k, s) = self.locate(t);
        (0..dim).map(|a| self.segments[k].derivative(a, m, s)).collect()
    }

    /// Total snap cost summed over axes, by exact integration.
    pub fn snap_cost(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.coeffs.iter().map(|c| segment_snap_cost(c, s.duration)).sum::<f64>())
            .sum()
    }

    /// Largest jump in derivatives `0..=max_order` across interior joints.
    pub fn continuity_residual(&self, max_order: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.segments.len().saturating_sub(1) {
            let (a, b) = (&self.segments[k], &self.segments[k + 1]);
            for axis in 0..self.dimension() {
                for m in 0..=max_order {
                    let scale = 1.0f64.max(a.derivative(axis, m, a.duration).abs());
                    worst = worst.max((a.derivative(axis, m, a.duration) - b.derivative(axis, m, 0.0)).abs() / scale);
                }
            }
        }
        worst
    }

    /// Largest waypoint interpolation error.
    pub fn waypoint_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            for axis in 0..self.dimension() {
                worst = worst.max((s.derivative(axis, 0, 0.0) - self.waypoints[k][axis]).abs());
                worst = worst.max((s.derivative(axis, 0, s.duration) - self.waypoints[k + 1][axis]).abs());
            }
        }
        worst
    }
}

fn validate_times(times: &[f64], count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::Argument(format!("at least 2 waypoints required, got {count}")));
    }
    if times.len() != count {
        return Err(Error::Argument(format!("{} times for {count} waypoints", times.len())));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Argument("waypoint times must be finite".into()));
    }
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Argument(format!("waypoint times must strictly increase ({} then {})", w[0], w[1])));
    }
    Ok(())
}

/// Minimum-snap plan for waypoints of any dimension, rest-to-rest, continuous to acceleration.
pub fn plan_min_snap_nd(waypoints: &[Vec<f64>], times: &[f64], order: usize) -> Result<TrajectoryPlan> {
    validate_times(times, waypoints.len())?;
    if !(5..=15).contains(&order) {
        return Err(Error::Argument(format!("polynomial order must be in 5..=15, got {order}")));
    }
    let dim = waypoints[0].len();
    if dim == 0 || waypoints.iter().any(|w| w.len() != dim || w.iter().any(|x| !x.is_finite())) {
        return Err(Error::Argument("waypoints must share a dimension and be finite".into()));
    }
    let segs = waypoints.len() - 1;
    let nc = order + 1;
    let nv = segs * nc;
    let durations: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let t_ref = durations.iter().cloned().fold(0.0, f64::max);

    // Constraint rows in normalised time; each joint row is scaled by T_k^m.
    let mut rows: Vec<(Vec<(usize, f64)>, Option<(usize, usize)>)> = Vec::new();
    let at = |k: usize, m: usize, end: bool| -> Vec<(usize, f64)> {
        (m..nc).filter(|&i| end || i == m).map(|i| (k * nc + i, falling(i, m))).collect()
    };
    for k in 0..segs {
        rows.push((at(k, 0, false), Some((k, 0))));
        rows.push((at(k, 0, true), Some((k + 1, 0))));
    }
    for k in 0..segs.saturating_sub(1) {
        for m in 1..=2 {
            let ratio = (durations[k] / durations[k + 1]).powi(m as i32);
            let mut r = at(k, m, true);
            r.extend(at(k + 1, m, false).into_iter().map(|(j, v)| (j, -v * ratio)));
            rows.push((r, None));
        }
    }
    for m in 1..=2 {
        rows.push((at(0, m, false), None));
        rows.push((at(segs - 1, m, true), None));
    }

    let nr = rows.len();
    let n = nv + nr;
    let mut kkt = DMatrix::zeros(n, n);
    let q = snap_gram(order);
    for k in 0..segs {
        let w = 2.0 * (t_ref / durations[k]).powi(7);
        for i in 0..nc {
            for j in 0..nc {
                kkt[(k * nc + i, k * nc + j)] = w * q[(i, j)];
            }
        }
    }
    for (r, (entries, _)) in rows.iter().enumerate() {
        for &(j, v) in entries {
            kkt[(nv + r, j)] = v;
            kkt[(j, nv + r)] = v;
        }
    }
    let mut rhs = DMatrix::zeros(n, dim);
    for (r, (_, target)) in rows.iter().enumerate() {
        if let Some((wp, _)) = target {
            for a in 0..dim {
                rhs[(nv + r, a)] = waypoints[*wp][a];
            }
        }
    }

    // Symmetric Ruiz equilibration before factoring.
    let mut d = DVector::from_element(n, 1.0);
    let mut scaled = kkt.clone();
    for _ in 0..20 {
        let norms: Vec<f64> = (0..n).map(|i| scaled.row(i).amax()).collect();
        if norms.iter().all(|&x| (x - 1.0).abs() < 1e-3) {
            break;
        }
        for i in 0..n {
            let s = 1.0 / norms[i].max(f64::MIN_POSITIVE).sqrt();
            d[i] *= s;
        }
        scaled = DMatrix::from_fn(n, n, |i, j| kkt[(i, j)] * d[i] * d[j]);
    }
    let lu = scaled.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("min-snap optimality system is singular".into()))?;
    let norm1 = |m: &DMatrix<f64>| (0..m.ncols()).map(|j| m.column(j).lp_norm(1)).fold(0.0, f64::max);
    let cond = norm1(&scaled) * norm1(&inv);
    if !(cond < MAX_CONDITION) {
        return Err(Error::Conditioning(format!("min-snap optimality system condition {cond:e}")));
    }
    let scaled_rhs = DMatrix::from_fn(n, dim, |i, a| rhs[(i, a)] * d[i]);
    let y = &inv * scaled_rhs;
    let sol = DMatrix::from_fn(nv, dim, |i, a| y[(i, a)] * d[i]);

    let segments = (0..segs)
        .map(|k| Segment {
            start: times[k],
            duration: durations[k],
            coeffs: (0..dim)
                .map(|a| (0..nc).map(|i| sol[(k * nc + i, a)] / durations[k].powi(i as i32)).collect())
                .collect(),
        })
        .collect();
    Ok(TrajectoryPlan { order, times: times.to_vec(), waypoints: waypoints.to_vec(), segments })
}

pub fn plan_min_snap(waypoints: &[Vector3<f64>], times: &[f64]) -> Result<TrajectoryPlan> {
    let w: Vec<Vec<f64>> = waypoints.iter().map(|p| p.iter().copied().collect()).collect();
    plan_min_snap_nd(&w, times, DEFAULT_ORDER)
}

/// Times proportional to the distance between waypoints at a nominal speed.
pub fn allocate_times(waypoints: &[Vector3<f64>], speed: f64, min_segment: f64) -> Result<Vec<f64>> {
    if !(speed > 0.0 && speed.is_finite() && min_segment > 0.0) {
        return Err(Error::Argument("speed and minimum segment time must be positive".into()));
    }
    let mut t = vec![0.0];
    for w in waypoints.windows(2) {
        let dt = ((w[1] - w[0]).norm() / speed).max(min_segment);
        t.push(t.last().unwrap() + dt);
    }
    Ok(t)
}

/// Heading reference along a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YawProfile {
    Fixed { yaw: f64 },
    /// Face along the horizontal velocity.
    Tangent,
    /// Minimum-snap interpolation of per-waypoint headings.
    Waypoints { yaw: Vec<f64> },
}

impl Default for YawProfile {
    fn default() -> Self {
        YawProfile::Fixed { yaw: 0.0 }
    }
}

/// Reference state at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub yaw_acceleration: f64,
}

impl ReferenceSample {
    pub fn to_reference(&self) -> Reference {
        Reference {
            position: self.position,
            orientation: UnitQuaternion::from_euler_angles(0.0, 0.0, self.yaw),
            velocity: self.velocity,
            angular_velocity: Vector3::new(0.0, 0.0, self.yaw_rate),
            acceleration: self.acceleration,
            angular_acceleration: Vector3::new(0.0, 0.0, self.yaw_acceleration),
        }
    }
}

/// A plan with its yaw profile, evaluable at any time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub plan: TrajectoryPlan,
    pub yaw: YawProfile,
    yaw_plan: Option<TrajectoryPlan>,
}

fn vec3(v: &[f64]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

impl Trajectory {
    pub fn new(plan: TrajectoryPlan, yaw: YawProfile) -> Result<Self> {
        if plan.dimension() != 3 {
            return Err(Error::Argument("trajectory plans must be 3D".into()));
        }
        let yaw_plan = match &yaw {
            YawProfile::Waypoints { yaw: values } => {
                if values.len() != plan.waypoints.len() {
                    return Err(Error::Argument(format!("{} yaw values for {} waypoints", values.len(), plan.waypoints.len())));
                }
                let mut unwrapped = vec![values[0]];
                for &v in &values[1..] {
                    let prev = *unwrapped.last().unwrap();
                    unwrapped.push(prev + wrap_angle(v - prev));
                }
                let w: Vec<Vec<f64>> = unwrapped.into_iter().map(|y| vec![y]).collect();
                Some(plan_min_snap_nd(&w, &plan.times, plan.order)?)
            }
            _ => None,
        };
        Ok(Self { plan, yaw, yaw_plan })
    }

    fn tangent_yaw(&self, t: f64) -> Option<(f64, f64, f64)> {
        let v = self.plan.derivative(1, t);
        let a = self.plan.derivative(2, t);
        let j = self.plan.derivative(3, t);
        let s2 = v[0] * v[0] + v[1] * v[1];
        if s2 < 1e-12 {
            return None;
        }
        let cross = v[0] * a[1] - v[1] * a[0];
        let rate = cross / s2;
        let accel = ((v[0] * j[1] - v[1] * j[0]) * s2 - cross * 2.0 * (v[0] * a[0] + v[1] * a[1])) / (s2 * s2);
        Some((v[1].atan2(v[0]), rate, accel))
    }

    /// Heading wrapped to `(−π, π]` for the tangent profile.
    fn yaw_at(&self, t: f64) -> (f64, f64, f64) {
        match &self.yaw {
            YawProfile::Fixed { yaw } => (*yaw, 0.0, 0.0),
            YawProfile::Waypoints { .. } => {
                let p = self.yaw_plan.as_ref().unwrap();
                (p.derivative(0, t)[0], p.derivative(1, t)[0], p.derivative(2, t)[0])
            }
            YawProfile::Tangent => {
                if let Some(y) = self.tangent_yaw(t) {
                    return y;
                }
                // At rest: hold the heading of the nearest moving instant.
                let span = self.plan.duration();
                let probe = if t - self.plan.start_time() < 0.5 * span {
                    self.plan.start_time() + 1e-3 * span
                } else {
                    self.plan.end_time() - 1e-3 * span
                };
                self.tangent_yaw(probe).map(|(y, _, _)| (y, 0.0, 0.0)).unwrap_or((0.0, 0.0, 0.0))
            }
        }
    }

    pub fn sample(&self, t: f64) -> ReferenceSample {
        let (yaw, yaw_rate, yaw_acceleration) = self.yaw_at(t);
        ReferenceSample {
            t,
            position: vec3(&self.plan.derivative(0, t)),
            velocity: vec3(&self.plan.derivative(1, t)),
            acceleration: vec3(&self.plan.derivative(2, t)),
            yaw,
            yaw_rate,
            yaw_acceleration,
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * std::f64::consts::PI);
    if w > std::f64::consts::PI {
        w - 2.0 * std::f64::consts::PI
    } else {
        w
    }
}

/// Samples every `dt` from the first to the last waypoint time inclusive, with continuous yaw.
pub fn sample_trajectory(trajectory: &Trajectory, dt: f64) -> Result<Vec<ReferenceSample>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let t0 = trajectory.plan.start_time();
    let steps = (trajectory.plan.duration() / dt).round() as usize;
    let mut out: Vec<ReferenceSample> = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = (t0 + k as f64 * dt).min(trajectory.plan.end_time());
        let mut s = trajectory.sample(t);
        if let Some(prev) = out.last() {
            s.yaw = prev.yaw + wrap_angle(s.yaw - prev.yaw);
        }
        out.push(s);
    }
    Ok(out)
}

/// Waypoint file: positions with explicit times or a nominal speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointsDoc {
    pub points: Vec<[f64; 3]>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub speed: Option<f64>,
    #[serde(default)]
    pub yaw: YawProfile,
}

pub const DEFAULT_SPEED: f64 = 0.1;
pub const MIN_SEGMENT_TIME: f64 = 0.5;

impl WaypointsDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("waypoints: {e}")))
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.points.iter().map(|p| Vector3::from(*p)).collect()
    }

    pub fn resolve_times(&self) -> Result<Vec<f64>> {
        match &self.times {
            Some(t) => Ok(t.clone()),
            None => allocate_times(&self.positions(), self.speed.unwrap_or(DEFAULT_SPEED), MIN_SEGMENT_TIME),
        }
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let plan = plan_min_snap(&self.positions(), &self.resolve_times()?)?;
        Trajectory::new(plan, self.yaw.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_waypoints_give_constant_plan() {
        let p = Vector3::new(1.0, -2.0, 0.5);
        let plan = plan_min_snap(&[p, p], &[0.0, 3.0]).unwrap();
        for axis in 0..3 {
            let c = &plan.segments[0].coeffs[axis];
            assert!((c[0] - p[axis]).abs() < 1e-12);
            assert!(c[1..].iter().all(|x| x.abs() < 1e-12));
        }
        assert!(plan.snap_cost() < 1e-20);
    }

    #[test]
    fn multi_segment_continuity() {
        let w = spiral_waypoints(0.5, 0.2, 1.0, 12).unwrap();
        let t = allocate_times(&w, 0.1, 0.5).unwrap();
        let plan = plan_min_snap(&w, &t).unwrap();
        assert!(plan.continuity_residual(2) < 1e-8);
        assert!(plan.waypoint_residual() < 1e-9);
        let end = plan.derivative(1, plan.end_time() - 1e-9);
        assert!(end.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn bad_times() {
        let w = [Vector3::zeros(), Vector3::x(), Vector3::y()];
        assert!(matches!(plan_min_snap(&w, &[0.0, 1.0, 1.0]), Err(Error::Argument(_))));
        assert!(matches!(plan_min_snap(&w[..1], &[0.0]), Err(Error::Argument(_))));
        assert!(matches!(plan_min_snap(&w, &[0.0, 1e-6, 1e6]), Err(Error::Conditioning(_))));
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let w = spiral_waypoints(0.5, 0.2, 1.0, 10).unwrap();
        let traj = Trajectory::new(plan_min_snap(&w, &allocate_times(&w, 0.1, 0.5).unwrap()).unwrap(), YawProfile::Tangent).unwrap();
        let h = 1e-4;
        for k in 1..20 {
            let t = traj.plan.duration() * k as f64 / 20.0;
            let fd = (traj.sample(t + h).position - traj.sample(t - h).position) / (2.0 * h);
            assert!((fd - traj.sample(t).velocity).norm() < 1e-7);
            let yaw_fd = wrap_angle(traj.sample(t + h).yaw - traj.sample(t - h).yaw) / (2.0 * h);
            assert!((yaw_fd - traj.sample(t).yaw_rate).abs() < 1e-5);
        }
    }

    #[test]
    fn waypoint_yaw_interpolates() {
        let w = [Vector3::zeros(), Vector3::x(), Vector3::new(1.0, 1.0, 0.0)];
        let plan = plan_min_snap(&w, &[0.0, 5.0, 10.0]).unwrap();
        let traj = Trajectory::new(plan, YawProfile::Waypoints { yaw: vec![3.0, -3.0, 0.0] }).unwrap();
        // 3 → −3 wraps the short way through π.
        assert!((traj.sample(5.0).yaw - (2.0 * std::f64::consts::PI - 3.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_plan_samples_at_rest() {
        let p = Vector3::new(0.2, 0.0, -1.0);
        let traj = Trajectory::new(plan_min_snap(&[p, p, p], &[0.0, 1.0, 2.0]).unwrap(), YawProfile::default()).unwrap();
        for s in sample_trajectory(&traj, 0.1).unwrap() {
            assert!(s.velocity.norm() < 1e-12);
        }
    }

    #[test]
    fn waypoints_doc() {
        let doc = WaypointsDoc::from_json(r#"{"points": [[0,0,0],[1,0,0],[1,1,0]], "speed": 0.5}"#).unwrap();
        assert_eq!(doc.resolve_times().unwrap(), vec![0.0, 2.0, 4.0]);
        assert!(doc.to_trajectory().is_ok());
        assert!(WaypointsDoc::from_json(r#"{"points": [], "bogus": 1}"#).is_err());
    }
}

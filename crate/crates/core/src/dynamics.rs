//! 6-DoF rigid-body motion under applied wrenches, drag and restoring forces.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::hydro::DragLut;
use crate::math::{angular, linear, stack};
use crate::vehicle::coriolis_from_mass_matrix;

/// Pose in the world frame plus body-frame twist `(v, ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyState {
    pub position: Vector3<f64>,
    /// World-from-body rotation.
    pub orientation: UnitQuaternion<f64>,
    pub twist: Vector6<f64>,
}

impl BodyState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self { position, orientation: UnitQuaternion::identity(), twist: Vector6::zeros() }
    }

    /// ZYX Euler angles `(roll, pitch, yaw)`.
    pub fn euler(&self) -> Vector3<f64> {
        let (r, p, y) = self.orientation.euler_angles();
        Vector3::new(r, p, y)
    }

    /// Body linear velocity expressed in the world frame.
    pub fn world_velocity(&self) -> Vector3<f64> {
        self.orientation * linear(&self.twist)
    }

    pub fn world_angular_velocity(&self) -> Vector3<f64> {
        self.orientation * angular(&self.twist)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|x| x.is_finite())
            && self.orientation.coords.iter().all(|x| x.is_finite())
            && self.twist.iter().all(|x| x.is_finite())
    }
}

/// Restoring (gravity/buoyancy) wrench as a function of pose.
#[derive(Clone, Default)]
pub enum Restoring {
    #[default]
    Zero,
    Constant(Vector6<f64>),
    Custom(Arc<dyn Fn(&BodyState) -> Vector6<f64> + Send + Sync>),
}

impl Restoring {
    pub fn eval(&self, state: &BodyState) -> Vector6<f64> {
        match self {
            Restoring::Zero => Vector6::zeros(),
            Restoring::Constant(w) => *w,
            Restoring::Custom(f) => f(state),
        }
    }
}

impl fmt::Debug for Restoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restoring::Zero => write!(f, "Zero"),
            Restoring::Constant(w) => write!(f, "Constant({w:?})"),
            Restoring::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Ambient water velocity, world frame, as a function of position.
#[derive(Clone, Default)]
pub enum AmbientFlow {
    #[default]
    Still,
    Uniform(Vector3<f64>),
    Custom(Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>),
}

impl AmbientFlow {
    pub fn eval(&self, position: &Vector3<f64>) -> Vector3<f64> {
        match self {
            AmbientFlow::Still => Vector3::zeros(),
            AmbientFlow::Uniform(v) => *v,
            AmbientFlow::Custom(f) => f(position),
        }
    }
}

impl fmt::Debug for AmbientFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientFlow::Still => write!(f, "Still"),
            AmbientFlow::Uniform(v) => write!(f, "Uniform({v:?})"),
            AmbientFlow::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Everything the equations of motion need about one rigid body.
#[derive(Clone, Debug)]
pub struct PlantModel {
    mass_matrix: Matrix6<f64>,
    mass_inverse: Matrix6<f64>,
    /// `None` disables hydrodynamic drag.
    pub drag: Option<Arc<DragLut>>,
    pub restoring: Restoring,
    pub ambient_flow: AmbientFlow,
}

impl PlantModel {
    pub fn new(mass_matrix: Matrix6<f64>, drag: Option<Arc<DragLut>>) -> Result<Self> {
        if (mass_matrix - mass_matrix.transpose()).amax() > 1e-9 * mass_matrix.amax().max(1.0) {
            return Err(Error::Configuration("plant mass matrix must be symmetric".into()));
        }
        let chol = mass_matrix
            .cholesky()
            .ok_or_else(|| Error::Configuration("plant mass matrix must be positive definite".into()))?;
        Ok(Self {
            mass_matrix,
            mass_inverse: chol.inverse(),
            drag,
            restoring: Restoring::Zero,
            ambient_flow: AmbientFlow::Still,
        })
    }

    pub fn mass_matrix(&self) -> &Matrix6<f64> {
        &self.mass_matrix
    }

    pub fn mass_inverse(&self) -> &Matrix6<f64> {
        &self.mass_inverse
    }

    /// Body-frame twist relative to the surrounding water.
    pub fn relative_twist(&self, state: &BodyState) -> Vector6<f64> {
        let flow = self.ambient_flow.eval(&state.position);
        // RK4 stages carry slightly non-unit quaternions.
        let rot = UnitQuaternion::from_quaternion(*state.orientation.quaternion());
        let v_r = linear(&state.twist) - rot.inverse() * flow;
        stack(&v_r, &angular(&state.twist))
    }

    /// The `D(v_r) v_r` resistance term (points along the motion; the force on the body is its negative).
    pub fn drag_resistance(&self, relative_twist: &Vector6<f64>) -> Vector6<f64> {
        match &self.drag {
            Some(lut) => -lut.query_drag(relative_twist),
            None => Vector6::zeros(),
        }
    }

    /// `C(ν) ν`.
    pub fn coriolis_term(&self, twist: &Vector6<f64>) -> Vector6<f64> {
        coriolis_from_mass_matrix(&self.mass_matrix, twist) * twist
    }

    pub fn kinetic_energy(&self, twist: &Vector6<f64>) -> f64 {
        0.5 * twist.dot(&(self.mass_matrix * twist))
    }
}

/// Time derivative of a [`BodyState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerivative {
    pub position: Vector3<f64>,
    pub orientation: Quaternion<f64>,
    pub twist: Vector6<f64>,
}

/// `ν̇ = M⁻¹(τ − C(ν)ν − D(v_r)v_r − g(η))`, `ṗ = R v`, `q̇ = ½ q ⊗ (0, ω)`.
pub fn state_derivative(state: &BodyState, plant: &PlantModel, applied_wrench: &Vector6<f64>) -> StateDerivative {
    let nu = &state.twist;
    let rhs = applied_wrench
        - plant.coriolis_term(nu)
        - plant.drag_resistance(&plant.relative_twist(state))
        - plant.restoring.eval(state);
    let w = angular(nu);
    StateDerivative {
        position: UnitQuaternion::from_quaternion(*state.orientation.quaternion()) * linear(nu),
        orientation: state.orientation.into_inner() * Quaternion::new(0.0, w.x, w.y, w.z) * 0.5,
        twist: plant.mass_inverse * rhs,
    }
}

/// `J(η)` for ZYX Euler angles `(roll, pitch, yaw)`: body-to-world rotation and Euler-rate map.
pub fn kinematic_transform(euler: &Vector3<f64>) -> Result<Matrix6<f64>> {
    let (phi, theta, psi) = (euler.x, euler.y, euler.z);
    if (theta.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-6 {
        return Err(Error::Singularity(format!("Euler-rate map is singular at pitch {theta}")));
    }
    let rot = UnitQuaternion::from_euler_angles(phi, theta, psi).to_rotation_matrix().into_inner();
    let (sp, cp) = phi.sin_cos();
    let (tt, ct) = (theta.tan(), theta.cos());
    let rates = Matrix3::new(1.0, sp * tt, cp * tt, 0.0, cp, -sp, 0.0, sp / ct, cp / ct);
    let mut j = Matrix6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(&rates);
    Ok(j)
}

fn advance(state: &BodyState, k: &StateDerivative, h: f64) -> BodyState {
    BodyState {
        position: state.position + k.position * h,
        orientation: UnitQuaternion::new_unchecked(state.orientation.into_inner() + k.orientation * h),
        twist: state.twist + k.twist * h,
    }
}

/// One classical RK4 step with the wrench held over the step; the quaternion is renormalised.
pub fn rk4_step(state: &BodyState, plant: &PlantModel, wrench: &Vector6<f64>, dt: f64) -> BodyState {
    let k1 = state_derivative(state, plant, wrench);
    let k2 = state_derivative(&advance(state, &k1, 0.5 * dt), plant, wrench);
    let k3 = state_derivative(&advance(state, &k2, 0.5 * dt), plant, wrench);
    let k4 = state_derivative(&advance(state, &k3, dt), plant, wrench);
    let sixth = dt / 6.0;
    BodyState {
        position: state.position + (k1.position + k2.position * 2.0 + k3.position * 2.0 + k4.position) * sixth,
        orientation: UnitQuaternion::from_quaternion(
            state.orientation.into_inner()
                + (k1.orientation + k2.orientation * 2.0 + k3.orientation * 2.0 + k4.orientation) * sixth,
        ),
        twist: state.twist + (k1.twist + k2.twist * 2.0 + k3.twist * 2.0 + k4.twist) * sixth,
    }
}

/// One sample of a simulated trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub state: BodyState,
    /// Wrench applied over the step that starts at `t` (zero on the last sample).
    pub wrench: Vector6<f64>,
}

pub type Trace = Vec<TraceSample>;

/// Number of fixed steps covering `[0, t_end]`.
pub fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!("t_end must be non-negative, got {t_end}")));
    }
    Ok((t_end / dt).round() as usize)
}

/// Fixed-step RK4 from `t = 0` to `t_end`, sampling every step.
///
/// `wrench_source(t, state)` is evaluated once per step (zero-order hold).
pub fn integrate<F>(initial: BodyState, plant: &PlantModel, mut wrench_source: F, dt: f64, t_end: f64) -> Result<Trace>
where
    F: FnMut(f64, &BodyState) -> Vector6<f64>,
{
    let steps = step_count(dt, t_end)?;
    let mut trace = Vec::with_capacity(steps + 1);
    let mut state = initial;
    for k in 0..steps {
        let t = k as f64 * dt;
        let wrench = wrench_source(t, &state);
        trace.push(TraceSample { t, state, wrench });
        state = rk4_step(&state, plant, &wrench, dt);
        if !state.is_finite() {
            return Err(Error::Divergence { time: t + dt, reason: "non-finite state".into() });
        }
    }
    trace.push(TraceSample { t: steps as f64 * dt, state, wrench: Vector6::zeros() });
    Ok(trace)
}

/// Column names of [`trace_to_csv`].
pub const TRACE_HEADER: [&str; 23] = [
    "t", "px", "py", "pz", "qw", "qx", "qy", "qz", "roll", "pitch", "yaw", "u", "v", "w", "p", "q", "r", "fx", "fy",
    "fz", "mx", "my", "mz",
];

/// The 23 numeric columns of one trace row, in [`TRACE_HEADER`] order.
pub fn trace_row(sample: &TraceSample) -> Vec<f64> {
    let s = &sample.state;
    let q = s.orientation.quaternion();
    let e = s.euler();
    let mut row = Vec::with_capacity(TRACE_HEADER.len());
    row.push(sample.t);
    row.extend(s.position.iter());
    row.extend([q.w, q.i, q.j, q.k]);
    row.extend(e.iter());
    row.extend(s.twist.iter());
    row.extend(sample.wrench.iter());
    row
}

pub fn write_trace_csv<W: std::io::Write>(writer: W, trace: &[TraceSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for sample in trace {
        w.write_record(trace_row(sample).iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{compose_mass_properties, mass_matrix, Assembly, ModuleSpec};

    fn eighteen_kg_plant() -> PlantModel {
        let m = Matrix6::from_diagonal(&Vector6::new(18.0, 18.0, 18.0, 0.5, 0.6, 0.7));
        PlantModel::new(m, None).unwrap()
    }

    #[test]
    fn at_rest_is_stationary() {
        let d = state_derivative(&BodyState::at_rest(Vector3::zeros()), &eighteen_kg_plant(), &Vector6::zeros());
        assert_eq!(d.twist, Vector6::zeros());
        assert_eq!(d.position, Vector3::zeros());
        assert_eq!(d.orientation.coords.norm(), 0.0);
    }

    #[test]
    fn newtons_law() {
        let d = state_derivative(
            &BodyState::at_rest(Vector3::zeros()),
            &eighteen_kg_plant(),
            &Vector6::new(18.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        );
        assert!((d.twist - Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn principal_axis_spin_is_steady() {
        let mut s = BodyState::at_rest(Vector3::zeros());
        s.twist[4] = 2.0;
        let d = state_derivative(&s, &eighteen_kg_plant(), &Vector6::zeros());
        assert!(angular(&d.twist).norm() < 1e-14);
    }

    #[test]
    fn kinematic_transform_cases() {
        assert_eq!(kinematic_transform(&Vector3::zeros()).unwrap(), Matrix6::identity());
        let psi = 0.7;
        let j = kinematic_transform(&Vector3::new(0.0, 0.0, psi)).unwrap();
        let rz = Matrix3::new(psi.cos(), -psi.sin(), 0.0, psi.sin(), psi.cos(), 0.0, 0.0, 0.0, 1.0);
        assert!((j.fixed_view::<3, 3>(0, 0) - rz).amax() < 1e-15);
        let sing = kinematic_transform(&Vector3::new(0.0, std::f64::consts::FRAC_PI_2, 0.0));
        assert!(matches!(sing, Err(Error::Singularity(_))));
    }

    #[test]
    fn euler_rates_match_quaternion_kinematics() {
        let mut s = BodyState::at_rest(Vector3::zeros());
        s.orientation = UnitQuaternion::from_euler_angles(0.2, -0.4, 1.1);
        s.twist = Vector6::new(0.0, 0.0, 0.0, 0.3, -0.5, 0.8);
        let j = kinematic_transform(&s.euler()).unwrap();
        let eta_dot = j * s.twist;
        let h = 1e-6;
        let next = rk4_step(&s, &eighteen_kg_plant(), &Vector6::zeros(), h);
        let fd = (next.euler() - s.euler()) / h;
        assert!((fd - Vector3::new(eta_dot[3], eta_dot[4], eta_dot[5])).norm() < 1e-4);
    }

    #[test]
    fn constant_velocity_advances_linearly() {
        let mut s = BodyState::at_rest(Vector3::new(1.0, 2.0, 3.0));
        s.twist = Vector6::new(0.3, -0.1, 0.2, 0.0, 0.0, 0.0);
        let trace = integrate(s, &eighteen_kg_plant(), |_, _| Vector6::zeros(), 0.01, 5.0).unwrap();
        let last = trace.last().unwrap();
        let expect = s.position + linear(&s.twist) * last.t;
        assert!((last.state.position - expect).norm() < 1e-10);
    }

    #[test]
    fn drag_only_motion_slows_down() {
        let a = Assembly::single(ModuleSpec::modcube());
        let props = compose_mass_properties(&a);
        let m = mass_matrix(&props, &Matrix6::zeros()).unwrap();
        let lut = Arc::new(DragLut::uniform(0.0441, 1000.0, 1.05).unwrap());
        let plant = PlantModel::new(m, Some(lut)).unwrap();
        let mut s = BodyState::at_rest(Vector3::zeros());
        s.twist = Vector6::new(0.5, 0.2, 0.0, 0.0, 0.0, 0.3);
        let trace = integrate(s, &plant, |_, _| Vector6::zeros(), 0.01, 3.0).unwrap();
        for w in trace.windows(2) {
            assert!(linear(&w[1].state.twist).norm() < linear(&w[0].state.twist).norm());
        }
    }

    #[test]
    fn divergence_is_reported_with_time() {
        let plant = eighteen_kg_plant();
        let r = integrate(
            BodyState::at_rest(Vector3::zeros()),
            &plant,
            |t, _| if t > 0.5 { Vector6::repeat(f64::NAN) } else { Vector6::zeros() },
            0.1,
            2.0,
        );
        match r {
            Err(Error::Divergence { time, .. }) => assert!(time > 0.5 && time < 0.75),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let trace = integrate(BodyState::at_rest(Vector3::zeros()), &eighteen_kg_plant(), |_, _| Vector6::zeros(), 0.1, 0.3)
            .unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("t,px,py,pz,qw"));
        assert_eq!(lines[1].split(',').count(), 23);
    }

    #[test]
    fn bad_step_rejected() {
        assert!(step_count(0.0, 1.0).is_err());
        assert!(step_count(0.1, -1.0).is_err());
        assert_eq!(step_count(0.01, 10.0).unwrap(), 1000);
    }
}

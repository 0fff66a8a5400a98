//! Feed-forward PD control, thrust allocation and thruster polynomial models.

use nalgebra::{DMatrix, DVector, Matrix6xX, MatrixXx6, UnitQuaternion, Vector3, Vector6};

use crate::dynamics::{BodyState, PlantModel};
use crate::error::{Error, Result};
use crate::math::{angular, linear, numerical_rank, rotation_vector, stack};
use crate::vehicle::{Assembly, MassProperties, ThrusterSpec};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Diagonal PD gains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSet {
    pub kp: Vector6<f64>,
    pub kd: Vector6<f64>,
}

impl GainSet {
    pub fn new(kp: Vector6<f64>, kd: Vector6<f64>) -> Result<Self> {
        let g = Self { kp, kd };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(kp: f64, kd: f64) -> Result<Self> {
        Self::new(Vector6::repeat(kp), Vector6::repeat(kd))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kp.iter().chain(self.kd.iter()).any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Configuration("gains must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Desired pose with world-frame rates and accelerations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub angular_acceleration: Vector3<f64>,
}

impl Reference {
    /// Stationary reference at a pose.
    pub fn hold(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
            velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            angular_acceleration: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.orientation.coords.iter())
            .chain(self.velocity.iter())
            .chain(self.angular_velocity.iter())
            .chain(self.acceleration.iter())
            .chain(self.angular_acceleration.iter())
            .all(|x| x.is_finite())
    }
}

/// Pose and rate errors expressed in the body frame.
pub fn body_errors(state: &BodyState, reference: &Reference) -> (Vector6<f64>, Vector6<f64>) {
    let r_inv = state.orientation.inverse();
    let e_p = r_inv * (reference.position - state.position);
    let e_r = r_inv * rotation_vector(&(reference.orientation * state.orientation.inverse()));
    let e_v = r_inv * reference.velocity - linear(&state.twist);
    let e_w = r_inv * reference.angular_velocity - angular(&state.twist);
    (stack(&e_p, &e_r), stack(&e_v, &e_w))
}

/// Body-frame control wrench `K_P η̃ + K_D η̃̇ + M ν̇_d + C(ν)ν + D(v_r)v_r`.
pub fn pd_wrench(state: &BodyState, reference: &Reference, gains: &GainSet, plant: &PlantModel) -> Vector6<f64> {
    let (e, e_dot) = body_errors(state, reference);
    let r_inv = state.orientation.inverse();
    let nu_dot_d = stack(&(r_inv * reference.acceleration), &(r_inv * reference.angular_acceleration));
    gains.kp.component_mul(&e)
        + gains.kd.component_mul(&e_dot)
        + plant.mass_matrix() * nu_dot_d
        + plant.coriolis_term(&state.twist)
        + plant.drag_resistance(&plant.relative_twist(state))
}

/// Thruster Jacobian and its pseudo-inverse.
#[derive(Clone, Debug)]
pub struct AllocationModel {
    pub jacobian: Matrix6xX<f64>,
    pub pseudo_inverse: MatrixXx6<f64>,
    pub limits: Vec<(f64, f64)>,
    pub rank: usize,
}

impl AllocationModel {
    pub fn from_jacobian(jacobian: Matrix6xX<f64>, limits: Vec<(f64, f64)>) -> Result<Self> {
        let n = jacobian.ncols();
        if n == 0 {
            return Err(Error::Argument("allocation needs at least one thruster".into()));
        }
        if limits.len() != n {
            return Err(Error::Argument(format!("{} limits for {n} thrusters", limits.len())));
        }
        let dense = DMatrix::from_column_slice(6, n, jacobian.as_slice());
        let svd = dense.clone().svd(true, true);
        let eps = svd.singular_values.max() * RANK_TOLERANCE;
        let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::Conditioning(e.to_string()))?;
        Ok(Self {
            pseudo_inverse: MatrixXx6::from_column_slice(pinv.as_slice()),
            rank: numerical_rank(&dense, RANK_TOLERANCE),
            jacobian,
            limits,
        })
    }

    pub fn thruster_count(&self) -> usize {
        self.jacobian.ncols()
    }

    /// Full 6-DoF controllability.
    pub fn is_controllable(&self) -> bool {
        self.rank == 6
    }

    pub fn controllability_warning(&self) -> Option<String> {
        (!self.is_controllable()).then(|| format!("thruster Jacobian has rank {} < 6", self.rank))
    }

    pub fn wrench(&self, forces: &DVector<f64>) -> Vector6<f64> {
        &self.jacobian * forces
    }
}

/// Jacobian columns `[r; p × r]` with positions taken relative to the centre of mass.
pub fn build_allocation(assembly: &Assembly, props: &MassProperties) -> Result<AllocationModel> {
    let thrusters = assembly.thrusters();
    let mut j = Matrix6xX::zeros(thrusters.len());
    let mut limits = Vec::with_capacity(thrusters.len());
    for (i, (pos, dir, spec)) in thrusters.iter().enumerate() {
        let p = pos - props.com;
        j.set_column(i, &stack(dir, &p.cross(dir)));
        limits.push((spec.f_min, spec.f_max));
    }
    AllocationModel::from_jacobian(j, limits)
}

/// Outcome of [`allocate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub forces: DVector<f64>,
    pub unclipped: DVector<f64>,
    pub clipped: Vec<bool>,
    /// `‖J_t F − τ‖` for the clipped forces.
    pub residual: f64,
}

impl Allocation {
    pub fn any_clipped(&self) -> bool {
        self.clipped.iter().any(|&c| c)
    }
}

/// Minimum-norm allocation followed by per-thruster clipping.
pub fn allocate(model: &AllocationModel, tau: &Vector6<f64>) -> Allocation {
    let unclipped = &model.pseudo_inverse * tau;
    let mut forces = unclipped.clone();
    let mut clipped = vec![false; forces.len()];
    for (i, &(lo, hi)) in model.limits.iter().enumerate() {
        let f = forces[i].clamp(lo, hi);
        clipped[i] = f != forces[i];
        forces[i] = f;
    }
    let residual = (model.wrench(&forces) - tau).norm();
    Allocation { forces, unclipped, clipped, residual }
}

/// Thrust produced by a command `u` within the declared range.
pub fn thrust_from_command(spec: &ThrusterSpec, u: f64) -> Result<f64> {
    let [lo, hi] = spec.cmd_range;
    if !(u >= lo && u <= hi) {
        return Err(Error::Argument(format!("command {u} outside [{lo}, {hi}]")));
    }
    Ok(spec.cmd_poly.eval(u))
}

/// Command producing thrust `f`, by bisection on the monotone command map.
pub fn command_from_thrust(spec: &ThrusterSpec, f: f64) -> Result<f64> {
    let [mut lo, mut hi] = spec.cmd_range;
    let (mut f_lo, f_hi) = (spec.cmd_poly.eval(lo), spec.cmd_poly.eval(hi));
    if !(f >= f_lo.min(f_hi) && f <= f_lo.max(f_hi)) {
        return Err(Error::Argument(format!("thrust {f} N outside attainable [{}, {}]", f_lo.min(f_hi), f_lo.max(f_hi))));
    }
    if f == f_lo {
        return Ok(lo);
    }
    if f == f_hi {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = spec.cmd_poly.eval(mid);
        if (f_mid - f).abs() <= 1e-12 || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            return Ok(mid);
        }
        if (f_mid > f) == (f_lo > f) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn thruster_power(spec: &ThrusterSpec, f: f64) -> f64 {
    spec.power_poly.eval(f)
}

/// Electrical power of a force vector, thruster by thruster.
pub fn allocation_power(specs: &[&ThrusterSpec], forces: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(forces.len(), specs.iter().zip(forces.iter()).map(|(s, &f)| thruster_power(s, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{compose_mass_properties, mass_matrix, ModuleSpec, Polynomial};
    use nalgebra::Matrix6;

    fn default_model() -> (Assembly, AllocationModel) {
        let a = Assembly::single(ModuleSpec::modcube());
        let props = compose_mass_properties(&a);
        let m = build_allocation(&a, &props).unwrap();
        (a, m)
    }

    fn plant() -> PlantModel {
        let a = Assembly::single(ModuleSpec::modcube());
        PlantModel::new(mass_matrix(&compose_mass_properties(&a), &Matrix6::zeros()).unwrap(), None).unwrap()
    }

    fn one_thruster(pos: Vector3<f64>) -> AllocationModel {
        let spec = ThrusterSpec::with_default_models(pos, Vector3::x());
        let p = pos;
        let mut j = Matrix6xX::zeros(1);
        j.set_column(0, &stack(&spec.direction, &p.cross(&spec.direction)));
        AllocationModel::from_jacobian(j, vec![(spec.f_min, spec.f_max)]).unwrap()
    }

    #[test]
    fn jacobian_columns() {
        let m = one_thruster(Vector3::zeros());
        assert_eq!(m.jacobian.column(0).into_owned(), Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(m.rank, 1);
        assert!(m.controllability_warning().is_some());
        let offset = one_thruster(Vector3::new(0.0, 0.1, 0.0));
        let col = offset.jacobian.column(0);
        assert!((col[3] - 0.0).abs() < 1e-15 && (col[4] - 0.0).abs() < 1e-15 && (col[5] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn default_module_is_fully_actuated() {
        let (_, m) = default_model();
        assert_eq!(m.thruster_count(), 8);
        assert_eq!(m.rank, 6);
        let identity = &m.jacobian * &m.pseudo_inverse;
        assert!((identity - Matrix6::identity()).amax() < 1e-9);
    }

    #[test]
    fn heave_is_shared_by_vertical_thrusters() {
        let (_, m) = default_model();
        let a = allocate(&m, &Vector6::new(0.0, 0.0, 4.0, 0.0, 0.0, 0.0));
        let vertical: Vec<f64> = m
            .jacobian
            .column_iter()
            .zip(a.forces.iter())
            .filter(|(c, _)| c[2].abs() > 1e-12)
            .map(|(_, &f)| f)
            .collect();
        assert_eq!(vertical.len(), 4);
        for f in &vertical {
            assert!((f - vertical[0]).abs() < 1e-12);
        }
        // Four thrusters inclined at 45°: 4 f cos 45° = F_z.
        assert!((vertical[0] - 4.0 / (4.0 * std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
        assert!(a.residual < 1e-9);
    }

    #[test]
    fn zero_and_saturating_requests() {
        let (_, m) = default_model();
        let zero = allocate(&m, &Vector6::zeros());
        assert_eq!(zero.forces.norm(), 0.0);
        assert!(!zero.any_clipped());
        let big = allocate(&m, &Vector6::new(500.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(big.any_clipped());
        assert!(big.residual > 0.0);
        for (f, (lo, hi)) in big.forces.iter().zip(&m.limits) {
            assert!(f >= lo && f <= hi);
        }
    }

    #[test]
    fn pd_examples() {
        let p = plant();
        let s = BodyState::at_rest(Vector3::zeros());
        let g = GainSet::uniform(10.0, 0.0).unwrap();
        assert_eq!(pd_wrench(&s, &Reference::hold(Vector3::zeros(), UnitQuaternion::identity()), &g, &p), Vector6::zeros());
        let tau = pd_wrench(&s, &Reference::hold(Vector3::x(), UnitQuaternion::identity()), &g, &p);
        assert!((tau - Vector6::new(10.0, 0.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cruise_wrench_is_model_compensation() {
        let a = Assembly::single(ModuleSpec::modcube());
        let m = mass_matrix(&compose_mass_properties(&a), &Matrix6::zeros()).unwrap();
        let lut = std::sync::Arc::new(crate::hydro::DragLut::uniform(0.0441, 1000.0, 1.05).unwrap());
        let p = PlantModel::new(m, Some(lut.clone())).unwrap();
        let q = UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3);
        let twist = Vector6::new(0.3, 0.1, -0.05, 0.02, 0.0, 0.1);
        let s = BodyState { position: Vector3::new(1.0, 2.0, 3.0), orientation: q, twist };
        let mut r = Reference::hold(s.position, q);
        r.velocity = q * linear(&twist);
        r.angular_velocity = q * angular(&twist);
        let tau = pd_wrench(&s, &r, &GainSet::uniform(7.0, 3.0).unwrap(), &p);
        let expect = crate::vehicle::coriolis_from_mass_matrix(&m, &twist) * twist - lut.query_drag(&twist);
        assert!((tau - expect).norm() < 1e-12);
    }

    #[test]
    fn command_round_trip_and_defaults() {
        let spec = ThrusterSpec::with_default_models(Vector3::zeros(), Vector3::x());
        assert_eq!(thrust_from_command(&spec, 0.0).unwrap(), 0.0);
        assert!((thrust_from_command(&spec, 0.5).unwrap() - 5.0).abs() < 1e-15);
        assert!((thruster_power(&spec, 5.0) - 625.0).abs() < 1e-12);
        for k in 0..100 {
            let u = -1.0 + 2.0 * k as f64 / 99.0;
            let f = thrust_from_command(&spec, u).unwrap();
            assert!((command_from_thrust(&spec, f).unwrap() - u).abs() < 1e-6);
        }
        assert!(command_from_thrust(&spec, 10.5).is_err());
        assert!(thrust_from_command(&spec, 1.5).is_err());
    }

    #[test]
    fn nonlinear_decreasing_map_inverts() {
        let mut spec = ThrusterSpec::with_default_models(Vector3::zeros(), Vector3::x());
        spec.cmd_poly = Polynomial::new(vec![0.0, -8.0, 0.0, -2.0]).unwrap();
        for u in [-0.9, -0.3, 0.0, 0.25, 0.8] {
            let f = thrust_from_command(&spec, u).unwrap();
            let back = command_from_thrust(&spec, f).unwrap();
            assert!((spec.cmd_poly.eval(back) - f).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_gains_rejected() {
        assert!(GainSet::uniform(-1.0, 0.0).is_err());
    }
}

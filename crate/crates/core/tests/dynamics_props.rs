use std::sync::Arc;

use modcube_core::dynamics::{integrate, AmbientFlow, BodyState, PlantModel};
use modcube_core::hydro::DragLut;
use modcube_core::vehicle::{compose_mass_properties, mass_matrix_about, Assembly, ModuleSpec};
use nalgebra::{Matrix6, UnitQuaternion, Vector3, Vector6};
use proptest::prelude::*;

fn l_shape_mass_matrix() -> Matrix6<f64> {
    let a = Assembly::from_cells(&ModuleSpec::modcube(), &[[0, 0, 0], [1, 0, 0], [0, 1, 0]]).unwrap();
    let props = compose_mass_properties(&a);
    // Reference point off the CoM so the mass matrix has cross-coupling blocks.
    mass_matrix_about(&props, &Matrix6::zeros(), &Vector3::new(0.03, -0.02, 0.01)).unwrap()
}

fn tumbling_state() -> BodyState {
    BodyState {
        position: Vector3::zeros(),
        orientation: UnitQuaternion::from_euler_angles(0.3, 0.2, -0.5),
        twist: Vector6::new(0.1, -0.05, 0.02, 1.2, -0.7, 2.1),
    }
}

#[test]
fn torque_free_tumbling_conserves_energy() {
    let plant = PlantModel::new(l_shape_mass_matrix(), None).unwrap();
    let s0 = tumbling_state();
    let trace = integrate(s0, &plant, |_, _| Vector6::zeros(), 0.01, 10.0).unwrap();
    let e0 = plant.kinetic_energy(&s0.twist);
    let worst = trace
        .iter()
        .map(|s| ((plant.kinetic_energy(&s.state.twist) - e0) / e0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "relative energy drift {worst}");
    for s in &trace {
        assert!((s.state.orientation.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn drag_never_adds_energy() {
    let lut = Arc::new(DragLut::uniform(0.05, 1000.0, 1.05).unwrap());
    let plant = PlantModel::new(l_shape_mass_matrix(), Some(lut)).unwrap();
    let trace = integrate(tumbling_state(), &plant, |_, _| Vector6::zeros(), 0.01, 10.0).unwrap();
    for w in trace.windows(2) {
        let (a, b) = (plant.kinetic_energy(&w[0].state.twist), plant.kinetic_energy(&w[1].state.twist));
        assert!(b <= a, "energy rose from {a} to {b} at t = {}", w[1].t);
    }
}

fn final_state(dt: f64) -> BodyState {
    // Light drag keeps the angular decay non-stiff at the coarsest step.
    let lut = Arc::new(DragLut::uniform(0.002, 1000.0, 1.05).unwrap());
    let plant = PlantModel::new(l_shape_mass_matrix(), Some(lut)).unwrap();
    // Constant wrench keeps the right-hand side smooth in time.
    let wrench = Vector6::new(2.0, -1.0, 0.5, 0.05, 0.02, -0.03);
    integrate(tumbling_state(), &plant, |_, _| wrench, dt, 2.0).unwrap().last().unwrap().state
}

fn state_distance(a: &BodyState, b: &BodyState) -> f64 {
    let dq = (a.orientation.coords - b.orientation.coords).norm();
    ((a.position - b.position).norm_squared() + dq * dq + (a.twist - b.twist).norm_squared()).sqrt()
}

#[test]
fn rk4_observed_order() {
    let (s1, s2, s3) = (final_state(0.02), final_state(0.01), final_state(0.005));
    let order = (state_distance(&s1, &s2) / state_distance(&s2, &s3)).log2();
    println!("observed order {order}");
    assert!(order >= 3.5, "observed order {order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotated_scenario_gives_rotated_trace(
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.0f64..3.0,
        flow in prop::array::uniform3(-0.3f64..0.3),
    ) {
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 1e-3);
        let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
        let flow = Vector3::from(flow);
        let lut = Arc::new(DragLut::uniform(0.05, 1000.0, 1.05).unwrap());
        let mut plant = PlantModel::new(l_shape_mass_matrix(), Some(lut)).unwrap();
        plant.ambient_flow = AmbientFlow::Uniform(flow);
        let mut rotated_plant = plant.clone();
        rotated_plant.ambient_flow = AmbientFlow::Uniform(rot * flow);

        let s0 = tumbling_state();
        let r0 = BodyState { position: rot * s0.position, orientation: rot * s0.orientation, twist: s0.twist };
        // Body-frame wrench programme, unchanged by a world rotation.
        let wrench = |t: f64, _: &BodyState| Vector6::new(t.sin(), 0.5, -0.2, 0.01, 0.0, 0.02 * t.cos());
        let a = integrate(s0, &plant, wrench, 0.01, 2.0).unwrap();
        let b = integrate(r0, &rotated_plant, wrench, 0.01, 2.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let err = (rot * x.state.position - y.state.position).norm();
            prop_assert!(err < 1e-8, "t = {} err = {err}", x.t);
            prop_assert!((rot * x.state.orientation).angle_to(&y.state.orientation) < 1e-8);
            prop_assert!((x.state.twist - y.state.twist).norm() < 1e-8);
        }
    }
}

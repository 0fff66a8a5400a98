use modcube_core::harness::{configs, docking_check, read_pose_csv, rmse, run_scenario, PoseSample, Scenario, ScenarioDoc};
use modcube_core::vehicle::compose_mass_properties;
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

fn bundled(name: &str) -> ScenarioDoc {
    ScenarioDoc::from_json(configs::scenario_json(name).unwrap()).unwrap()
}

fn subsample(s: &[PoseSample], every: usize) -> Vec<PoseSample> {
    s.iter().step_by(every).copied().collect()
}

#[test]
fn identical_seeds_give_bit_identical_runs() {
    let s = Scenario::resolve(&bundled("self_assembly"), None).unwrap();
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&Scenario::resolve(&bundled("self_assembly"), None).unwrap()).unwrap();
    assert_eq!(a.summary, b.summary);
    for (x, y) in a.bodies.iter().zip(&b.bodies) {
        assert_eq!(x.samples, y.samples);
        assert_eq!(x.forces, y.forces);
    }
}

#[test]
fn rmse_recomputed_from_exported_csv_matches() {
    let s = Scenario::resolve(&bundled("spiral"), None).unwrap();
    let r = run_scenario(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    r.write_outputs(dir.path()).unwrap();
    let b = &r.bodies[0];
    let trace = read_pose_csv(std::fs::File::open(dir.path().join(format!("{}_trace.csv", b.name))).unwrap()).unwrap();
    let reference = read_pose_csv(std::fs::File::open(dir.path().join(format!("{}_reference.csv", b.name))).unwrap()).unwrap();
    let again = rmse(&trace, &reference).unwrap();
    assert!((again.position - b.summary.position_rmse.unwrap()).abs() < 1e-12);
    assert!((again.orientation - b.summary.orientation_rmse.unwrap()).abs() < 1e-12);
    let energy: f64 = b.power.iter().sum::<f64>() * s.doc.dt;
    assert_eq!(energy, b.summary.energy_used);
}

#[test]
fn spiral_tracking_stays_near_its_pinned_value() {
    let r = run_scenario(&Scenario::resolve(&bundled("spiral"), None).unwrap()).unwrap();
    let s = &r.summary.bodies[0];
    let rmse = s.position_rmse.unwrap();
    // Pinned from the tuned default gains.
    assert!((rmse - 5.99e-5).abs() < 0.1 * 5.99e-5, "{rmse}");
    assert_eq!(s.saturation_count, 0);
}

#[test]
fn merge_recomposes_mass_properties_and_keeps_momentum() {
    let s = Scenario::resolve(&bundled("self_assembly"), None).unwrap();
    let r = run_scenario(&s).unwrap();
    let ev = r.summary.docking.clone().expect("docked");
    let merged = r.body(ev.merged.as_deref().unwrap()).unwrap();
    assert_eq!(merged.assembly.len(), 2);
    assert_eq!(merged.mass_properties, compose_mass_properties(&merged.assembly));
    let parts: Vec<_> = ev.bodies.iter().map(|n| r.body(n).unwrap()).collect();
    let total: f64 = parts.iter().map(|p| p.mass_properties.total_mass).sum();
    assert_eq!(merged.mass_properties.total_mass, total);
    let p_before: Vector3<f64> = parts
        .iter()
        .map(|p| p.samples.last().unwrap().state.world_velocity() * p.mass_properties.total_mass)
        .sum();
    let p_after = merged.samples[0].state.world_velocity() * total;
    assert!((p_before - p_after).norm() < 1e-12);
    let c_before: Vector3<f64> = parts
        .iter()
        .map(|p| p.samples.last().unwrap().state.position * p.mass_properties.total_mass)
        .sum::<Vector3<f64>>()
        / total;
    assert!((c_before - merged.samples[0].state.position).norm() < 0.006);
    assert_eq!(merged.samples[0].t, ev.time);
}

#[test]
fn docking_detection_survives_subsampling_to_10_hz() {
    let mut doc = bundled("self_assembly");
    doc.docking.as_mut().unwrap().merge = false;
    let r = run_scenario(&Scenario::resolve(&doc, None).unwrap()).unwrap();
    let (a, b) = (r.bodies[0].pose_series(), r.bodies[1].pose_series());
    let full = docking_check(&a, &b, 0.21, 1.0, 0.005).unwrap();
    assert_eq!(Some(full), r.summary.docking.as_ref().map(|d| d.time));
    let coarse = docking_check(&subsample(&a, 10), &subsample(&b, 10), 0.21, 1.0, 0.005).unwrap();
    assert!((coarse - full).abs() < 0.5, "{full} vs {coarse}");
}

fn series(dt: f64, n: usize, dist: impl Fn(f64) -> f64) -> (Vec<PoseSample>, Vec<PoseSample>) {
    let at = |t: f64, p: Vector3<f64>| PoseSample { t, position: p, orientation: UnitQuaternion::identity() };
    let a = (0..n).map(|k| at(k as f64 * dt, Vector3::zeros())).collect();
    let b = (0..n).map(|k| at(k as f64 * dt, Vector3::new(dist(k as f64 * dt), 0.0, 0.0))).collect();
    (a, b)
}

proptest! {
    #[test]
    fn synthetic_approach_detection_is_subsampling_invariant(speed in 0.02f64..0.3, start in 0.3f64..0.8, wobble in 0.0f64..0.004) {
        let dist = |t: f64| (start - speed * t).max(0.21) + wobble * (7.0 * t).sin() * (-(t)).exp();
        let (a, b) = series(0.01, 8000, dist);
        let full = docking_check(&a, &b, 0.21, 1.0, 0.005);
        let coarse = docking_check(&subsample(&a, 10), &subsample(&b, 10), 0.21, 1.0, 0.005);
        prop_assert!(full.is_some() && coarse.is_some());
        prop_assert!((full.unwrap() - coarse.unwrap()).abs() < 0.5);
    }
}

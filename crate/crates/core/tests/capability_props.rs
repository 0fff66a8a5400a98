mod common;

use modcube_core::capability::{
    mie_volume, reachable_wrench_space, reachable_wrench_space_over, thrust_variance, wrench_extent, ReachOptions,
    Weighting, WrenchMode,
};
use modcube_core::control::{build_allocation, AllocationModel};
use modcube_core::hull::ConvexHull;
use modcube_core::hydro::fibonacci_directions;
use modcube_core::vehicle::{compose_mass_properties, Assembly, CubeRotation, ModuleSpec};
use nalgebra::{Matrix3, Matrix6xX, Rotation3, Vector3};
use proptest::prelude::*;

fn modcube_model(cells: &[[i32; 3]]) -> AllocationModel {
    let a = Assembly::from_cells(&ModuleSpec::modcube(), cells).unwrap();
    build_allocation(&a, &compose_mass_properties(&a)).unwrap()
}

fn single() -> AllocationModel {
    modcube_model(&[[0, 0, 0]])
}

#[test]
fn lp_matches_zonotope_ray_shooting() {
    let dirs = fibonacci_directions(25).unwrap();
    for seed in [11, 12] {
        let model = common::random_layout(seed);
        for mode in [WrenchMode::Force, WrenchMode::Torque] {
            for d in dirs.iter() {
                let lp = wrench_extent(&model, mode, d, ReachOptions::default()).unwrap().0;
                let oracle = common::zonotope_extent(&model, &mode.embed(d));
                assert!((lp - oracle).abs() <= 1e-6 * oracle.max(1e-9), "seed {seed} {mode:?} {d}: {lp} vs {oracle}");
            }
        }
    }
}

/// Cube rotations that permute the thruster set, up to direction sign.
fn layout_symmetries(model: &AllocationModel) -> Vec<Matrix3<f64>> {
    let cols: Vec<_> = model.jacobian.column_iter().map(|c| c.into_owned()).collect();
    CubeRotation::all()
        .iter()
        .map(|r| r.matrix())
        .filter(|r| {
            cols.iter().all(|c| {
                let (f, t) = (r * c.fixed_rows::<3>(0), r * c.fixed_rows::<3>(3));
                cols.iter().any(|o| {
                    let (of, ot) = (o.fixed_rows::<3>(0), o.fixed_rows::<3>(3));
                    ((of - f).norm() < 1e-12 && (ot - t).norm() < 1e-12) || ((of + f).norm() < 1e-12 && (ot + t).norm() < 1e-12)
                })
            })
        })
        .collect()
}

#[test]
fn default_module_extents_respect_its_symmetries() {
    let model = single();
    let syms = layout_symmetries(&model);
    assert!(syms.len() >= 4, "found {} symmetries", syms.len());
    let dirs = fibonacci_directions(40).unwrap();
    for mode in [WrenchMode::Force, WrenchMode::Torque] {
        for d in dirs.iter() {
            let base = wrench_extent(&model, mode, d, ReachOptions::default()).unwrap().0;
            for r in &syms {
                let img = wrench_extent(&model, mode, &(r * d), ReachOptions::default()).unwrap().0;
                assert!((img - base).abs() <= 0.01 * base.max(1e-9), "{mode:?} {d}: {base} vs {img}");
            }
        }
    }
}

#[test]
fn boundary_points_lie_on_their_hull() {
    for mode in [WrenchMode::Force, WrenchMode::Torque] {
        let space = reachable_wrench_space(&single(), mode, 200).unwrap();
        let pts = space.boundary_points();
        let hull = ConvexHull::new(&pts).unwrap();
        let reach = space.extents.iter().cloned().fold(0.0, f64::max);
        for p in &pts {
            assert!(hull.signed_distance(p) >= -0.02 * reach, "{mode:?}: point {p} deep inside hull");
        }
    }
}

#[test]
fn mie_is_rotation_invariant() {
    let model = single();
    let dirs = fibonacci_directions(400).unwrap();
    let base = mie_volume(&reachable_wrench_space_over(&model, WrenchMode::Force, &dirs, ReachOptions::default()).unwrap())
        .unwrap()
        .volume;
    for (axis, angle) in [(Vector3::new(1.0, 2.0, 3.0), 0.7), (Vector3::new(-1.0, 0.5, 0.2), 2.1)] {
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner();
        let space = reachable_wrench_space_over(&model, WrenchMode::Force, &dirs.rotated(&r), ReachOptions::default()).unwrap();
        let v = mie_volume(&space).unwrap().volume;
        assert!((v / base - 1.0).abs() < 0.02, "{v} vs {base}");
    }
}

#[test]
fn thrust_variance_shrinks_with_more_modules() {
    let dirs = fibonacci_directions(200).unwrap();
    let s = |cells: &[[i32; 3]]| thrust_variance(&modcube_model(cells), WrenchMode::Force, &dirs, Weighting::Power).unwrap().sigma2;
    let (one, two, three) = (s(&[[0, 0, 0]]), s(&[[0, 0, 0], [1, 0, 0]]), s(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]]));
    assert!(one > two && two > three, "{one} {two} {three}");
}

fn scaled(model: &AllocationModel, k: f64) -> AllocationModel {
    let limits = model.limits.iter().map(|&(_, hi)| (-hi * k, hi * k)).collect();
    AllocationModel::from_jacobian(model.jacobian.clone(), limits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_limits_doubles_extents(seed in 0u64..1000, dx in -1.0f64..1.0, dy in -1.0f64..1.0, dz in -1.0f64..1.0, torque in any::<bool>()) {
        let d = Vector3::new(dx, dy, dz);
        prop_assume!(d.norm() > 1e-3);
        let d = d.normalize();
        let mode = if torque { WrenchMode::Torque } else { WrenchMode::Force };
        let base = scaled(&common::random_layout(seed), 1.0);
        let a = wrench_extent(&base, mode, &d, ReachOptions::default()).unwrap().0;
        let b = wrench_extent(&scaled(&base, 2.0), mode, &d, ReachOptions::default()).unwrap().0;
        prop_assert!((b - 2.0 * a).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn adding_a_thruster_never_shrinks(seed in 0u64..1000, dx in -1.0f64..1.0, dy in -1.0f64..1.0, dz in -1.0f64..1.0, torque in any::<bool>()) {
        let d = Vector3::new(dx, dy, dz);
        prop_assume!(d.norm() > 1e-3);
        let d = d.normalize();
        let mode = if torque { WrenchMode::Torque } else { WrenchMode::Force };
        let big = common::random_layout(seed);
        let n = big.thruster_count();
        let small = AllocationModel::from_jacobian(
            Matrix6xX::from_fn(n - 1, |r, c| big.jacobian[(r, c)]),
            big.limits[..n - 1].to_vec(),
        ).unwrap();
        let a = wrench_extent(&small, mode, &d, ReachOptions::default()).unwrap().0;
        let b = wrench_extent(&big, mode, &d, ReachOptions::default()).unwrap().0;
        prop_assert!(b >= a - 1e-9 * a.max(1.0));
    }
}

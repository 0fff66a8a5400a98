//! Test oracles shared by integration tests.
#![allow(dead_code)]

use modcube_core::control::AllocationModel;
use modcube_core::math::stack;
use nalgebra::{DMatrix, Matrix6xX, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random layout of 6 to 8 thrusters with asymmetric limits straddling zero.
pub fn random_layout(seed: u64) -> AllocationModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..=8);
    let mut j = Matrix6xX::zeros(n);
    let mut limits = Vec::with_capacity(n);
    for i in 0..n {
        let p = Vector3::from_fn(|_, _| rng.random_range(-0.3..0.3));
        let d = loop {
            let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            if v.norm() > 0.2 && v.norm() < 1.0 {
                break v.normalize();
            }
        };
        j.set_column(i, &stack(&d, &p.cross(&d)));
        limits.push((-rng.random_range(2.0..10.0), rng.random_range(2.0..10.0)));
    }
    AllocationModel::from_jacobian(j, limits).unwrap()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Ray-shooting extent of `e` in the full-dimensional zonotope `{J F : f_min ≤ F ≤ f_max}`.
///
/// Facet normals come from every 5-subset of generators; support values are the maximum over
/// all corners of the thrust box.
pub fn zonotope_extent(model: &AllocationModel, e: &Vector6<f64>) -> f64 {
    let n = model.thruster_count();
    assert!(n <= 10, "vertex enumeration is exponential");
    let corners: Vec<Vector6<f64>> = (0..1usize << n)
        .map(|mask| {
            let mut w = Vector6::zeros();
            for i in 0..n {
                let f = if mask >> i & 1 == 1 { model.limits[i].1 } else { model.limits[i].0 };
                w += model.jacobian.column(i) * f;
            }
            w
        })
        .collect();
    let mut best = f64::INFINITY;
    for s in subsets(n, 5) {
        let g = DMatrix::from_fn(6, 5, |r, c| model.jacobian[(r, s[c])]);
        let svd = g.clone().svd(true, false);
        let sv = &svd.singular_values;
        if sv.min() < 1e-9 * sv.max() {
            continue;
        }
        // Normal to the span of the five generators.
        let full = DMatrix::from_fn(6, 6, |r, c| if c < 5 { g[(r, c)] } else { 0.0 });
        let svd = full.svd(true, false);
        let k = svd.singular_values.imin();
        let u = svd.u.unwrap();
        let h: Vector6<f64> = Vector6::from_fn(|r, _| u[(r, k)]);
        for h in [h, -h] {
            let he = h.dot(e);
            if he > 1e-12 {
                let support = corners.iter().map(|c| h.dot(c)).fold(f64::NEG_INFINITY, f64::max);
                best = best.min(support.max(0.0) / he);
            }
        }
    }
    best
}

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::thruster::ThrusterSpec;
use crate::error::{Error, Result};

/// Default cube edge, metres.
pub const DEFAULT_EDGE: f64 = 0.21;
/// Fresh-water density used for the neutral-buoyancy default mass, kg/m³.
pub const WATER_DENSITY: f64 = 1000.0;
/// Default Monte-Carlo interior samples per module.
pub const DEFAULT_BODY_POINTS: usize = 20_000;

/// One of the 24 proper rotations of the cube, stored as a signed permutation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeRotation([[i8; 3]; 3]);

impl CubeRotation {
    pub const IDENTITY: CubeRotation = CubeRotation([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    /// All 24 rotations in a fixed order (identity first).
    pub fn all() -> &'static [CubeRotation] {
        static ALL: OnceLock<Vec<CubeRotation>> = OnceLock::new();
        ALL.get_or_init(|| {
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let mut out = Vec::with_capacity(24);
            for p in perms {
                for signs in 0..8u8 {
                    let mut m = [[0i8; 3]; 3];
                    for (row, &col) in p.iter().enumerate() {
                        m[row][col] = if signs & (1 << row) != 0 { -1 } else { 1 };
                    }
                    let r = CubeRotation(m);
                    if r.matrix().determinant() > 0.0 {
                        out.push(r);
                    }
                }
            }
            out.sort_by_key(|r| if *r == CubeRotation::IDENTITY { 0 } else { 1 });
            out
        })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[i][j] as f64)
    }

    pub fn quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.matrix()))
    }

    /// Snap a quaternion `(w, x, y, z)` to a cube rotation, rejecting anything else.
    pub fn from_wxyz(q: [f64; 4]) -> Result<Self> {
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-9 {
            return Err(Error::Configuration("orientation quaternion has zero norm".into()));
        }
        let uq = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
        let m = uq.to_rotation_matrix().into_inner();
        let mut out = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let v = m[(i, j)];
                let r = v.round();
                if (v - r).abs() > 1e-6 {
                    return Err(Error::Configuration(
                        "module orientation must be one of the 24 cube rotations".into(),
                    ));
                }
                out[i][j] = r as i8;
            }
        }
        let rot = CubeRotation(out);
        if CubeRotation::all().contains(&rot) {
            Ok(rot)
        } else {
            Err(Error::Configuration("module orientation is not a proper cube rotation".into()))
        }
    }

    pub fn to_wxyz(&self) -> [f64; 4] {
        let q = self.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn compose(&self, other: &CubeRotation) -> CubeRotation {
        let mut out = [[0i8; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        CubeRotation(out)
    }

    pub fn apply_cell(&self, c: [i32; 3]) -> [i32; 3] {
        let mut out = [0i32; 3];
        for (i, v) in out.iter_mut().enumerate() {
            *v = (0..3).map(|k| self.0[i][k] as i32 * c[k]).sum();
        }
        out
    }
}

/// Physical description of one cube module.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleSpec {
    pub edge_length: f64,
    pub mass: f64,
    /// Inertia about the module's own centre of mass, module frame.
    pub inertia: Matrix3<f64>,
    pub thrusters: Vec<ThrusterSpec>,
    pub body_points: usize,
}

impl ModuleSpec {
    /// The stock module: 0.21 m cube, neutrally buoyant, homogeneous inertia, 8 thrusters.
    pub fn modcube() -> Self {
        Self::cube(DEFAULT_EDGE, WATER_DENSITY * DEFAULT_EDGE.powi(3))
    }

    /// Homogeneous cube of the given edge and mass with the default thruster layout.
    pub fn cube(edge_length: f64, mass: f64) -> Self {
        let i = mass * edge_length * edge_length / 6.0;
        Self {
            edge_length,
            mass,
            inertia: Matrix3::from_diagonal_element(i),
            thrusters: default_thruster_layout(edge_length),
            body_points: DEFAULT_BODY_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.edge_length > 0.0) || !self.edge_length.is_finite() {
            return Err(Error::Configuration("module edge length must be positive".into()));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::Configuration("module mass must be positive".into()));
        }
        if !crate::math::is_symmetric(&self.inertia, 1e-12 * self.inertia.amax().max(1.0)) {
            return Err(Error::Configuration("module inertia must be symmetric".into()));
        }
        if self.inertia.cholesky().is_none() {
            return Err(Error::Configuration("module inertia must be positive definite".into()));
        }
        for t in &self.thrusters {
            t.validate()?;
        }
        Ok(())
    }
}

/// The stock thruster arrangement for a cube of edge `l`.
///
/// Four horizontal thrusters sit on the vertical-edge midpoints, vectored at
/// 45° in the x-y plane. Four vertical thrusters sit on the side-face centres
/// of the mid-plane, tilted 45° from vertical. The tilt handedness alternates
/// so an equal load on the vertical group gives pure heave.
pub fn default_thruster_layout(l: f64) -> Vec<ThrusterSpec> {
    let h = 0.5 * l;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let raw = [
        ([h, h, 0.0], [s, -s, 0.0]),
        ([h, -h, 0.0], [s, s, 0.0]),
        ([-h, h, 0.0], [s, s, 0.0]),
        ([-h, -h, 0.0], [s, -s, 0.0]),
        ([h, 0.0, 0.0], [0.0, s, s]),
        ([-h, 0.0, 0.0], [0.0, -s, s]),
        ([0.0, h, 0.0], [s, 0.0, s]),
        ([0.0, -h, 0.0], [-s, 0.0, s]),
    ];
    raw.iter()
        .map(|(p, d)| ThrusterSpec::with_default_models(Vector3::from(*p), Vector3::from(*d)))
        .collect()
}

/// A module placed in the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedModule {
    pub spec: ModuleSpec,
    pub cell: [i32; 3],
    pub orientation: CubeRotation,
}

/// A connected, non-overlapping lattice of cube modules.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    modules: Vec<PlacedModule>,
    edge_length: f64,
}

impl Assembly {
    pub fn new(modules: Vec<PlacedModule>) -> Result<Self> {
        let first = modules
            .first()
            .ok_or_else(|| Error::Structural("assembly needs at least one module".into()))?;
        let edge_length = first.spec.edge_length;
        for m in &modules {
            m.spec.validate()?;
            if (m.spec.edge_length - edge_length).abs() > 1e-12 * edge_length {
                return Err(Error::Structural(
                    "all modules in a lattice must share one edge length".into(),
                ));
            }
        }
        let mut occupied = HashMap::new();
        for (i, m) in modules.iter().enumerate() {
            if let Some(j) = occupied.insert(m.cell, i) {
                return Err(Error::Structural(format!(
                    "modules {j} and {i} overlap at cell {:?}",
                    m.cell
                )));
            }
        }
        if !cells_connected(&modules.iter().map(|m| m.cell).collect::<Vec<_>>()) {
            return Err(Error::Structural(
                "assembly is disconnected (cells must share faces)".into(),
            ));
        }
        Ok(Self { modules, edge_length })
    }

    /// A single stock module at the origin cell.
    pub fn single(spec: ModuleSpec) -> Self {
        Self::new(vec![PlacedModule { spec, cell: [0, 0, 0], orientation: CubeRotation::IDENTITY }])
            .expect("single module assembly is valid")
    }

    /// Stock modules at the given cells, identity orientation.
    pub fn from_cells(spec: &ModuleSpec, cells: &[[i32; 3]]) -> Result<Self> {
        Self::new(
            cells
                .iter()
                .map(|&cell| PlacedModule {
                    spec: spec.clone(),
                    cell,
                    orientation: CubeRotation::IDENTITY,
                })
                .collect(),
        )
    }

    pub fn modules(&self) -> &[PlacedModule] {
        &self.modules
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    /// Centre of module `i` in the assembly frame: `cell * L + L/2`.
    pub fn module_center(&self, i: usize) -> Vector3<f64> {
        let c = self.modules[i].cell;
        let l = self.edge_length;
        Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64) * l + Vector3::repeat(0.5 * l)
    }

    pub fn thruster_count(&self) -> usize {
        self.modules.iter().map(|m| m.spec.thrusters.len()).sum()
    }

    /// Thrusters re-expressed in the assembly frame as (position, direction, spec).
    pub fn thrusters(&self) -> Vec<(Vector3<f64>, Vector3<f64>, &ThrusterSpec)> {
        let mut out = Vec::with_capacity(self.thruster_count());
        for (i, m) in self.modules.iter().enumerate() {
            let r = m.orientation.matrix();
            let c = self.module_center(i);
            for t in &m.spec.thrusters {
                out.push((c + r * t.position, r * t.direction, t));
            }
        }
        out
    }

    /// Shift every cell by `offset`.
    pub fn translated(&self, offset: [i32; 3]) -> Self {
        let modules = self
            .modules
            .iter()
            .map(|m| PlacedModule {
                cell: [m.cell[0] + offset[0], m.cell[1] + offset[1], m.cell[2] + offset[2]],
                ..m.clone()
            })
            .collect();
        Self { modules, edge_length: self.edge_length }
    }

    /// Rigidly rotate the whole lattice about the frame origin.
    ///
    /// Cells are re-indexed so module centres map exactly to `R * p`.
    pub fn rotated(&self, rot: CubeRotation) -> Self {
        let ones = rot.apply_cell([1, 1, 1]);
        let modules = self
            .modules
            .iter()
            .map(|m| {
                let rc = rot.apply_cell(m.cell);
                let cell = [0, 1, 2].map(|k| rc[k] + (ones[k] - 1) / 2);
                PlacedModule {
                    spec: m.spec.clone(),
                    cell,
                    orientation: rot.compose(&m.orientation),
                }
            })
            .collect();
        Self { modules, edge_length: self.edge_length }
    }

    /// Union of two assemblies, validated as a new lattice.
    pub fn merged(&self, other: &Assembly, other_offset: [i32; 3]) -> Result<Self> {
        let mut modules = self.modules.clone();
        modules.extend(other.translated(other_offset).modules);
        Self::new(modules)
    }
}

fn cells_connected(cells: &[[i32; 3]]) -> bool {
    let set: HashSet<[i32; 3]> = cells.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(cells[0]);
    seen.insert(cells[0]);
    while let Some(c) = queue.pop_front() {
        for axis in 0..3 {
            for step in [-1, 1] {
                let mut n = c;
                n[axis] += step;
                if set.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen.len() == set.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn there_are_24_cube_rotations() {
        let all = CubeRotation::all();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], CubeRotation::IDENTITY);
        let unique: HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), 24);
    }

    #[test]
    fn quaternion_round_trip_for_every_rotation() {
        for r in CubeRotation::all() {
            assert_eq!(CubeRotation::from_wxyz(r.to_wxyz()).unwrap(), *r);
        }
    }

    #[test]
    fn non_cube_orientation_rejected() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3);
        assert!(CubeRotation::from_wxyz([q.w, q.i, q.j, q.k]).is_err());
    }

    #[test]
    fn overlap_and_disconnection_are_structural_errors() {
        let m = ModuleSpec::modcube();
        let overlap = Assembly::from_cells(&m, &[[0, 0, 0], [0, 0, 0]]);
        assert!(matches!(overlap, Err(Error::Structural(_))));
        let gap = Assembly::from_cells(&m, &[[0, 0, 0], [2, 0, 0]]);
        assert!(matches!(gap, Err(Error::Structural(_))));
        // edge-sharing only is not a docking connection
        let diag = Assembly::from_cells(&m, &[[0, 0, 0], [1, 1, 0]]);
        assert!(matches!(diag, Err(Error::Structural(_))));
        assert!(matches!(Assembly::new(vec![]), Err(Error::Structural(_))));
    }

    #[test]
    fn rotated_lattice_maps_centres_exactly() {
        let m = ModuleSpec::modcube();
        let a = Assembly::from_cells(&m, &[[0, 0, 0], [1, 0, 0], [1, 1, 0]]).unwrap();
        for rot in CubeRotation::all() {
            let b = a.rotated(*rot);
            for i in 0..a.len() {
                let expect = rot.matrix() * a.module_center(i);
                assert!((b.module_center(i) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn default_module_is_neutrally_buoyant() {
        let m = ModuleSpec::modcube();
        assert!((m.mass - 1000.0 * 0.21f64.powi(3)).abs() < 1e-12);
        assert_eq!(m.thrusters.len(), 8);
        m.validate().unwrap();
    }
}

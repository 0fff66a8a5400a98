use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::assembly::Assembly;
use crate::error::{Error, Result};
use crate::math::{angular, linear, skew};

/// Rigid-body properties of an assembly about its centre of mass.
#[derive(Clone, Debug, PartialEq)]
pub struct MassProperties {
    pub total_mass: f64,
    /// Centre of mass in the assembly (lattice) frame.
    pub com: Vector3<f64>,
    /// Inertia tensor about `com`, assembly axes.
    pub inertia: Matrix3<f64>,
    /// `p_i - com` for each module centre.
    pub module_offsets: Vec<Vector3<f64>>,
}

/// Total mass, centre of mass and parallel-axis inertia of an assembly.
///
/// Each module's own inertia is rotated into the assembly frame by its
/// orientation before the parallel-axis shift. Structural validity
/// (connectivity, no overlaps) is enforced when the [`Assembly`] is built.
pub fn compose_mass_properties(assembly: &Assembly) -> MassProperties {
    let total_mass: f64 = assembly.modules().iter().map(|m| m.spec.mass).sum();
    let weighted = assembly
        .modules()
        .iter()
        .enumerate()
        .fold(Vector3::zeros(), |acc, (i, m)| acc + assembly.module_center(i) * m.spec.mass);
    let com = weighted / total_mass;

    let mut inertia = Matrix3::zeros();
    let mut module_offsets = Vec::with_capacity(assembly.len());
    for (i, m) in assembly.modules().iter().enumerate() {
        let r = assembly.module_center(i) - com;
        let rot = m.orientation.matrix();
        inertia += rot * m.spec.inertia * rot.transpose() + parallel_axis(m.spec.mass, &r);
        module_offsets.push(r);
    }
    // Symmetrise away rounding.
    let inertia = 0.5 * (inertia + inertia.transpose());
    MassProperties { total_mass, com, inertia, module_offsets }
}

/// `m (|r|² I − r rᵀ)`: inertia of a point mass `m` at offset `r`.
pub fn parallel_axis(mass: f64, r: &Vector3<f64>) -> Matrix3<f64> {
    mass * (Matrix3::identity() * r.norm_squared() - r * r.transpose())
}

/// 6×6 mass matrix with dynamics expressed at the centre of mass.
pub fn mass_matrix(props: &MassProperties, added_mass: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    mass_matrix_about(props, added_mass, &Vector3::zeros())
}

/// Mass matrix about a reference point displaced from the CoM.
///
/// `com_offset` is the CoM position seen from the reference point. The
/// off-diagonal blocks are `∓ M r^×` and the rotational block carries the
/// inertia shifted to the reference point, which keeps the result symmetric.
pub fn mass_matrix_about(
    props: &MassProperties,
    added_mass: &Matrix6<f64>,
    com_offset: &Vector3<f64>,
) -> Result<Matrix6<f64>> {
    let rigid = rigid_body_mass_matrix(props, com_offset);
    let total = rigid + added_mass;
    if (total - total.transpose()).amax() > 1e-9 * total.amax().max(1.0) {
        return Err(Error::Configuration("mass matrix is not symmetric".into()));
    }
    if total.cholesky().is_none() {
        return Err(Error::Configuration("mass matrix is not positive definite".into()));
    }
    Ok(total)
}

fn rigid_body_mass_matrix(props: &MassProperties, com_offset: &Vector3<f64>) -> Matrix6<f64> {
    let m = props.total_mass;
    let s = skew(com_offset);
    let inertia_ref = props.inertia + parallel_axis(m, com_offset);
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * m));
    out.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-m * s));
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&(m * s));
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&inertia_ref);
    out
}

/// Coriolis/centripetal matrix for the CoM-referenced rigid body plus added mass.
pub fn coriolis_matrix(
    props: &MassProperties,
    added_mass: &Matrix6<f64>,
    twist: &Vector6<f64>,
) -> Matrix6<f64> {
    coriolis_from_mass_matrix(&(rigid_body_mass_matrix(props, &Vector3::zeros()) + added_mass), twist)
}

/// Skew-symmetric Coriolis matrix induced by a symmetric 6×6 mass matrix.
///
/// With `M = [M11 M12; M21 M22]`, `a1 = M11 v + M12 ω` and `a2 = M21 v + M22 ω`:
/// `C = [0, −a1^×; −a1^×, −a2^×]`. `C = −Cᵀ`, so `νᵀ C ν = 0`.
pub fn coriolis_from_mass_matrix(mass: &Matrix6<f64>, twist: &Vector6<f64>) -> Matrix6<f64> {
    let v = linear(twist);
    let w = angular(twist);
    let m11 = mass.fixed_view::<3, 3>(0, 0);
    let m12 = mass.fixed_view::<3, 3>(0, 3);
    let m21 = mass.fixed_view::<3, 3>(3, 0);
    let m22 = mass.fixed_view::<3, 3>(3, 3);
    let a1 = m11 * v + m12 * w;
    let a2 = m21 * v + m22 * w;
    let s1 = skew(&a1);
    let s2 = skew(&a2);
    let mut c = Matrix6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-s1));
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-s1));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-s2));
    c
}

//! `assembly.json`: the on-disk description of a lattice assembly.
//!
//! SI units throughout, right-handed frames, quaternions as `[w, x, y, z]`,
//! matrices as row-major nested arrays.
//!
//! ```json
//! {
//!   "name": "double",
//!   "module_types": { "heavy": { "edge_length": 0.21, "mass": 12.0, ... } },
//!   "modules": [
//!     { "type": "modcube", "cell": [0, 0, 0], "orientation": [1, 0, 0, 0] },
//!     { "type": "heavy",   "cell": [1, 0, 0] }
//!   ]
//! }
//! ```
//!
//! The type name `modcube` resolves to the stock module unless the document
//! defines it in `module_types`.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Assembly, CubeRotation, ModuleSpec, PlacedModule, Polynomial, ThrusterSpec};
use crate::error::{Error, Result};

pub const BUILTIN_MODULE: &str = "modcube";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThrusterDoc {
    pub position: [f64; 3],
    pub direction: [f64; 3],
    pub f_min: f64,
    pub f_max: f64,
    pub cmd_poly: Vec<f64>,
    pub power_poly: Vec<f64>,
    #[serde(default = "default_cmd_range")]
    pub cmd_range: [f64; 2],
}

fn default_cmd_range() -> [f64; 2] {
    [-1.0, 1.0]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub edge_length: f64,
    pub mass: f64,
    pub inertia: [[f64; 3]; 3],
    pub thrusters: Vec<ThrusterDoc>,
    #[serde(default = "default_body_points")]
    pub body_points: usize,
}

fn default_body_points() -> usize {
    super::DEFAULT_BODY_POINTS
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlacementDoc {
    #[serde(rename = "type")]
    pub module_type: String,
    pub cell: [i32; 3],
    #[serde(default = "identity_wxyz")]
    pub orientation: [f64; 4],
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AssemblyDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub module_types: BTreeMap<String, ModuleDoc>,
    pub modules: Vec<PlacementDoc>,
}

impl From<&ThrusterSpec> for ThrusterDoc {
    fn from(t: &ThrusterSpec) -> Self {
        Self {
            position: t.position.into(),
            direction: t.direction.into(),
            f_min: t.f_min,
            f_max: t.f_max,
            cmd_poly: t.cmd_poly.coeffs().to_vec(),
            power_poly: t.power_poly.coeffs().to_vec(),
            cmd_range: t.cmd_range,
        }
    }
}

impl TryFrom<&ThrusterDoc> for ThrusterSpec {
    type Error = Error;
    fn try_from(d: &ThrusterDoc) -> Result<Self> {
        let t = ThrusterSpec {
            position: Vector3::from(d.position),
            direction: Vector3::from(d.direction),
            f_min: d.f_min,
            f_max: d.f_max,
            cmd_poly: Polynomial::new(d.cmd_poly.clone())?,
            power_poly: Polynomial::new(d.power_poly.clone())?,
            cmd_range: d.cmd_range,
        };
        t.validate()?;
        Ok(t)
    }
}

impl From<&ModuleSpec> for ModuleDoc {
    fn from(m: &ModuleSpec) -> Self {
        let mut inertia = [[0.0; 3]; 3];
        for (i, row) in inertia.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m.inertia[(i, j)];
            }
        }
        Self {
            edge_length: m.edge_length,
            mass: m.mass,
            inertia,
            thrusters: m.thrusters.iter().map(ThrusterDoc::from).collect(),
            body_points: m.body_points,
        }
    }
}

impl TryFrom<&ModuleDoc> for ModuleSpec {
    type Error = Error;
    fn try_from(d: &ModuleDoc) -> Result<Self> {
        let spec = ModuleSpec {
            edge_length: d.edge_length,
            mass: d.mass,
            inertia: Matrix3::from_fn(|i, j| d.inertia[i][j]),
            thrusters: d.thrusters.iter().map(ThrusterSpec::try_from).collect::<Result<_>>()?,
            body_points: d.body_points,
        };
        if spec.body_points == 0 {
            return Err(Error::Configuration("body_points must be at least 1".into()));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl AssemblyDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Resolve module types and validate the lattice.
    pub fn to_assembly(&self) -> Result<Assembly> {
        let mut types = BTreeMap::new();
        for (name, doc) in &self.module_types {
            types.insert(name.as_str(), ModuleSpec::try_from(doc)?);
        }
        let builtin = ModuleSpec::modcube();
        let modules = self
            .modules
            .iter()
            .map(|p| {
                let spec = match types.get(p.module_type.as_str()) {
                    Some(s) => s.clone(),
                    None if p.module_type == BUILTIN_MODULE => builtin.clone(),
                    None => {
                        return Err(Error::Configuration(format!(
                            "unknown module type `{}`",
                            p.module_type
                        )))
                    }
                };
                Ok(PlacedModule {
                    spec,
                    cell: p.cell,
                    orientation: CubeRotation::from_wxyz(p.orientation)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Assembly::new(modules)
    }

    /// Describe an assembly; identical module specs share one type entry.
    pub fn from_assembly(name: &str, assembly: &Assembly) -> Self {
        let mut module_types: BTreeMap<String, ModuleDoc> = BTreeMap::new();
        let mut specs: Vec<(String, &ModuleSpec)> = Vec::new();
        let builtin = ModuleSpec::modcube();
        let mut modules = Vec::with_capacity(assembly.len());
        for m in assembly.modules() {
            let type_name = match specs.iter().find(|(_, s)| **s == m.spec) {
                Some((n, _)) => n.clone(),
                None => {
                    let n = if m.spec == builtin && !module_types.contains_key(BUILTIN_MODULE) {
                        BUILTIN_MODULE.to_string()
                    } else {
                        format!("module{}", specs.len())
                    };
                    module_types.insert(n.clone(), ModuleDoc::from(&m.spec));
                    specs.push((n.clone(), &m.spec));
                    n
                }
            };
            modules.push(PlacementDoc {
                module_type: type_name,
                cell: m.cell,
                orientation: m.orientation.to_wxyz(),
            });
        }
        Self { name: name.to_string(), module_types, modules }
    }
}

/// Parse and validate an `assembly.json` document.
pub fn parse_assembly(text: &str) -> Result<Assembly> {
    AssemblyDoc::from_json(text)?.to_assembly()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_type_resolves_without_definition() {
        let doc = r#"{"modules":[{"type":"modcube","cell":[0,0,0]},{"type":"modcube","cell":[1,0,0],"orientation":[0,0,0,1]}]}"#;
        let a = parse_assembly(doc).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.thruster_count(), 16);
    }

    #[test]
    fn document_round_trip_preserves_assembly() {
        let spec = ModuleSpec::modcube();
        let mut heavy = ModuleSpec::cube(0.21, 12.0);
        heavy.thrusters.truncate(6);
        let a = Assembly::new(vec![
            PlacedModule { spec: spec.clone(), cell: [0, 0, 0], orientation: CubeRotation::IDENTITY },
            PlacedModule { spec: heavy, cell: [0, 1, 0], orientation: CubeRotation::all()[5] },
        ])
        .unwrap();
        let json = AssemblyDoc::from_assembly("mixed", &a).to_json().unwrap();
        let back = parse_assembly(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn unknown_type_and_fields_rejected() {
        assert!(parse_assembly(r#"{"modules":[{"type":"nope","cell":[0,0,0]}]}"#).is_err());
        assert!(parse_assembly(r#"{"modules":[],"extra":1}"#).is_err());
        assert!(matches!(parse_assembly(r#"{"modules":[]}"#), Err(Error::Structural(_))));
    }
}

//! Configurations shipped with the library.

use crate::error::{Error, Result};
use crate::vehicle::schema::AssemblyDoc;
use crate::vehicle::Assembly;

/// Bundled assemblies in benchmark order.
pub const ASSEMBLIES: [(&str, &str); 7] = [
    ("single", include_str!("../../configs/assemblies/single.json")),
    ("double", include_str!("../../configs/assemblies/double.json")),
    ("triple", include_str!("../../configs/assemblies/triple.json")),
    ("chasing_m2", include_str!("../../configs/assemblies/chasing_m2.json")),
    ("girona500", include_str!("../../configs/assemblies/girona500.json")),
    ("bluerov2", include_str!("../../configs/assemblies/bluerov2.json")),
    ("bluerov2_heavy", include_str!("../../configs/assemblies/bluerov2_heavy.json")),
];

pub const SCENARIOS: [(&str, &str); 4] = [
    ("spiral", include_str!("../../configs/scenarios/spiral.json")),
    ("mobius", include_str!("../../configs/scenarios/mobius.json")),
    ("self_assembly", include_str!("../../configs/scenarios/self_assembly.json")),
    ("teleop", include_str!("../../configs/scenarios/teleop.json")),
];

pub fn assembly_names() -> impl Iterator<Item = &'static str> {
    ASSEMBLIES.iter().map(|(n, _)| *n)
}

pub fn assembly_json(name: &str) -> Result<&'static str> {
    ASSEMBLIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Configuration(format!("no bundled assembly named `{name}`")))
}

pub fn assembly_doc(name: &str) -> Result<AssemblyDoc> {
    AssemblyDoc::from_json(assembly_json(name)?)
}

pub fn assembly(name: &str) -> Result<Assembly> {
    assembly_doc(name)?.to_assembly()
}

pub fn scenario_json(name: &str) -> Result<&'static str> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Configuration(format!("no bundled scenario named `{name}`")))
}

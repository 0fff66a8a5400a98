//! JSON exchange format for sampled capability spaces.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::capability::{PowerSpace, WrenchMode, WrenchSpace};
use crate::error::{Error, Result};
use crate::hydro::DirectionSet;
use crate::morphology::RadialSurface;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Wrench,
    Power,
}

/// A radial function sampled on unit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub kind: SpaceKind,
    pub mode: WrenchMode,
    pub directions: Vec<[f64; 3]>,
    /// Extent (N or N m) or power (W); zero where unattainable.
    pub radii: Vec<f64>,
}

impl SpaceDoc {
    pub fn from_wrench_space(space: &WrenchSpace) -> Self {
        Self {
            kind: SpaceKind::Wrench,
            mode: space.mode,
            directions: space.directions.iter().map(|d| [d.x, d.y, d.z]).collect(),
            radii: space.extents.clone(),
        }
    }

    pub fn from_power_space(space: &PowerSpace) -> Self {
        Self {
            kind: SpaceKind::Power,
            mode: space.mode,
            directions: space.directions.iter().map(|d| [d.x, d.y, d.z]).collect(),
            radii: space.attainable_radii(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and validate: matching lengths, unit directions, finite non-negative radii.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpaceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("space: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.directions.len() != self.radii.len() {
            return Err(Error::Argument(format!(
                "{} directions but {} radii",
                self.directions.len(),
                self.radii.len()
            )));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Argument("radii must be finite and non-negative".into()));
        }
        for d in &self.directions {
            let n = Vector3::from(*d).norm();
            if !((n - 1.0).abs() <= 1e-6) {
                return Err(Error::Argument(format!("direction {d:?} is not a unit vector")));
            }
        }
        Ok(())
    }

    pub fn direction_set(&self) -> Result<DirectionSet> {
        DirectionSet::from_vectors(self.directions.iter().map(|d| Vector3::from(*d)).collect())
    }

    pub fn surface(&self) -> Result<RadialSurface> {
        RadialSurface::new(self.direction_set()?, self.radii.clone())
    }
}

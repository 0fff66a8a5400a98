use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Matrix6, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::configs;
use crate::control::{GainSet, Reference};
use crate::dynamics::{AmbientFlow, BodyState};
use crate::error::{Error, Result};
use crate::hydro::{build_drag_lut, DragLut, DragLutConfig, DEFAULT_CD, DEFAULT_RHO};
use crate::planner::{allocate_times, mobius_waypoints, plan_min_snap, spiral_waypoints, Trajectory, YawProfile, MIN_SEGMENT_TIME};
use crate::vehicle::schema::AssemblyDoc;
use crate::vehicle::Assembly;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_SPEED: f64 = 0.1;
/// Simulated time after the last reference motion.
pub const DEFAULT_SETTLE_TIME: f64 = 5.0;
pub const DEFAULT_DOCK_TOLERANCE: f64 = 0.005;
pub const DEFAULT_DOCK_WINDOW: f64 = 1.0;

/// Controller gains shipped as the default for every scenario.
pub fn default_gains() -> GainSet {
    GainSet {
        kp: Vector6::new(20.0, 20.0, 20.0, 2.0, 2.0, 2.0),
        kd: Vector6::new(25.0, 25.0, 25.0, 1.0, 1.0, 1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Defaults to the end of the last reference plus a settling period.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub plant: PlantDoc,
    #[serde(default)]
    pub gains: Option<GainsDoc>,
    pub bodies: Vec<BodyDoc>,
    #[serde(default)]
    pub docking: Option<DockingDoc>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDoc {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_cd")]
    pub c_d: f64,
    #[serde(default = "default_lut_n_s")]
    pub n_s: usize,
    /// Interior samples per module for frontal-area estimation.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub drag: bool,
    /// 6×6 added mass about the centre of mass, rows first.
    #[serde(default)]
    pub added_mass: Option<[[f64; 6]; 6]>,
    #[serde(default)]
    pub ambient_flow: [f64; 3],
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}
fn default_cd() -> f64 {
    DEFAULT_CD
}
fn default_lut_n_s() -> usize {
    100
}
fn default_samples() -> usize {
    5000
}
fn default_true() -> bool {
    true
}

impl Default for PlantDoc {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            c_d: DEFAULT_CD,
            n_s: default_lut_n_s(),
            samples: default_samples(),
            drag: true,
            added_mass: None,
            ambient_flow: [0.0; 3],
        }
    }
}

impl PlantDoc {
    pub fn added_mass_matrix(&self) -> Matrix6<f64> {
        match &self.added_mass {
            Some(rows) => Matrix6::from_fn(|i, j| rows[i][j]),
            None => Matrix6::zeros(),
        }
    }

    pub fn flow(&self) -> AmbientFlow {
        let v = Vector3::from(self.ambient_flow);
        if v == Vector3::zeros() {
            AmbientFlow::Still
        } else {
            AmbientFlow::Uniform(v)
        }
    }

    pub fn lut_config(&self, seed: u64) -> DragLutConfig {
        DragLutConfig { n_s: self.n_s, rho: self.rho, c_d: self.c_d, samples: self.samples, alpha: None, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsDoc {
    pub kp: [f64; 6],
    pub kd: [f64; 6],
}

impl GainsDoc {
    pub fn to_gains(&self) -> Result<GainSet> {
        GainSet::new(Vector6::from(self.kp), Vector6::from(self.kd))
    }
}

/// Where a body's assembly comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssemblyRef {
    /// A bundled configuration name, or a path ending in `.json`.
    Named(String),
    Inline(AssemblyDoc),
}

impl AssemblyRef {
    pub fn resolve(&self, base: Option<&Path>) -> Result<AssemblyDoc> {
        match self {
            AssemblyRef::Inline(doc) => Ok(doc.clone()),
            AssemblyRef::Named(name) if name.ends_with(".json") => {
                let path = match base {
                    Some(b) => b.join(name),
                    None => PathBuf::from(name),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Configuration(format!("cannot read assembly `{}`: {e}", path.display())))?;
                AssemblyDoc::from_json(&text)
            }
            AssemblyRef::Named(name) => configs::assembly_doc(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDoc {
    #[serde(default)]
    pub position: [f64; 3],
    /// Quaternion `[w, x, y, z]`, world from body.
    #[serde(default = "identity_wxyz")]
    pub orientation: [f64; 4],
    #[serde(default)]
    pub twist: [f64; 6],
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

/// Uniform random offsets applied to the initial pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationDoc {
    /// Half-width of each position offset, metres.
    #[serde(default)]
    pub position: f64,
    /// Half-width of each roll, pitch and yaw offset, radians.
    #[serde(default)]
    pub attitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub assembly: AssemblyRef,
    /// Defaults to the task's starting pose at rest.
    #[serde(default)]
    pub initial: Option<InitialDoc>,
    #[serde(default)]
    pub perturbation: Option<PerturbationDoc>,
    pub task: TaskDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskDoc {
    Track {
        path: PathDoc,
        #[serde(default)]
        yaw: YawProfile,
        /// Nominal speed for time allocation when the path has no times.
        #[serde(default)]
        speed: Option<f64>,
        /// Reference start time.
        #[serde(default)]
        start: f64,
    },
    Teleop {
        script: Vec<WrenchCommand>,
    },
    Hold {
        position: [f64; 3],
        #[serde(default)]
        yaw: f64,
    },
}

/// Body-frame wrench applied from `t` until the next command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrenchCommand {
    pub t: f64,
    pub wrench: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathDoc {
    Spiral {
        radius: f64,
        pitch: f64,
        turns: f64,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        center: [f64; 3],
    },
    Mobius {
        radius: f64,
        half_width: f64,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        center: [f64; 3],
    },
    Line {
        from: [f64; 3],
        to: [f64; 3],
    },
    Waypoints {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        times: Option<Vec<f64>>,
    },
}

fn default_count() -> usize {
    25
}

impl PathDoc {
    pub fn points(&self) -> Result<Vec<Vector3<f64>>> {
        let shift = |pts: Vec<Vector3<f64>>, c: &[f64; 3]| pts.into_iter().map(|p| p + Vector3::from(*c)).collect();
        Ok(match self {
            PathDoc::Spiral { radius, pitch, turns, count, center } => {
                shift(spiral_waypoints(*radius, *pitch, *turns, *count)?, center)
            }
            PathDoc::Mobius { radius, half_width, count, center } => {
                shift(mobius_waypoints(*radius, *half_width, *count)?, center)
            }
            PathDoc::Line { from, to } => vec![Vector3::from(*from), Vector3::from(*to)],
            PathDoc::Waypoints { points, .. } => points.iter().map(|p| Vector3::from(*p)).collect(),
        })
    }

    fn times(&self) -> Option<&Vec<f64>> {
        match self {
            PathDoc::Waypoints { times, .. } => times.as_ref(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DockingDoc {
    /// Indices of the two bodies to monitor.
    #[serde(default = "default_pair")]
    pub bodies: [usize; 2],
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_window")]
    pub window: f64,
    /// Replace the pair by one merged assembly once docked.
    #[serde(default = "default_true")]
    pub merge: bool,
}

fn default_pair() -> [usize; 2] {
    [0, 1]
}
fn default_tolerance() -> f64 {
    DEFAULT_DOCK_TOLERANCE
}
fn default_window() -> f64 {
    DEFAULT_DOCK_WINDOW
}

impl ScenarioDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// What a body does during the run.
#[derive(Clone, Debug)]
pub enum Task {
    Track(Trajectory),
    Teleop(Vec<WrenchCommand>),
    Hold(Reference),
}

impl Task {
    /// Pose reference at `t`; `None` for open-loop wrench scripts.
    pub fn reference(&self, t: f64) -> Option<Reference> {
        match self {
            Task::Track(traj) => Some(traj.sample(t).to_reference()),
            Task::Hold(r) => Some(*r),
            Task::Teleop(_) => None,
        }
    }

    /// Scripted wrench at `t`: the last command issued at or before `t`.
    pub fn scripted_wrench(&self, t: f64) -> Option<Vector6<f64>> {
        match self {
            Task::Teleop(script) => Some(
                script
                    .iter()
                    .take_while(|c| c.t <= t + 1e-12)
                    .last()
                    .map(|c| Vector6::from(c.wrench))
                    .unwrap_or_else(Vector6::zeros),
            ),
            _ => None,
        }
    }

    /// Time after which the task no longer changes.
    pub fn end_time(&self) -> f64 {
        match self {
            Task::Track(traj) => traj.plan.end_time(),
            Task::Teleop(script) => script.last().map_or(0.0, |c| c.t),
            Task::Hold(_) => 0.0,
        }
    }

    fn min_segment(&self) -> Option<f64> {
        match self {
            Task::Track(traj) => traj.plan.segments.iter().map(|s| s.duration).reduce(f64::min),
            _ => None,
        }
    }
}

/// A scenario body with everything resolved.
#[derive(Clone, Debug)]
pub struct BodySetup {
    pub name: String,
    pub assembly: Assembly,
    pub drag: Option<Arc<DragLut>>,
    pub initial: BodyState,
    pub task: Task,
}

/// A validated scenario ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub gains: GainSet,
    pub t_end: f64,
    pub bodies: Vec<BodySetup>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn resolve_task(doc: &TaskDoc) -> Result<Task> {
    match doc {
        TaskDoc::Track { path, yaw, speed, start } => {
            if !start.is_finite() {
                return Err(Error::Configuration("track start must be finite".into()));
            }
            let points = path.points()?;
            let times = match path.times() {
                Some(t) => t.clone(),
                None => {
                    let speed = speed.unwrap_or(DEFAULT_SPEED);
                    check_positive("speed", speed)?;
                    allocate_times(&points, speed, MIN_SEGMENT_TIME)?
                }
            };
            let times: Vec<f64> = times.iter().map(|t| t + start).collect();
            Ok(Task::Track(Trajectory::new(plan_min_snap(&points, &times)?, yaw.clone())?))
        }
        TaskDoc::Teleop { script } => {
            if script.is_empty() {
                return Err(Error::Configuration("teleop script is empty".into()));
            }
            for pair in script.windows(2) {
                if !(pair[1].t > pair[0].t) {
                    return Err(Error::Configuration("teleop command times must increase".into()));
                }
            }
            if script.iter().any(|c| !c.t.is_finite() || c.wrench.iter().any(|w| !w.is_finite())) {
                return Err(Error::Configuration("teleop script must be finite".into()));
            }
            Ok(Task::Teleop(script.clone()))
        }
        TaskDoc::Hold { position, yaw } => {
            if position.iter().chain([yaw]).any(|v| !v.is_finite()) {
                return Err(Error::Configuration("hold pose must be finite".into()));
            }
            Ok(Task::Hold(Reference::hold(Vector3::from(*position), UnitQuaternion::from_euler_angles(0.0, 0.0, *yaw))))
        }
    }
}

fn initial_state(doc: &BodyDoc, task: &Task, rng: &mut ChaCha8Rng) -> Result<BodyState> {
    let mut state = match &doc.initial {
        Some(init) => {
            let [w, x, y, z] = init.orientation;
            let q = nalgebra::Quaternion::new(w, x, y, z);
            if !(q.norm() > 1e-9) || !q.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::Configuration("initial orientation must be a nonzero quaternion".into()));
            }
            BodyState {
                position: Vector3::from(init.position),
                orientation: UnitQuaternion::from_quaternion(q),
                twist: Vector6::from(init.twist),
            }
        }
        None => match task.reference(0.0) {
            Some(r) => BodyState { position: r.position, orientation: r.orientation, twist: Vector6::zeros() },
            None => BodyState::at_rest(Vector3::zeros()),
        },
    };
    if let Some(p) = &doc.perturbation {
        if !(p.position >= 0.0 && p.attitude >= 0.0 && p.position.is_finite() && p.attitude.is_finite()) {
            return Err(Error::Configuration("perturbation half-widths must be non-negative".into()));
        }
        let mut draw = |h: f64| if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 };
        let dp = Vector3::new(draw(p.position), draw(p.position), draw(p.position));
        let (r, pi, y) = (draw(p.attitude), draw(p.attitude), draw(p.attitude));
        state.position += dp;
        state.orientation *= UnitQuaternion::from_euler_angles(r, pi, y);
    }
    if !state.is_finite() {
        return Err(Error::Configuration("initial state must be finite".into()));
    }
    Ok(state)
}

impl Scenario {
    /// Resolve references, plan reference trajectories and build drag tables.
    ///
    /// Relative assembly paths are taken from `base`.
    pub fn resolve(doc: &ScenarioDoc, base: Option<&Path>) -> Result<Self> {
        check_positive("dt", doc.dt)?;
        if doc.bodies.is_empty() {
            return Err(Error::Configuration("scenario has no bodies".into()));
        }
        let p = &doc.plant;
        check_positive("rho", p.rho)?;
        check_positive("c_d", p.c_d)?;
        if p.ambient_flow.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("ambient flow must be finite".into()));
        }
        let gains = match &doc.gains {
            Some(g) => g.to_gains()?,
            None => default_gains(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(doc.seed);
        let mut luts: BTreeMap<String, Arc<DragLut>> = BTreeMap::new();
        let mut bodies = Vec::with_capacity(doc.bodies.len());
        for (i, b) in doc.bodies.iter().enumerate() {
            let assembly_doc = b.assembly.resolve(base)?;
            let assembly = assembly_doc.to_assembly()?;
            let task = resolve_task(&b.task)?;
            if let Some(min_seg) = task.min_segment() {
                if !(doc.dt < min_seg / 10.0) {
                    return Err(Error::Configuration(format!(
                        "dt = {} must be below a tenth of the shortest segment ({min_seg} s)",
                        doc.dt
                    )));
                }
            }
            let drag = if p.drag {
                let key = serde_json::to_string(&AssemblyDoc { name: String::new(), ..assembly_doc.clone() })?;
                match luts.get(&key) {
                    Some(l) => Some(l.clone()),
                    None => {
                        let lut = Arc::new(build_drag_lut(&assembly, &p.lut_config(doc.seed))?);
                        luts.insert(key, lut.clone());
                        Some(lut)
                    }
                }
            } else {
                None
            };
            let initial = initial_state(b, &task, &mut rng)?;
            bodies.push(BodySetup { name: b.name.clone().unwrap_or_else(|| format!("body{i}")), assembly, drag, initial, task });
        }
        if let Some(d) = &doc.docking {
            if d.bodies[0] == d.bodies[1] || d.bodies.iter().any(|&i| i >= bodies.len()) {
                return Err(Error::Configuration("docking must name two distinct bodies".into()));
            }
            check_positive("docking tolerance", d.tolerance)?;
            check_positive("docking window", d.window)?;
            let l0 = bodies[d.bodies[0]].assembly.edge_length();
            let l1 = bodies[d.bodies[1]].assembly.edge_length();
            if (l0 - l1).abs() > 1e-12 {
                return Err(Error::Configuration("docking bodies must share a module edge length".into()));
            }
        }
        let t_end = match doc.t_end {
            Some(t) => {
                check_positive("t_end", t)?;
                t
            }
            None => bodies.iter().map(|b| b.task.end_time()).fold(0.0, f64::max) + DEFAULT_SETTLE_TIME,
        };
        Ok(Self { doc: doc.clone(), gains, t_end, bodies })
    }

    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        Self::resolve(&ScenarioDoc::from_json(text)?, base)
    }

    /// Load a scenario file; relative assembly paths resolve next to it.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent())
    }
}

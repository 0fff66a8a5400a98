use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DVector, Quaternion, UnitQuaternion, Vector3, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{rmse, DockingMonitor, PoseSample};
use super::scenario::{DockingDoc, Scenario, Task};
use crate::control::{allocate, build_allocation, pd_wrench, thruster_power, AllocationModel, GainSet, Reference};
use crate::dynamics::{rk4_step, step_count, trace_row, BodyState, PlantModel, TraceSample, TRACE_HEADER};
use crate::error::{Error, Result};
use crate::hydro::{build_drag_lut, DragLut};
use crate::math::stack;
use crate::vehicle::{compose_mass_properties, mass_matrix, schema::AssemblyDoc, Assembly, CubeRotation, MassProperties, ThrusterSpec};

/// Per-body outcome figures, all recomputable from the exported series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodySummary {
    pub name: String,
    pub start_time: f64,
    pub end_time: f64,
    pub modules: usize,
    /// Metres; absent for open-loop bodies.
    pub position_rmse: Option<f64>,
    /// Radians; absent for open-loop bodies.
    pub orientation_rmse: Option<f64>,
    /// Joules, electrical.
    pub energy_used: f64,
    pub peak_power: f64,
    /// Steps on which at least one thruster was clipped.
    pub saturation_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DockingEvent {
    pub time: f64,
    pub bodies: [String; 2],
    /// Name of the body created by the merge, if any.
    pub merged: Option<String>,
    /// Lattice offset of the second body inside the merged assembly.
    pub offset: Option<[i32; 3]>,
    /// Residual angle between the bodies' attitudes and the snapped lattice rotation.
    pub attitude_residual: f64,
}

/// Everything recorded for one body over its lifetime in the run.
#[derive(Clone, Debug)]
pub struct BodyRecord {
    pub name: String,
    pub assembly: Assembly,
    pub mass_properties: MassProperties,
    pub plant: PlantModel,
    /// Sample `k` is at `start_time + k dt`; the last one carries zero wrench.
    pub samples: Vec<TraceSample>,
    /// One entry per sample for closed-loop bodies, empty otherwise.
    pub reference: Vec<Reference>,
    pub forces: Vec<DVector<f64>>,
    pub power: Vec<f64>,
    pub saturated: Vec<bool>,
    pub summary: BodySummary,
}

impl BodyRecord {
    pub fn pose_series(&self) -> Vec<PoseSample> {
        self.samples
            .iter()
            .map(|s| PoseSample { t: s.t, position: s.state.position, orientation: s.state.orientation })
            .collect()
    }

    pub fn reference_series(&self) -> Vec<PoseSample> {
        self.samples
            .iter()
            .zip(&self.reference)
            .map(|(s, r)| PoseSample { t: s.t, position: r.position, orientation: r.orientation })
            .collect()
    }

    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.forces.first().map_or(0, |f| f.len());
        let mut header: Vec<String> = TRACE_HEADER.iter().map(|s| s.to_string()).collect();
        header.extend((0..n).map(|i| format!("f{i}")));
        header.push("power".into());
        header.push("saturated".into());
        w.write_record(&header)?;
        for (k, s) in self.samples.iter().enumerate() {
            let mut row: Vec<String> = trace_row(s).iter().map(|v| format!("{v}")).collect();
            row.extend(self.forces[k].iter().map(|v| format!("{v}")));
            row.push(format!("{}", self.power[k]));
            row.push(if self.saturated[k] { "1" } else { "0" }.into());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_reference_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REFERENCE_HEADER)?;
        for (s, r) in self.samples.iter().zip(&self.reference) {
            let q = r.orientation.quaternion();
            let vals = [
                s.t, r.position.x, r.position.y, r.position.z, q.w, q.i, q.j, q.k, r.velocity.x, r.velocity.y,
                r.velocity.z, r.angular_velocity.x, r.angular_velocity.y, r.angular_velocity.z,
            ];
            w.write_record(vals.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const REFERENCE_HEADER: [&str; 14] =
    ["t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"];

/// Read the pose columns (`t, px, py, pz, qw, qx, qy, qz`) of a trace or reference CSV.
pub fn read_pose_csv<R: Read>(reader: R) -> Result<Vec<PoseSample>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let cols: Vec<usize> = ["t", "px", "py", "pz", "qw", "qx", "qy", "qz"]
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::Parse(format!("pose CSV lacks column `{name}`")))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = cols
            .iter()
            .map(|&c| {
                rec.get(c)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad number in pose CSV column {c}")))
            })
            .collect::<Result<_>>()?;
        out.push(PoseSample {
            t: v[0],
            position: Vector3::new(v[1], v[2], v[3]),
            orientation: UnitQuaternion::from_quaternion(Quaternion::new(v[4], v[5], v[6], v[7])),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub name: String,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub bodies: Vec<BodySummary>,
    pub docking: Option<DockingEvent>,
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub summary: SimSummary,
    pub bodies: Vec<BodyRecord>,
}

impl SimResult {
    pub fn body(&self, name: &str) -> Option<&BodyRecord> {
        self.bodies.iter().find(|b| b.name == name)
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }

    /// Write `summary.json` plus `<body>_trace.csv` and `<body>_reference.csv` per body.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.json"), self.summary_json()?)?;
        for b in &self.bodies {
            b.write_trace_csv(std::fs::File::create(dir.join(format!("{}_trace.csv", b.name)))?)?;
            if !b.reference.is_empty() {
                b.write_reference_csv(std::fs::File::create(dir.join(format!("{}_reference.csv", b.name)))?)?;
            }
            let doc = AssemblyDoc::from_assembly(&b.name, &b.assembly);
            std::fs::write(dir.join(format!("{}_assembly.json", b.name)), doc.to_json()?)?;
        }
        Ok(())
    }
}

struct LiveBody {
    record: BodyRecord,
    alloc: AllocationModel,
    specs: Vec<ThrusterSpec>,
    task: Task,
    state: BodyState,
}

struct Context<'a> {
    scenario: &'a Scenario,
    gains: GainSet,
    luts: BTreeMap<String, Arc<DragLut>>,
}

impl Context<'_> {
    fn lut_for(&mut self, assembly: &Assembly) -> Result<Option<Arc<DragLut>>> {
        let plant = &self.scenario.doc.plant;
        if !plant.drag {
            return Ok(None);
        }
        let key = serde_json::to_string(&AssemblyDoc::from_assembly("", assembly))?;
        if let Some(l) = self.luts.get(&key) {
            return Ok(Some(l.clone()));
        }
        let lut = Arc::new(build_drag_lut(assembly, &plant.lut_config(self.scenario.doc.seed))?);
        self.luts.insert(key, lut.clone());
        Ok(Some(lut))
    }

    fn body(
        &self,
        name: String,
        assembly: Assembly,
        drag: Option<Arc<DragLut>>,
        state: BodyState,
        task: Task,
        start_time: f64,
    ) -> Result<LiveBody> {
        let props = compose_mass_properties(&assembly);
        let m = mass_matrix(&props, &self.scenario.doc.plant.added_mass_matrix())?;
        let mut plant = PlantModel::new(m, drag)?;
        plant.ambient_flow = self.scenario.doc.plant.flow();
        let alloc = build_allocation(&assembly, &props)?;
        let specs = assembly.thrusters().into_iter().map(|(_, _, s)| s.clone()).collect();
        let summary = BodySummary {
            name: name.clone(),
            start_time,
            end_time: start_time,
            modules: assembly.len(),
            position_rmse: None,
            orientation_rmse: None,
            energy_used: 0.0,
            peak_power: 0.0,
            saturation_count: 0,
        };
        Ok(LiveBody {
            record: BodyRecord {
                name,
                assembly,
                mass_properties: props,
                plant,
                samples: Vec::new(),
                reference: Vec::new(),
                forces: Vec::new(),
                power: Vec::new(),
                saturated: Vec::new(),
                summary,
            },
            alloc,
            specs,
            task,
            state,
        })
    }
}

impl LiveBody {
    /// Control, allocate and record at `t`; returns the applied body wrench.
    fn control(&mut self, t: f64, gains: &GainSet) -> Vector6<f64> {
        let reference = self.task.reference(t);
        let demand = match (&reference, self.task.scripted_wrench(t)) {
            (_, Some(w)) => w,
            (Some(r), None) => pd_wrench(&self.state, r, gains, &self.record.plant),
            (None, None) => Vector6::zeros(),
        };
        let a = allocate(&self.alloc, &demand);
        let applied = self.alloc.wrench(&a.forces);
        let power: f64 = self.specs.iter().zip(a.forces.iter()).map(|(s, &f)| thruster_power(s, f)).sum();
        let rec = &mut self.record;
        rec.samples.push(TraceSample { t, state: self.state, wrench: applied });
        if let Some(r) = reference {
            rec.reference.push(r);
        }
        rec.saturated.push(a.any_clipped());
        rec.forces.push(a.forces);
        rec.power.push(power);
        applied
    }

    /// Close the record with a zero-wrench sample at `t`.
    fn finish(mut self, t: f64, dt: f64) -> Result<BodyRecord> {
        let n = self.alloc.thruster_count();
        let reference = self.task.reference(t);
        let rec = &mut self.record;
        rec.samples.push(TraceSample { t, state: self.state, wrench: Vector6::zeros() });
        if let Some(r) = reference {
            rec.reference.push(r);
        }
        rec.forces.push(DVector::zeros(n));
        rec.power.push(0.0);
        rec.saturated.push(false);
        let tracking = if rec.reference.is_empty() { None } else { Some(rmse(&rec.pose_series(), &rec.reference_series())?) };
        let s = &mut rec.summary;
        s.end_time = t;
        s.energy_used = rec.power.iter().sum::<f64>() * dt;
        s.peak_power = rec.power.iter().cloned().fold(0.0, f64::max);
        s.saturation_count = rec.saturated.iter().filter(|&&x| x).count();
        s.position_rmse = tracking.map(|r| r.position);
        s.orientation_rmse = tracking.map(|r| r.orientation);
        Ok(self.record)
    }
}

/// Lattice rotation closest to `q`, with the residual angle.
pub fn nearest_cube_rotation(q: &UnitQuaternion<f64>) -> (CubeRotation, f64) {
    CubeRotation::all()
        .iter()
        .map(|r| (*r, r.quaternion().angle_to(q)))
        .fold((CubeRotation::IDENTITY, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

fn merge(ctx: &mut Context, a: LiveBody, b: LiveBody, t: f64, dt: f64) -> Result<(LiveBody, DockingEvent, [BodyRecord; 2])> {
    let qa = a.state.orientation;
    let (snap, residual) = nearest_cube_rotation(&(qa.inverse() * b.state.orientation));
    let b_rot = b.record.assembly.rotated(snap);
    let com_a = a.record.mass_properties.com;
    let com_b = compose_mass_properties(&b_rot).com;
    let l = a.record.assembly.edge_length();
    let c = com_a + qa.inverse() * (b.state.position - a.state.position);
    let rel = (c - com_b) / l;
    let offset = [rel.x.round() as i32, rel.y.round() as i32, rel.z.round() as i32];
    let assembly = a.record.assembly.merged(&b_rot, offset)?;
    let com_m = compose_mass_properties(&assembly).com;

    let (ma, mb) = (a.record.mass_properties.total_mass, b.record.mass_properties.total_mass);
    let v = (a.state.world_velocity() * ma + b.state.world_velocity() * mb) / (ma + mb);
    let w = (a.state.world_angular_velocity() * ma + b.state.world_angular_velocity() * mb) / (ma + mb);
    let state = BodyState {
        position: a.state.position + qa * (com_m - com_a),
        orientation: qa,
        twist: stack(&(qa.inverse() * v), &(qa.inverse() * w)),
    };
    let hold = match a.task.reference(t) {
        Some(r) => Reference::hold(r.position + r.orientation * (com_m - com_a), r.orientation),
        None => Reference::hold(state.position, state.orientation),
    };
    let name = format!("{}+{}", a.record.name, b.record.name);
    let drag = ctx.lut_for(&assembly)?;
    let merged = ctx.body(name.clone(), assembly, drag, state, Task::Hold(hold), t)?;
    let event = DockingEvent {
        time: t,
        bodies: [a.record.name.clone(), b.record.name.clone()],
        merged: Some(name),
        offset: Some(offset),
        attitude_residual: residual,
    };
    Ok((merged, event, [a.finish(t, dt)?, b.finish(t, dt)?]))
}

fn centre_distance(a: &LiveBody, b: &LiveBody) -> f64 {
    (a.state.position - b.state.position).norm()
}

/// Run one scenario to completion.
///
/// Each step samples the reference, computes the PD wrench (or the scripted
/// wrench), allocates and clips thrust, and integrates the thrust-produced
/// wrench with RK4. Docking is checked after every step; a merge replaces the
/// pair with one body between steps.
pub fn run_scenario(scenario: &Scenario) -> Result<SimResult> {
    let doc = &scenario.doc;
    let dt = doc.dt;
    let steps = step_count(dt, scenario.t_end)?;
    let mut ctx = Context { scenario, gains: scenario.gains, luts: BTreeMap::new() };
    let mut live: Vec<Option<LiveBody>> = Vec::new();
    for b in &scenario.bodies {
        live.push(Some(ctx.body(b.name.clone(), b.assembly.clone(), b.drag.clone(), b.initial, b.task.clone(), 0.0)?));
    }
    let mut finished: Vec<BodyRecord> = Vec::new();
    let docking: Option<&DockingDoc> = doc.docking.as_ref();
    let mut monitor = docking.map(|d| {
        let l = scenario.bodies[d.bodies[0]].assembly.edge_length();
        DockingMonitor::new(l, d.window, d.tolerance)
    });
    let mut event: Option<DockingEvent> = None;

    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = (k + 1) as f64 * dt;
        for body in live.iter_mut().flatten() {
            let w = body.control(t, &ctx.gains);
            let next = rk4_step(&body.state, &body.record.plant, &w, dt);
            if !next.is_finite() {
                return Err(Error::Divergence { time: t_next, reason: format!("state of `{}` became non-finite", body.record.name) });
            }
            body.state = next;
        }
        if let (Some(d), Some(m), None) = (docking, monitor.as_mut(), &event) {
            let [i, j] = d.bodies;
            if let (Some(a), Some(b)) = (&live[i], &live[j]) {
                if m.push(t_next, centre_distance(a, b)).is_some() {
                    if d.merge {
                        let a = live[i].take().unwrap();
                        let b = live[j].take().unwrap();
                        let (merged, ev, records) = merge(&mut ctx, a, b, t_next, dt)?;
                        finished.extend(records);
                        live.push(Some(merged));
                        event = Some(ev);
                    } else {
                        event = Some(DockingEvent {
                            time: t_next,
                            bodies: [a.record.name.clone(), b.record.name.clone()],
                            merged: None,
                            offset: None,
                            attitude_residual: nearest_cube_rotation(&(a.state.orientation.inverse() * b.state.orientation)).1,
                        });
                    }
                }
            }
        }
    }
    let t_end = steps as f64 * dt;
    for body in live.into_iter().flatten() {
        finished.push(body.finish(t_end, dt)?);
    }
    finished.sort_by(|a, b| a.summary.start_time.total_cmp(&b.summary.start_time));
    let summary = SimSummary {
        name: doc.name.clone(),
        seed: doc.seed,
        dt,
        t_end,
        bodies: finished.iter().map(|b| b.summary.clone()).collect(),
        docking: event,
    };
    Ok(SimResult { summary, bodies: finished })
}

/// Run independent scenarios concurrently, results in input order.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<SimResult>> {
    scenarios.par_iter().map(run_scenario).collect()
}

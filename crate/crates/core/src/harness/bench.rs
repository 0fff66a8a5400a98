use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::configs;
use crate::capability::{
    mie_volume, power_space_over, reachable_wrench_space_over, thrust_variance, PowerSpace, ReachOptions, Weighting,
    WrenchMode, WrenchSpace,
};
use crate::control::{build_allocation, thruster_power, AllocationModel};
use crate::error::{Error, Result};
use crate::hydro::{fibonacci_directions, DirectionSet};
use crate::morphology::{dirichlet_energy, willmore_energy, RadialSurface, DEFAULT_L_MAX};
use crate::vehicle::{compose_mass_properties, Assembly, ThrusterSpec};

pub const DEFAULT_BENCH_N_S: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub n_s: usize,
    pub l_max: usize,
    /// Scale wrench spaces to the thrust that a total power budget (W) allows.
    pub power_budget: Option<f64>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { n_s: DEFAULT_BENCH_N_S, l_max: DEFAULT_L_MAX, power_budget: None }
    }
}

/// One benchmark input; unresolvable configs carry their error.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub name: String,
    pub assembly: std::result::Result<Assembly, String>,
}

impl BenchConfig {
    pub fn new(name: &str, assembly: Result<Assembly>) -> Self {
        Self { name: name.to_string(), assembly: assembly.map_err(|e| e.to_string()) }
    }
}

/// The bundled comparison set.
pub fn bundled_configs() -> Vec<BenchConfig> {
    configs::assembly_names().map(|n| BenchConfig::new(n, configs::assembly(n))).collect()
}

/// The fourteen capability figures; `None` where a computation failed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CapabilityMetrics {
    pub power_force_e_d: Option<f64>,
    pub power_force_e_w: Option<f64>,
    pub power_force_p_w: Option<f64>,
    pub sigma2_t_p: Option<f64>,
    pub wrench_force_e_d: Option<f64>,
    pub wrench_force_e_w: Option<f64>,
    pub wrench_force_v_mie: Option<f64>,
    pub power_torque_e_d: Option<f64>,
    pub power_torque_e_w: Option<f64>,
    pub power_torque_p_w: Option<f64>,
    pub sigma2_t_w: Option<f64>,
    pub wrench_torque_e_d: Option<f64>,
    pub wrench_torque_e_w: Option<f64>,
    pub wrench_torque_v_mie: Option<f64>,
}

impl CapabilityMetrics {
    pub const LABELS: [&'static str; 14] = [
        "P.f.E_D", "P.f.E_W", "P.f.P_W", "s2_T,P", "W.f.E_D", "W.f.E_W", "W.f.V_MIE", "P.t.E_D", "P.t.E_W", "P.t.P_W",
        "s2_T,W", "W.t.E_D", "W.t.E_W", "W.t.V_MIE",
    ];

    pub fn values(&self) -> [Option<f64>; 14] {
        [
            self.power_force_e_d,
            self.power_force_e_w,
            self.power_force_p_w,
            self.sigma2_t_p,
            self.wrench_force_e_d,
            self.wrench_force_e_w,
            self.wrench_force_v_mie,
            self.power_torque_e_d,
            self.power_torque_e_w,
            self.power_torque_p_w,
            self.sigma2_t_w,
            self.wrench_torque_e_d,
            self.wrench_torque_e_w,
            self.wrench_torque_v_mie,
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_some_and(f64::is_finite))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub thrusters: Option<usize>,
    pub rank: Option<usize>,
    pub metrics: CapabilityMetrics,
    /// `metric: message` for every metric that could not be computed.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub options: BenchOptions,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, name: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width table, one row per config.
    pub fn to_table(&self) -> String {
        let name_w = self.rows.iter().map(|r| r.name.len()).chain([6]).max().unwrap();
        let col_w = 11;
        let mut out = String::new();
        let _ = write!(out, "{:<name_w$}", "config");
        for l in CapabilityMetrics::LABELS {
            let _ = write!(out, " {l:>col_w$}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<name_w$}", r.name);
            for v in r.metrics.values() {
                match v {
                    Some(x) => {
                        let _ = write!(out, " {:>col_w$}", format!("{x:.4e}"));
                    }
                    None => {
                        let _ = write!(out, " {:>col_w$}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Recorder {
    errors: Vec<String>,
}

impl Recorder {
    fn take<T>(&mut self, metric: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{metric}: {e}"));
                None
            }
        }
    }
}

fn power_scale(specs: &[&ThrusterSpec], budget: f64) -> Result<f64> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::Argument(format!("power budget must be positive, got {budget}")));
    }
    let full: f64 = specs.iter().map(|s| thruster_power(s, s.f_max.max(-s.f_min))).sum();
    if !(full > 0.0) {
        return Err(Error::Configuration("thrusters draw no power at full thrust".into()));
    }
    Ok((budget / full).sqrt())
}

fn power_metrics(rec: &mut Recorder, prefix: &str, ps: &PowerSpace, l_max: usize) -> [Option<f64>; 3] {
    let e_d = rec.take(&format!("{prefix}_e_d"), dirichlet_energy(&ps.directions, &ps.attainable_radii(), l_max).map(|d| d.energy));
    let e_w = rec.take(
        &format!("{prefix}_e_w"),
        RadialSurface::from_power_space(ps).and_then(|s| willmore_energy(&s)).map(|w| w.energy),
    );
    [e_d, e_w, Some(ps.total_power())]
}

fn wrench_metrics(rec: &mut Recorder, prefix: &str, ws: &WrenchSpace, l_max: usize) -> [Option<f64>; 3] {
    let e_d = rec.take(&format!("{prefix}_e_d"), dirichlet_energy(&ws.directions, &ws.extents, l_max).map(|d| d.energy));
    let e_w = rec.take(
        &format!("{prefix}_e_w"),
        RadialSurface::from_wrench_space(ws).and_then(|s| willmore_energy(&s)).map(|w| w.energy),
    );
    let v = match rec.take(&format!("{prefix}_v_mie"), mie_volume(ws)) {
        Some(m) if m.degenerate => {
            rec.errors.push(format!("{prefix}_v_mie: degenerate wrench space, volume reported as 0"));
            Some(0.0)
        }
        Some(m) => Some(m.volume),
        None => None,
    };
    [e_d, e_w, v]
}

fn mode_metrics(
    rec: &mut Recorder,
    alloc: &AllocationModel,
    specs: &[&ThrusterSpec],
    dirs: &DirectionSet,
    mode: WrenchMode,
    opts: &BenchOptions,
    scale: f64,
) -> ([Option<f64>; 3], Option<f64>, [Option<f64>; 3]) {
    let tag = mode.name();
    let (weighting, s2_name) = match mode {
        WrenchMode::Force => (Weighting::Power, "sigma2_t_p"),
        WrenchMode::Torque => (Weighting::Wrench, "sigma2_t_w"),
    };
    let power = match rec.take(&format!("power_{tag}"), power_space_over(alloc, specs, mode, dirs)) {
        Some(ps) => power_metrics(rec, &format!("power_{tag}"), &ps, opts.l_max),
        None => [None; 3],
    };
    let s2 = rec.take(s2_name, thrust_variance(alloc, mode, dirs, weighting)).map(|v| v.sigma2);
    let wrench = match rec.take(&format!("wrench_{tag}"), reachable_wrench_space_over(alloc, mode, dirs, ReachOptions::default())) {
        Some(mut ws) => {
            ws.extents.iter_mut().for_each(|e| *e *= scale);
            wrench_metrics(rec, &format!("wrench_{tag}"), &ws, opts.l_max)
        }
        None => [None; 3],
    };
    (power, s2, wrench)
}

fn bench_row(config: &BenchConfig, dirs: &Result<DirectionSet>, opts: &BenchOptions) -> BenchRow {
    let mut row = BenchRow {
        name: config.name.clone(),
        thrusters: None,
        rank: None,
        metrics: CapabilityMetrics::default(),
        errors: Vec::new(),
    };
    let assembly = match &config.assembly {
        Ok(a) => a,
        Err(e) => {
            row.errors.push(format!("config: {e}"));
            return row;
        }
    };
    let dirs = match dirs {
        Ok(d) => d,
        Err(e) => {
            row.errors.push(format!("directions: {e}"));
            return row;
        }
    };
    let mut rec = Recorder { errors: Vec::new() };
    let Some(alloc) = rec.take("allocation", build_allocation(assembly, &compose_mass_properties(assembly))) else {
        row.errors = rec.errors;
        return row;
    };
    row.thrusters = Some(alloc.thruster_count());
    row.rank = Some(alloc.rank);
    let thrusters = assembly.thrusters();
    let specs: Vec<&ThrusterSpec> = thrusters.iter().map(|(_, _, s)| *s).collect();
    let scale = match opts.power_budget {
        Some(b) => match rec.take("power_budget", power_scale(&specs, b)) {
            Some(k) => k,
            None => {
                row.errors = rec.errors;
                return row;
            }
        },
        None => 1.0,
    };
    let (pf, s2p, wf) = mode_metrics(&mut rec, &alloc, &specs, dirs, WrenchMode::Force, opts, scale);
    let (pt, s2w, wt) = mode_metrics(&mut rec, &alloc, &specs, dirs, WrenchMode::Torque, opts, scale);
    row.metrics = CapabilityMetrics {
        power_force_e_d: pf[0],
        power_force_e_w: pf[1],
        power_force_p_w: pf[2],
        sigma2_t_p: s2p,
        wrench_force_e_d: wf[0],
        wrench_force_e_w: wf[1],
        wrench_force_v_mie: wf[2],
        power_torque_e_d: pt[0],
        power_torque_e_w: pt[1],
        power_torque_p_w: pt[2],
        sigma2_t_w: s2w,
        wrench_torque_e_d: wt[0],
        wrench_torque_e_w: wt[1],
        wrench_torque_v_mie: wt[2],
    };
    row.errors = rec.errors;
    row
}

/// Capability metrics for every config; failures stay inside their row.
pub fn benchmark_report(configs: &[BenchConfig], opts: &BenchOptions) -> BenchReport {
    let dirs = fibonacci_directions(opts.n_s);
    let rows = configs.par_iter().map(|c| bench_row(c, &dirs, opts)).collect();
    BenchReport { options: *opts, rows }
}

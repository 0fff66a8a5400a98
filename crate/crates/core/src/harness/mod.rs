//! Scenarios, the closed-loop runner, tracking and docking metrics, and the capability benchmark.

pub mod bench;
pub mod configs;
pub mod metrics;
pub mod runner;
pub mod scenario;
pub mod spaces;
pub mod svg;

pub use bench::{benchmark_report, bundled_configs, BenchConfig, BenchOptions, BenchReport, BenchRow, CapabilityMetrics};
pub use metrics::{docking_check, interpolate, rmse, DockingMonitor, PoseSample, Rmse};
pub use runner::{
    nearest_cube_rotation, read_pose_csv, run_batch, run_scenario, BodyRecord, BodySummary, DockingEvent, SimResult,
    SimSummary,
};
pub use scenario::{default_gains, AssemblyRef, BodyDoc, PathDoc, PlantDoc, Scenario, ScenarioDoc, Task, TaskDoc};
pub use spaces::{SpaceDoc, SpaceKind};

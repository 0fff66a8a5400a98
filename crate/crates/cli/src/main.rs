use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use modcube_core::capability::{power_space, reachable_wrench_space, WrenchMode};
use modcube_core::control::build_allocation;
use modcube_core::harness::svg::{space_svg, trajectory_svg, violin_svg};
use modcube_core::harness::{
    benchmark_report, bundled_configs, configs, run_scenario, BenchConfig, BenchOptions, ScenarioDoc, Scenario, SpaceDoc,
};
use modcube_core::hydro::lut_file::{parse_lut, write_lut};
use modcube_core::hydro::{build_drag_lut, DragLutConfig, DEFAULT_CD, DEFAULT_RHO};
use modcube_core::morphology::{dirichlet_energy, willmore_energy, DEFAULT_L_MAX};
use modcube_core::planner::{sample_trajectory, WaypointsDoc};
use modcube_core::vehicle::schema::parse_assembly;
use modcube_core::vehicle::{compose_mass_properties, Assembly};
use modcube_core::Error;

#[derive(Parser)]
#[command(name = "modcube", version, about = "Modeling, simulation and capability analysis for modular underwater cubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutDir {
    /// Directory for generated files.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check configuration files.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Build or inspect drag lookup tables.
    Draglut {
        #[command(subcommand)]
        action: DraglutAction,
    },
    /// Sample the reachable wrench space of an assembly.
    Wrench(SpaceArgs),
    /// Sample the power space of an assembly.
    Power(SpaceArgs),
    /// Shape metrics of a sampled space.
    Morph {
        space: PathBuf,
        #[arg(long, default_value_t = DEFAULT_L_MAX)]
        l_max: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Minimum-snap plan through a waypoint file.
    Plan {
        waypoints: PathBuf,
        /// Sampling step of the exported reference.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a closed-loop scenario.
    Simulate {
        /// Scenario file or bundled scenario name.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Drag table directions.
        #[arg(long)]
        n_s: Option<usize>,
        /// Drag table samples per module.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Capability comparison across assemblies.
    Bench {
        /// Assembly files or bundled names; defaults to the bundled set.
        assemblies: Vec<String>,
        #[arg(long, default_value_t = modcube_core::harness::bench::DEFAULT_BENCH_N_S)]
        n_s: usize,
        #[arg(long, default_value_t = DEFAULT_L_MAX)]
        l_max: usize,
        /// Scale wrench spaces to a total power budget in watts.
        #[arg(long)]
        power_budget: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Validate an assembly, scenario, waypoint, space or drag-table file.
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum DraglutAction {
    Build {
        /// Assembly file or bundled name.
        assembly: String,
        #[arg(long, default_value_t = 200)]
        n_s: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_RHO)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_CD)]
        c_d: f64,
        #[command(flatten)]
        out: OutDir,
    },
    Show { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Force,
    Torque,
}

impl From<ModeArg> for WrenchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Force => WrenchMode::Force,
            ModeArg::Torque => WrenchMode::Torque,
        }
    }
}

#[derive(Args)]
struct SpaceArgs {
    /// Assembly file or bundled name.
    assembly: String,
    #[arg(long, value_enum, default_value = "force")]
    mode: ModeArg,
    #[arg(long, default_value_t = 200)]
    n_s: usize,
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    out: OutDir,
}

type CliResult = Result<(), Error>;

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Configuration(format!("cannot read `{}`: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn stem(arg: &str) -> String {
    Path::new(arg).file_stem().map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned())
}

/// An existing file path, or else a bundled configuration name.
fn load_assembly(arg: &str) -> Result<Assembly, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_assembly(&read(path)?)
    } else {
        configs::assembly(arg)
    }
}

fn validate(file: &Path) -> CliResult {
    let text = read(file)?;
    if file.extension().is_some_and(|e| e == "csv") {
        let lut = parse_lut(&text)?;
        println!("drag table with {} directions", lut.directions().len());
        return Ok(());
    }
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let has = |k: &str| value.get(k).is_some();
    if has("bodies") {
        let s = Scenario::from_json(&text, file.parent())?;
        println!("scenario `{}`: {} bodies, {:.2} s", s.doc.name, s.bodies.len(), s.t_end);
    } else if has("modules") {
        let a = parse_assembly(&text)?;
        let alloc = build_allocation(&a, &compose_mass_properties(&a))?;
        println!("assembly: {} modules, {} thrusters, rank {}", a.len(), alloc.thruster_count(), alloc.rank);
        if let Some(w) = alloc.controllability_warning() {
            println!("warning: {w}");
        }
    } else if has("points") {
        let t = WaypointsDoc::from_json(&text)?.to_trajectory()?;
        println!("waypoints: {} points over {:.2} s", t.plan.waypoints.len(), t.plan.duration());
    } else if has("radii") {
        let s = SpaceDoc::from_json(&text)?;
        println!("space: {} samples", s.radii.len());
    } else {
        return Err(Error::Configuration("unrecognised configuration document".into()));
    }
    println!("ok");
    Ok(())
}

fn space(args: &SpaceArgs, power: bool) -> CliResult {
    let a = load_assembly(&args.assembly)?;
    let alloc = build_allocation(&a, &compose_mass_properties(&a))?;
    if let Some(w) = alloc.controllability_warning() {
        eprintln!("warning: {w}");
    }
    let mode = WrenchMode::from(args.mode);
    let doc = if power {
        let thrusters = a.thrusters();
        let specs: Vec<_> = thrusters.iter().map(|(_, _, s)| *s).collect();
        SpaceDoc::from_power_space(&power_space(&alloc, &specs, mode, args.n_s)?)
    } else {
        SpaceDoc::from_wrench_space(&reachable_wrench_space(&alloc, mode, args.n_s)?)
    };
    let kind = if power { "power" } else { "wrench" };
    let base = format!("{}_{kind}_{}", stem(&args.assembly), mode.name());
    write(&args.out.out, &format!("{base}.json"), &doc.to_json()?)?;
    if args.svg {
        let pts: Vec<_> = doc.directions.iter().zip(&doc.radii).map(|(d, r)| Vector3::from(*d) * *r).collect();
        write(&args.out.out, &format!("{base}.svg"), &space_svg(&base, &pts))?;
    }
    Ok(())
}

fn morph(path: &Path, l_max: usize, out: &Path) -> CliResult {
    let doc = SpaceDoc::from_json(&read(path)?)?;
    let dirs = doc.direction_set()?;
    let d = dirichlet_energy(&dirs, &doc.radii, l_max)?;
    let surface = doc.surface()?;
    let w = willmore_energy(&surface)?;
    let base = stem(&path.to_string_lossy());
    let report = serde_json::json!({
        "e_w": w.energy,
        "bending": w.bending,
        "total_gaussian_curvature": w.total_gaussian,
        "e_d": d.energy,
        "l_max": d.l_max,
        "condition_number": d.condition_number,
        "power_spectrum": d.power_spectrum(),
        "coefficients": d.coefficients,
    });
    println!("E_W = {:.6e}  E_D = {:.6e}", w.energy, d.energy);
    write(out, &format!("{base}_morph.json"), &serde_json::to_string_pretty(&report)?)?;
    write(out, &format!("{base}.obj"), &surface.to_obj())?;
    Ok(())
}

fn plan(path: &Path, dt: f64, out: &Path) -> CliResult {
    let doc = WaypointsDoc::from_json(&read(path)?)?;
    let traj = doc.to_trajectory()?;
    let samples = sample_trajectory(&traj, dt)?;
    let base = stem(&path.to_string_lossy());
    write(out, &format!("{base}_plan.json"), &serde_json::to_string_pretty(&traj.plan)?)?;
    let mut csv = String::from("t,px,py,pz,vx,vy,vz,ax,ay,az,yaw,yaw_rate\n");
    for s in &samples {
        let v = [
            s.t, s.position.x, s.position.y, s.position.z, s.velocity.x, s.velocity.y, s.velocity.z, s.acceleration.x,
            s.acceleration.y, s.acceleration.z, s.yaw, s.yaw_rate,
        ];
        csv.push_str(&v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    write(out, &format!("{base}_reference.csv"), &csv)?;
    println!("snap cost {:.6e} over {:.2} s", traj.plan.snap_cost(), traj.plan.duration());
    Ok(())
}

fn simulate(arg: &str, seed: Option<u64>, n_s: Option<usize>, samples: Option<usize>, svg: bool, out: &Path) -> CliResult {
    let path = Path::new(arg);
    let (text, base) = if path.is_file() { (read(path)?, path.parent()) } else { (configs::scenario_json(arg)?.to_string(), None) };
    let mut doc = ScenarioDoc::from_json(&text)?;
    if let Some(s) = seed {
        doc.seed = s;
    }
    if let Some(n) = n_s {
        doc.plant.n_s = n;
    }
    if let Some(n) = samples {
        doc.plant.samples = n;
    }
    let scenario = Scenario::resolve(&doc, base)?;
    let result = run_scenario(&scenario)?;
    result.write_outputs(out)?;
    for b in &result.summary.bodies {
        match b.position_rmse {
            Some(r) => println!("{}: position RMSE {:.3} mm, energy {:.1} J", b.name, r * 1e3, b.energy_used),
            None => println!("{}: open loop, energy {:.1} J", b.name, b.energy_used),
        }
    }
    if let Some(d) = &result.summary.docking {
        println!("docked at {:.2} s", d.time);
    }
    if svg {
        for b in &result.bodies {
            if !b.reference.is_empty() {
                write(out, &format!("{}_trajectory.svg", b.name), &trajectory_svg(&b.name, &b.pose_series(), &b.reference_series()))?;
            }
            let n = b.forces.first().map_or(0, |f| f.len());
            let series: Vec<Vec<f64>> = (0..n).map(|i| b.forces.iter().map(|f| f[i].abs()).collect()).collect();
            write(out, &format!("{}_thrust.svg", b.name), &violin_svg(&format!("{} |thrust|", b.name), &series))?;
        }
    }
    Ok(())
}

fn bench(assemblies: &[String], opts: BenchOptions, out: &Path) -> CliResult {
    let configs = if assemblies.is_empty() {
        bundled_configs()
    } else {
        assemblies.iter().map(|a| BenchConfig::new(&stem(a), load_assembly(a))).collect()
    };
    let report = benchmark_report(&configs, &opts);
    print!("{}", report.to_table());
    for r in &report.rows {
        for e in &r.errors {
            eprintln!("{}: {e}", r.name);
        }
    }
    write(out, "bench.json", &report.to_json()?)?;
    write(out, "bench.txt", &report.to_table())?;
    Ok(())
}

fn draglut_build(assembly: &str, config: DragLutConfig, out: &Path) -> CliResult {
    let a = load_assembly(assembly)?;
    let lut = build_drag_lut(&a, &config)?;
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{}_draglut.csv", stem(assembly)));
    write_lut(&lut, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn draglut_show(file: &Path) -> CliResult {
    let lut = parse_lut(&read(file)?)?;
    let areas = lut.frontal_areas();
    let (lo, hi) = areas.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &a| (l.min(a), h.max(a)));
    println!("directions {}  rho {}  c_d {}  samples {}  seed {}", areas.len(), lut.rho(), lut.c_d(), lut.samples(), lut.seed());
    println!("frontal area min {lo:.6} m^2  max {hi:.6} m^2");
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Config { action: ConfigAction::Validate { file } } => validate(&file),
        Command::Draglut { action } => match action {
            DraglutAction::Build { assembly, n_s, samples, seed, rho, c_d, out } => {
                draglut_build(&assembly, DragLutConfig { n_s, samples, seed, rho, c_d, alpha: None }, &out.out)
            }
            DraglutAction::Show { file } => draglut_show(&file),
        },
        Command::Wrench(args) => space(&args, false),
        Command::Power(args) => space(&args, true),
        Command::Morph { space, l_max, out } => morph(&space, l_max, &out.out),
        Command::Plan { waypoints, dt, out } => plan(&waypoints, dt, &out.out),
        Command::Simulate { scenario, seed, n_s, samples, svg, out } => simulate(&scenario, seed, n_s, samples, svg, &out.out),
        Command::Bench { assemblies, n_s, l_max, power_budget, out } => {
            bench(&assemblies, BenchOptions { n_s, l_max, power_budget }, &out.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

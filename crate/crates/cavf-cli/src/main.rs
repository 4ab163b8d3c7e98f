//! `cavf` — scenario simulator and field-inspection CLI.
//!
//! Subcommands: `simulate`, `field`, `check`, `plot`, `generate`.
//! Exit codes: `0` success (and collision-free where that applies),
//! `1` usage or validation error, `2` collision detected.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cavf::export::{export_field_grid, export_trajectory, import_trajectory, GridSpec};
use cavf::plot::{render_svg, PlotOptions};
use cavf::{
    check_collision, generate_scenario, load_scenario, run, save_scenario, GainMode,
    GeneratorConfig, Scenario, Side, Trajectory,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_COLLISION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "cavf",
    version,
    about = "Collision-avoidance vector fields: simulate, inspect, and plot scenarios",
    after_help = "Exit codes: 0 = success (collision-free), 1 = usage or validation error, \
                  2 = collision detected."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and export the trajectory CSV.
    Simulate(SimulateArgs),
    /// Sample the blended guidance field over a grid and export it as CSV.
    Field(FieldArgs),
    /// Validate a scenario file, or audit a flown trajectory CSV.
    Check(CheckArgs),
    /// Render a scenario (and a flown or freshly simulated trajectory) to SVG.
    Plot(PlotArgs),
    /// Generate a randomized scenario from a seed.
    Generate(GenerateArgs),
}

/// Scenario-value overrides shared by the scenario-driven subcommands.
#[derive(Args, Clone, Copy, Default)]
struct Overrides {
    /// Integration step in seconds (overrides the scenario).
    #[arg(long)]
    dt: Option<f64>,
    /// Run duration in seconds (overrides the scenario).
    #[arg(long)]
    t_final: Option<f64>,
    /// Passing side on the switching set (overrides the scenario).
    #[arg(long, value_enum)]
    tie_break: Option<TieArg>,
    /// Tracking-gain law (overrides the scenario).
    #[arg(long, value_enum)]
    gain_mode: Option<GainModeArg>,
    /// Fixed gain K; only with --gain-mode fixed.
    #[arg(long)]
    gain: Option<f64>,
    /// Adaptive-gain numerator c; only with --gain-mode adaptive.
    #[arg(long)]
    c_num: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum GainModeArg {
    Fixed,
    Separation,
    Adaptive,
}

impl Overrides {
    fn apply(&self, sc: &mut Scenario) -> Result<()> {
        if let Some(dt) = self.dt {
            sc.sim.dt = dt;
        }
        if let Some(t_final) = self.t_final {
            sc.sim.t_final = t_final;
        }
        if let Some(side) = self.tie_break {
            sc.control.side = match side {
                TieArg::Left => Side::Left,
                TieArg::Right => Side::Right,
            };
        }
        match self.gain_mode {
            Some(GainModeArg::Fixed) => {
                let k = self.gain.context("--gain-mode fixed requires --gain")?;
                if self.c_num.is_some() {
                    bail!("--c-num is only valid with --gain-mode adaptive");
                }
                sc.control.gain_mode = GainMode::Fixed { k };
            }
            Some(GainModeArg::Separation) => {
                if self.gain.is_some() || self.c_num.is_some() {
                    bail!("--gain/--c-num are not valid with --gain-mode separation");
                }
                sc.control.gain_mode = GainMode::Separation { delta: sc.mixing.min_separation };
            }
            Some(GainModeArg::Adaptive) => {
                let c_num = self.c_num.context("--gain-mode adaptive requires --c-num")?;
                if self.gain.is_some() {
                    bail!("--gain is only valid with --gain-mode fixed");
                }
                sc.control.gain_mode = GainMode::Adaptive { c_num };
            }
            None => {
                if self.gain.is_some() || self.c_num.is_some() {
                    bail!("--gain/--c-num require an explicit --gain-mode");
                }
            }
        }
        cavf::scenario::validate(sc)?;
        Ok(())
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Output directory for exported files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also render the run to `<out>/<scenario>.svg`.
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct FieldArgs {
    /// Scenario TOML file (obstacles, speed, and mixing come from here).
    scenario: PathBuf,
    /// Grid rectangle `x0 x1 y0 y1`; fitted around the scenario if omitted.
    #[arg(long, num_args = 4, allow_negative_numbers = true,
          value_names = ["X0", "X1", "Y0", "Y1"])]
    bounds: Option<Vec<f64>>,
    /// Samples per axis.
    #[arg(long, default_value_t = 40)]
    res: usize,
    /// Output CSV path (default `<scenario>_field.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct CheckArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Trajectory CSV to audit against the scenario's mission criteria.
    #[arg(long)]
    traj: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Scenario TOML file.
    scenario: PathBuf,
    /// Trajectory CSV to draw; the scenario is simulated when omitted.
    #[arg(long)]
    traj: Option<PathBuf>,
    /// Output SVG path (default `<scenario>.svg`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field-quiver resolution per axis; 0 disables the underlay.
    #[arg(long, default_value_t = 24)]
    quiver: usize,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct GenerateArgs {
    /// RNG seed; equal seeds give byte-identical scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of obstacles.
    #[arg(long)]
    count: Option<usize>,
    /// How many obstacles translate (the rest are static).
    #[arg(long)]
    moving: Option<usize>,
    /// Output TOML path; written to stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<u8> {
    match cmd {
        Cmd::Simulate(args) => simulate(args),
        Cmd::Field(args) => field(args),
        Cmd::Check(args) => check(args),
        Cmd::Plot(args) => plot(args),
        Cmd::Generate(args) => generate(args),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn load(path: &Path) -> Result<Scenario> {
    load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn simulate(args: &SimulateArgs) -> Result<u8> {
    let mut sc = load(&args.scenario)?;
    args.overrides.apply(&mut sc)?;
    let trajectory = run(&sc)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let base = stem(&args.scenario);
    let traj_path = args.out.join(format!("{base}_trajectory.csv"));
    export_trajectory(&trajectory, &traj_path)
        .with_context(|| format!("writing {}", traj_path.display()))?;
    println!("wrote {}", traj_path.display());
    if args.plot {
        let svg_path = args.out.join(format!("{base}.svg"));
        let opts = PlotOptions { quiver: Some(24), ..PlotOptions::default() };
        std::fs::write(&svg_path, render_svg(&sc, Some(&trajectory), &opts))
            .with_context(|| format!("writing {}", svg_path.display()))?;
        println!("wrote {}", svg_path.display());
    }
    let report = check_collision(&trajectory);
    println!("{report}");
    Ok(if report.first_violation.is_some() { EXIT_COLLISION } else { EXIT_OK })
}

fn field(args: &FieldArgs) -> Result<u8> {
    let mut sc = load(&args.scenario)?;
    args.overrides.apply(&mut sc)?;
    let (x0, x1, y0, y1) = match &args.bounds {
        Some(b) => (b[0], b[1], b[2], b[3]),
        None => fit_bounds(&sc),
    };
    let grid = GridSpec { x0, x1, y0, y1, nx: args.res, ny: args.res };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_field.csv", stem(&args.scenario))));
    export_field_grid(
        &sc.obstacles,
        sc.agent.v,
        sc.agent.psi_d,
        &sc.mixing,
        sc.control.tie_break(),
        &grid,
        &out,
    )
    .with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} ({} rows)", out.display(), grid.nx * grid.ny);
    Ok(EXIT_OK)
}

/// A rectangle covering the vehicle start and every influence disc, padded.
fn fit_bounds(sc: &Scenario) -> (f64, f64, f64, f64) {
    let mut x0 = sc.agent.x - 1.0;
    let mut x1 = sc.agent.x + 1.0;
    let mut y0 = sc.agent.y - 1.0;
    let mut y1 = sc.agent.y + 1.0;
    for o in &sc.obstacles {
        let pad = o.cavf.r_i + 1.0;
        x0 = x0.min(o.center.x - pad);
        x1 = x1.max(o.center.x + pad);
        y0 = y0.min(o.center.y - pad);
        y1 = y1.max(o.center.y + pad);
    }
    (x0, x1, y0, y1)
}

fn check(args: &CheckArgs) -> Result<u8> {
    let sc = load(&args.scenario)?;
    let Some(traj_path) = &args.traj else {
        println!(
            "scenario OK: {} obstacle(s), dt = {}, t_final = {}",
            sc.obstacles.len(),
            sc.sim.dt,
            sc.sim.t_final
        );
        return Ok(EXIT_OK);
    };
    let trajectory: Trajectory =
        import_trajectory(traj_path, sc.agent.psi_d, sc.control.e_psi)
            .with_context(|| format!("reading trajectory {}", traj_path.display()))?;
    if trajectory.samples.is_empty() {
        bail!("trajectory {} has no samples", traj_path.display());
    }
    let report = check_collision(&trajectory);
    println!("{report}");
    if let Some(t) = report.first_violation {
        println!("first violation at t = {t}");
        return Ok(EXIT_COLLISION);
    }
    if !report.ok {
        eprintln!(
            "heading not restored: |psi(T) - psi_d| = {} > e_psi = {}",
            report.final_heading_error, trajectory.e_psi
        );
        return Ok(EXIT_USAGE);
    }
    Ok(EXIT_OK)
}

fn plot(args: &PlotArgs) -> Result<u8> {
    let mut sc = load(&args.scenario)?;
    args.overrides.apply(&mut sc)?;
    let trajectory = match &args.traj {
        Some(p) => import_trajectory(p, sc.agent.psi_d, sc.control.e_psi)
            .with_context(|| format!("reading trajectory {}", p.display()))?,
        None => run(&sc)?,
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.svg", stem(&args.scenario))));
    let opts = PlotOptions {
        quiver: (args.quiver > 0).then_some(args.quiver),
        ..PlotOptions::default()
    };
    std::fs::write(&out, render_svg(&sc, Some(&trajectory), &opts))
        .with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn generate(args: &GenerateArgs) -> Result<u8> {
    let mut cfg = GeneratorConfig::template(args.seed);
    if let Some(count) = args.count {
        cfg.count = count;
    }
    if let Some(moving) = args.moving {
        cfg.moving = moving;
    }
    let sc = generate_scenario(&cfg)?;
    let text = save_scenario(&sc);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

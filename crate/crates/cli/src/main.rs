use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lwrnet::flux::NumericalFlux;
use lwrnet::network::{NetworkConfig, Simulation};
use lwrnet::output::{write_run, RunSummary};
use lwrnet::presets::{build_preset, ScenarioPreset};
use lwrnet::verification::{convergence_study, format_csv, format_table, junction_fuzz};

#[derive(Parser)]
#[command(name = "lwrnet", version, about = "RKDG solver for LWR traffic on road networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file and write CSV snapshots and a summary.
    Run(RunArgs),
    /// Error table for the smooth periodic accuracy problem.
    Convergence(ConvergenceArgs),
    /// Compare the junction solvers with a brute-force grid oracle.
    JunctionFuzz(FuzzArgs),
    /// Print a preset as a JSON config.
    EmitPreset {
        name: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the preset names.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum FluxArg {
    Lf,
    Godunov,
}

impl From<FluxArg> for NumericalFlux {
    fn from(f: FluxArg) -> Self {
        match f {
            FluxArg::Lf => NumericalFlux::LaxFriedrichs,
            FluxArg::Godunov => NumericalFlux::Godunov,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Polynomial degree on every road (0..=3).
    #[arg(long)]
    degree: Option<usize>,
    /// Cells per unit length on every road.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// CFL number, applied to every degree.
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "tvb-M")]
    tvb_m: Option<f64>,
    #[arg(long)]
    no_tvb: bool,
    #[arg(long)]
    no_bp: bool,
    #[arg(long, value_enum)]
    flux: Option<FluxArg>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    degrees: Vec<usize>,
    /// Comma list, or `a..b` for doubling from a up to b.
    #[arg(long, default_value = "10..320")]
    meshes: String,
    /// Bound-preserving limiter on, with CFL 0.05 for P2 and P3.
    #[arg(long)]
    bp: bool,
    /// Directory for `errors.txt` and `errors.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2e-3)]
    tolerance: f64,
}

fn parse_meshes(spec: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = spec.split_once("..") {
        let (mut n, hi): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if n == 0 || hi < n {
            bail!("mesh range `{spec}` must satisfy 0 < a <= b");
        }
        let mut out = Vec::new();
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        Ok(out)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().with_context(|| format!("bad mesh size `{s}`")))
            .collect()
    }
}

fn load_config(args: &RunArgs) -> Result<NetworkConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => build_preset(name)?,
        (None, Some(path)) => {
            NetworkConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    if let Some(k) = args.degree {
        cfg.set_degree(k);
    }
    if let Some(n) = args.cells {
        cfg.set_cells_per_unit(n);
    }
    if let Some(t) = args.t_end {
        cfg.solver.t_end = t;
        cfg.solver.output_times.retain(|&s| s <= t);
    }
    if let Some(c) = args.cfl {
        cfg.solver.cfl = [c; 4];
    }
    if let Some(m) = args.tvb_m {
        cfg.solver.tvb_m = m;
    }
    if args.no_tvb {
        cfg.solver.tvb = false;
    }
    if args.no_bp {
        cfg.solver.bp = false;
    }
    if let Some(f) = args.flux {
        cfg.solver.flux = f.into();
    }
    let t_end = cfg.solver.t_end;
    if !cfg.solver.output_times.contains(&t_end) {
        cfg.solver.output_times.push(t_end);
    }
    Ok(cfg)
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let start = Instant::now();
    let result = Simulation::new(&cfg)?.run()?;
    let written = write_run(&result, &args.out)?;
    let s = RunSummary::new(&result);
    println!(
        "t = {} after {} steps in {:.2?}; {} files in {}",
        s.final_time,
        s.steps,
        start.elapsed(),
        written.len(),
        args.out.display()
    );
    println!(
        "mass {:.12} -> {:.12}, boundary inflow {:.12}, relative mismatch {:.2e}",
        s.mass_audit.audit.initial_mass,
        s.mass_audit.audit.final_mass,
        s.mass_audit.audit.boundary_flux_integral,
        s.mass_audit.relative_mismatch
    );
    println!("density range [{:.6}, {:.6}]", s.min_density, s.max_density);
    Ok(())
}

fn convergence(args: &ConvergenceArgs) -> Result<()> {
    let meshes = parse_meshes(&args.meshes)?;
    let reports = convergence_study(&args.degrees, &meshes, args.bp)?;
    let table = format_table(&reports);
    print!("{table}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("errors.txt"), &table)?;
        fs::write(dir.join("errors.csv"), format_csv(&reports))?;
    }
    Ok(())
}

fn fuzz(args: &FuzzArgs) -> Result<()> {
    let report = junction_fuzz(args.trials, args.seed, args.tolerance);
    for k in &report.kinds {
        println!(
            "{}: {} trials, {} mismatches (max error {:.2e}), {} conservation violations (max {:.2e})",
            k.kind,
            k.trials,
            k.mismatches,
            k.max_error,
            k.conservation_violations,
            k.max_conservation_error
        );
    }
    if !report.passed() {
        bail!("junction solvers disagree with the oracle (seed {})", report.seed);
    }
    Ok(())
}

fn emit(name: &str, out: Option<&Path>) -> Result<()> {
    let json = build_preset(name)?.to_json()?;
    match out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Convergence(a) => convergence(a),
        Command::JunctionFuzz(a) => fuzz(a),
        Command::EmitPreset { name, out } => emit(name, out.as_deref()),
        Command::Presets => {
            for p in ScenarioPreset::ALL {
                println!("{p}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

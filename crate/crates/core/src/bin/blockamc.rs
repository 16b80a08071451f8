//! Command-line front end: generate systems, solve one system, run sweeps,
//! report costs and render plots.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure, 4 I/O failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blockamc::analog::{CircuitConfig, Engine, LineEnd};
use blockamc::bench::{self, output, plot, EmitOptions, SweepConfig};
use blockamc::cost::{cost_reports, savings, to_csv, CostConfig};
use blockamc::io::{load_matrix, load_vector, write_matrix_csv, write_vector_csv};
use blockamc::linalg::solve_dense;
use blockamc::mapping::{MapConfig, DEFAULT_G0};
use blockamc::matgen::{gen_rhs, generate, GenSpec, MatrixKind};
use blockamc::solver::{solve_multi_stage, SolveConfig, SolverKind};
use blockamc::{Error, Result};

#[derive(Parser)]
#[command(name = "blockamc", version, about = "BlockAMC analog linear-solver simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix and optionally a right-hand side as CSV.
    Gen(GenArgs),
    /// Solve one system and print the solve report as JSON.
    Solve(SolveArgs),
    /// Run a Monte Carlo sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Print area, power and latency for every solver as JSON.
    Cost(CostArgs),
    /// Render error-vs-size plots from a records CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Matrix kind to generate when no matrix file is given.
    #[arg(long, default_value = "wishart")]
    kind: MatrixKind,
    /// System size.
    #[arg(short, long, default_value_t = 16)]
    n: usize,
    /// Seed of the generated matrix.
    #[arg(long, default_value_t = 0)]
    matrix_seed: u64,
    /// Seed of the generated right-hand side.
    #[arg(long, default_value_t = 1)]
    rhs_seed: u64,
    /// Rows of the Wishart factor (default: n).
    #[arg(long)]
    wishart_m: Option<usize>,
    /// Toeplitz diagonal boost.
    #[arg(long, default_value_t = 1.0)]
    diag_boost: f64,
}

impl SystemArgs {
    fn spec(&self) -> GenSpec {
        GenSpec {
            wishart_m: self.wishart_m,
            toeplitz_diag_boost: self.diag_boost,
            ..GenSpec::new(self.kind, self.n, self.matrix_seed)
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Matrix output file (CSV).
    #[arg(short, long)]
    out: PathBuf,
    /// Also write a right-hand side here (CSV, one value per line).
    #[arg(long)]
    rhs_out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Matrix CSV; overrides generation.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Right-hand side CSV; overrides generation.
    #[arg(long)]
    rhs: Option<PathBuf>,
    #[arg(long, default_value = "one_stage")]
    solver: SolverKind,
    /// Partitioning depth; overrides the solver's own depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value = "ideal")]
    engine: Engine,
    /// Wire segment resistance (ohm).
    #[arg(long, default_value_t = 1.0)]
    r_seg: f64,
    /// Programming noise relative to G0.
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Unit conductance (S).
    #[arg(long, default_value_t = DEFAULT_G0)]
    g0: f64,
    /// Programming-noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    array_max: Option<usize>,
    /// Top-level split index.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dac_bits: Option<u32>,
    #[arg(long)]
    adc_bits: Option<u32>,
    /// One normalization scale for every array.
    #[arg(long)]
    global_normalization: bool,
    /// Drivers at the far end of the bitlines.
    #[arg(long)]
    driver_far: bool,
    /// Sense amplifiers at the near end of the wordlines.
    #[arg(long)]
    sense_near: bool,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration (TOML).
    config: PathBuf,
    /// Overrides `out_dir` from the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Skip SVG output.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(short, long, default_value_t = 512)]
    n: usize,
    /// Calibration TOML (default: the shipped calibration).
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long)]
    array_max: Option<usize>,
    /// Also write the OPA/DAC/ADC/RRAM breakdown as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the stacked-bar chart as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Records CSV written by `sweep`.
    records: PathBuf,
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Cost(a) => cost(a),
        Command::Plot(a) => plot_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_)) {
        4
    } else {
        2
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let m = generate(&a.system.spec())?;
    write_matrix_csv(&m, fs::File::create(&a.out)?)?;
    if let Some(p) = &a.rhs_out {
        write_vector_csv(&gen_rhs(a.system.n, a.system.rhs_seed)?, fs::File::create(p)?)?;
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let m = match &a.matrix {
        Some(p) => load_matrix(p)?,
        None => generate(&a.system.spec())?,
    };
    let b = match &a.rhs {
        Some(p) => load_vector(p)?,
        None => gen_rhs(m.rows(), a.system.rhs_seed)?,
    };
    let cfg = SolveConfig {
        map: MapConfig {
            g0: a.g0,
            sigma_rel: a.sigma,
            dac_bits: a.dac_bits,
            adc_bits: a.adc_bits,
            global_normalization: a.global_normalization,
            ..MapConfig::default()
        },
        circuit: CircuitConfig {
            r_seg: a.r_seg,
            engine: a.engine,
            driver_side: if a.driver_far { LineEnd::Far } else { LineEnd::Near },
            sense_side: if a.sense_near { LineEnd::Near } else { LineEnd::Far },
            ..CircuitConfig::default()
        },
        array_max: a.array_max,
        k: a.k,
        seed: a.seed,
    };
    let depth = a.depth.unwrap_or(a.solver.depth());
    let mut report = solve_multi_stage(&m, &b, depth, &cfg)?;
    if let Ok(x) = solve_dense(&m, &b) {
        report.attach_reference(&x)?;
    }
    write_out(a.out.as_deref(), &report.to_json()?)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)?;
    let mut cfg = SweepConfig::from_toml(&text)?;
    if let Some(dir) = a.out_dir {
        cfg.out_dir = dir;
    }
    let records = bench::run_sweep(&cfg)?;
    let files = bench::emit(&cfg, &records, EmitOptions { plots: !a.no_plots })?;
    for s in bench::aggregate(&records) {
        eprintln!(
            "{:<9} n={:<4} {:<10} mean={:.4e} std={:.4e} median={:.4e} ok={} failed={}",
            s.matrix.as_str(),
            s.size,
            s.solver.as_str(),
            s.mean,
            s.std,
            s.median,
            s.count,
            s.failed
        );
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn cost(a: CostArgs) -> Result<()> {
    let cfg = match &a.calibration {
        Some(p) => CostConfig::from_toml(&fs::read_to_string(p)?)?,
        None => CostConfig::calibrated(),
    };
    let reports = cost_reports(a.n, a.array_max, &cfg);
    if let Some(p) = &a.csv {
        fs::write(p, to_csv(&reports))?;
    }
    if let Some(p) = &a.svg {
        fs::write(p, plot::cost_bars(&reports))?;
    }
    for kind in [SolverKind::OneStage, SolverKind::TwoStage] {
        let area = savings(&reports, kind, |r| r.area_mm2.total).unwrap_or(f64::NAN);
        let power = savings(&reports, kind, |r| r.power_w.total).unwrap_or(f64::NAN);
        eprintln!("{kind}: area saving {:.2}%, power saving {:.2}%", 100.0 * area, 100.0 * power);
    }
    let json = serde_json::to_string_pretty(&reports).map_err(|e| Error::Parse(e.to_string()))?;
    write_out(None, &json)
}

fn plot_cmd(a: PlotArgs) -> Result<()> {
    let records = output::load_records(&a.records)?;
    let stats = bench::aggregate(&records);
    fs::create_dir_all(&a.out_dir)?;
    let mut kinds: Vec<MatrixKind> = stats.iter().map(|s| s.matrix).collect();
    kinds.dedup();
    for kind in kinds {
        let path = a.out_dir.join(format!("error_vs_size_{}.svg", kind.as_str()));
        fs::write(&path, plot::error_vs_size(&stats, kind))?;
        println!("{}", path.display());
    }
    Ok(())
}

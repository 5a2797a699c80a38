//! Command-line surface for write-pulse schedule shaping.
//!
//! Subcommands:
//! - `optimize`: shape one word's schedule, emit a JSON report (or a pulse
//!   CSV with `--format csv`)
//! - `sweep`: optimize across an energy range, emit CSV rows for plotting
//! - `simulate`: Monte Carlo check of a saved schedule on random words or
//!   a raw grayscale image
//! - `oracle`: grid-search cross-check of the optimizer on small words
//!
//! Exit codes: 0 on success (optimizer converged where relevant), 2 when
//! the optimizer stopped without converging (the report is still written),
//! 1 on invalid input or I/O failure, each with a diagnostic on stderr.

mod output;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mramwf::duration_opt::Budget;
use mramwf::iwf::{self, IwfConfig, StartCurrents};
use mramwf::model::{psnr, DeviceParams};
use mramwf::oracle::grid_search_word;
use mramwf::simulate::{simulate_image, simulate_words, ProbabilitySource, SimConfig};
use output::{pulse_docs, OracleDoc, ScheduleDoc};
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::exit;

const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mramwf",
    version,
    about = "Per-bit MRAM write-pulse schedules: optimize, sweep, simulate, cross-check"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shape currents and durations for one word under an energy budget.
    Optimize(OptimizeArgs),
    /// Optimize across an energy range and emit one CSV row per budget.
    Sweep(SweepArgs),
    /// Monte Carlo fidelity check of a saved schedule.
    Simulate(SimulateArgs),
    /// Compare the optimizer against exhaustive grid search (B <= 3).
    Oracle(OracleArgs),
}

#[derive(Args)]
struct DeviceArgs {
    /// Thermal stability factor.
    #[arg(long, default_value_t = 60.0)]
    delta: f64,
    /// Current floor margin: normalized currents stay at or above 1 + epsilon.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Critical current in amperes; with --relaxation-time, adds a
    /// physical-unit block to the report.
    #[arg(long, requires = "relaxation_time")]
    critical_current: Option<f64>,
    /// Relaxation time in seconds.
    #[arg(long, requires = "critical_current")]
    relaxation_time: Option<f64>,
}

impl DeviceArgs {
    fn device(&self) -> Result<DeviceParams, Box<dyn Error>> {
        let dev = match (self.critical_current, self.relaxation_time) {
            (Some(i_c), Some(t_c)) => DeviceParams::with_physical(self.delta, i_c, t_c)?,
            _ => DeviceParams::new(self.delta)?,
        };
        Ok(dev)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Relative convergence tolerance on both the MSE and the iterate.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Outer-iteration cap.
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Word width in bits.
    #[arg(long)]
    bits: usize,
    /// Energy budget in normalized units.
    #[arg(long)]
    energy: f64,
    /// Latency cap: no pulse may last longer than this.
    #[arg(long)]
    latency: Option<f64>,
    /// Starting currents: one value for every bit, or B comma-separated values.
    #[arg(long, default_value = "2.0")]
    start_current: String,
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json: full report; csv: pulse table only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SweepArgs {
    /// Word width in bits.
    #[arg(long)]
    bits: usize,
    /// First energy budget.
    #[arg(long)]
    energy_start: f64,
    /// Last energy budget (inclusive).
    #[arg(long)]
    energy_end: f64,
    /// Budget increment.
    #[arg(long)]
    energy_step: f64,
    /// Latency cap applied at every budget.
    #[arg(long)]
    latency: Option<f64>,
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Schedule JSON written by `optimize --format json`.
    #[arg(long)]
    schedule: PathBuf,
    /// Words (or image passes) to write.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Stream seed; identical seeds reproduce identical statistics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip-probability source: the exact failure law or the clamped proxy.
    #[arg(long, value_enum, default_value_t = SourceArg::Exact)]
    source: SourceArg,
    /// Raw headerless 8-bit grayscale payload (needs an 8-bit schedule).
    #[arg(long, requires = "image_width", requires = "image_height")]
    image: Option<PathBuf>,
    /// Image width in pixels.
    #[arg(long, requires = "image")]
    image_width: Option<usize>,
    /// Image height in pixels.
    #[arg(long, requires = "image")]
    image_height: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Exact,
    Proxy,
}

impl From<SourceArg> for ProbabilitySource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Exact => ProbabilitySource::Exact,
            SourceArg::Proxy => ProbabilitySource::Proxy,
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    /// Word width in bits (at most 3; grid cost grows as resolution^(2B-1)).
    #[arg(long)]
    bits: usize,
    /// Energy budget in normalized units.
    #[arg(long)]
    energy: f64,
    /// Grid points per axis per refinement pass.
    #[arg(long, default_value_t = 31)]
    resolution: usize,
    #[command(flatten)]
    device: DeviceArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    match run(cli) {
        Ok(code) => exit(code as i32),
        Err(e) => {
            eprintln!("error: {e}");
            exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<u8, Box<dyn Error>> {
    match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn parse_start_currents(text: &str, bits: usize) -> Result<StartCurrents, Box<dyn Error>> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| format!("bad --start-current value: {e}"))?;
    match values.len() {
        1 => Ok(StartCurrents::Uniform(values[0])),
        n if n == bits => Ok(StartCurrents::PerBit(values)),
        n => Err(format!("--start-current needs 1 or {bits} values, got {n}").into()),
    }
}

fn budget_from(energy: f64, latency: Option<f64>, epsilon: f64) -> Result<Budget, Box<dyn Error>> {
    let mut budget = Budget::new(energy)?.with_epsilon(epsilon)?;
    if let Some(cap) = latency {
        budget = budget.with_latency_cap(cap)?;
    }
    Ok(budget)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Box<dyn Error>> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| format!("cannot write {}: {e}", p.display()).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_optimize(args: OptimizeArgs) -> Result<u8, Box<dyn Error>> {
    let dev = args.device.device()?;
    let budget = budget_from(args.energy, args.latency, args.device.epsilon)?;
    let cfg = IwfConfig {
        start_currents: parse_start_currents(&args.start_current, args.bits)?,
        rel_mse_tol: args.solver.tol,
        iterate_tol: args.solver.tol,
        max_iters: args.solver.max_iters,
        use_latency_cap: true,
    };
    let report = iwf::optimize_word(args.bits, &budget, &dev, &cfg)?;
    let doc = ScheduleDoc::from_report(args.bits, &budget, &dev, &report);
    let text = match args.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.pulse_csv(),
    };
    write_output(args.out.as_deref(), &text)?;
    if report.converged {
        Ok(0)
    } else {
        eprintln!(
            "optimizer stopped after {} sweeps without meeting tolerances",
            report.iterations
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Box<dyn Error>> {
    if !(args.energy_step > 0.0) {
        return Err("--energy-step must be positive".into());
    }
    if args.energy_end < args.energy_start {
        return Err("--energy-end must not precede --energy-start".into());
    }
    let dev = args.device.device()?;
    let cfg = IwfConfig {
        rel_mse_tol: args.solver.tol,
        iterate_tol: args.solver.tol,
        max_iters: args.solver.max_iters,
        ..IwfConfig::default()
    };
    let rows = ((args.energy_end - args.energy_start) / args.energy_step + 1e-9).floor() as usize;
    let mut csv = String::from(
        "energy,mse_uniform,mse_opt,psnr_uniform,psnr_opt,gamma,iterations\n",
    );
    let mut all_converged = true;
    for k in 0..=rows {
        let energy = args.energy_start + k as f64 * args.energy_step;
        let budget = budget_from(energy, args.latency, args.device.epsilon)?;
        let report = iwf::optimize_word(args.bits, &budget, &dev, &cfg)?;
        if !report.converged {
            all_converged = false;
            eprintln!("budget {energy}: no convergence in {} sweeps", report.iterations);
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            energy,
            report.uniform_mse,
            report.final_mse,
            psnr(report.uniform_mse, args.bits),
            psnr(report.final_mse, args.bits),
            report.reduction_ratio,
            report.iterations
        ));
    }
    write_output(args.out.as_deref(), &csv)?;
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Box<dyn Error>> {
    let text = fs::read_to_string(&args.schedule)
        .map_err(|e| format!("cannot read {}: {e}", args.schedule.display()))?;
    let doc: ScheduleDoc = serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a schedule document: {e}", args.schedule.display()))?;
    let schedule = doc.to_schedule()?;
    let dev = DeviceParams::new(doc.delta)?;
    let cfg = SimConfig::new(args.samples, args.seed)?.with_source(args.source.into());
    let stats = match &args.image {
        Some(path) => {
            let image = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let (w, h) = (args.image_width.unwrap(), args.image_height.unwrap());
            if w * h != image.len() {
                return Err(format!(
                    "{}x{h} pixels do not match file size {} bytes",
                    w,
                    image.len()
                )
                .into());
            }
            simulate_image(&schedule, &dev, &image, &cfg)?
        }
        None => simulate_words(&schedule, &dev, &cfg)?,
    };
    let mut text = serde_json::to_string_pretty(&stats).expect("stats serialize");
    text.push('\n');
    write_output(args.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8, Box<dyn Error>> {
    let dev = args.device.device()?;
    let budget = budget_from(args.energy, None, args.device.epsilon)?;
    let grid = grid_search_word(args.bits, &budget, &dev, args.resolution)?;
    let report = iwf::optimize_word(args.bits, &budget, &dev, &IwfConfig::default())?;
    let doc = OracleDoc {
        bits: args.bits,
        energy_budget: args.energy,
        resolution: args.resolution,
        oracle_mse: grid.mse,
        optimizer_mse: report.final_mse,
        relative_gap: (grid.mse - report.final_mse) / report.final_mse,
        resolution_warning: grid.resolution_warning,
        oracle_pulses: pulse_docs(&grid.schedule),
        optimizer_pulses: pulse_docs(&report.schedule),
    };
    write_output(args.out.as_deref(), &doc.to_json())?;
    if report.converged {
        Ok(0)
    } else {
        eprintln!(
            "optimizer stopped after {} sweeps without meeting tolerances",
            report.iterations
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

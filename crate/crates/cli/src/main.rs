//! `upea`: run the phase-estimation and counting experiments and write their
//! data series as CSV (plus JSON metadata).

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use upea_core::harness::{
    self, run_calibration, run_sweep, run_verify_circuit, Experiment, Preset, RSpec, SweepConfig,
    VerifyConfig,
};
use upea_core::{Error, RngSeed, ThetaMode};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "upea", version, about = "Unbiased phase estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bias and MAE of plain phase estimation over the phase grid
    PeaBiasMae(SweepArgs),
    /// Bias and MAE of shifted (unbiased) phase estimation over the phase grid
    UpeaBiasMae(SweepArgs),
    /// Bias and MAE of the R-run maximum-likelihood estimate over the phase grid
    MleBiasMae(SweepArgs),
    /// MLE error pooled over the phase grid, one row per R
    MaeVsR(SweepArgs),
    /// Uncorrected counting estimates over the m grid
    QcaBiasMae(SweepArgs),
    /// Bias-corrected counting estimates over the m grid
    UqcaCorrected(SweepArgs),
    /// Simulate the counting bias b at m = 0 and write calibration records
    Calibrate(SweepArgs),
    /// Check the statevector circuits against the analytic distributions
    VerifyCircuit(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Start from a figure preset (fig3 .. fig8); other flags override it
    #[arg(long)]
    preset: Option<Preset>,
    /// Register size T = 2^t
    #[arg(long = "T")]
    size: Option<u64>,
    /// Repetitions: a count ("3") or an inclusive range ("1..16")
    #[arg(long = "R")]
    repetitions: Option<RSpec>,
    /// Grid points over the phase circle or over m in [0, 1]
    #[arg(long)]
    grid: Option<usize>,
    /// Trials per grid point
    #[arg(long)]
    samples: Option<u64>,
    /// full, period or fixed:<x>
    #[arg(long)]
    theta_mode: Option<ThetaMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output (JSON metadata goes beside it); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Calibration record(s) from `upea calibrate`
    #[arg(long)]
    calibration: Option<PathBuf>,
}

impl SweepArgs {
    fn into_config(self, experiment: Experiment) -> SweepConfig {
        let mut c = match self.preset {
            Some(p) => p.config(experiment),
            None => SweepConfig::new(experiment),
        };
        if let Some(v) = self.size {
            c.size = v;
        }
        if let Some(v) = self.repetitions {
            c.repetitions = v;
        }
        if let Some(v) = self.grid {
            c.grid_points = v;
        }
        if let Some(v) = self.samples {
            c.n_samples = v;
        }
        if let Some(v) = self.theta_mode {
            c.theta_mode = v;
        }
        if let Some(v) = self.seed {
            c.base_seed = RngSeed(v);
        }
        c.output_path = self.out;
        c.calibration_path = self.calibration;
        c
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest register size for the PEA checks (2..=64)
    #[arg(long = "T", default_value_t = 64)]
    size: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the check results as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn run(command: Command) -> Result<u8, Error> {
    let (experiment, args) = match command {
        Command::VerifyCircuit(args) => return verify(args),
        Command::PeaBiasMae(a) => (Experiment::PeaBiasMae, a),
        Command::UpeaBiasMae(a) => (Experiment::UpeaBiasMae, a),
        Command::MleBiasMae(a) => (Experiment::MleBiasMae, a),
        Command::MaeVsR(a) => (Experiment::MaeVsR, a),
        Command::QcaBiasMae(a) => (Experiment::QcaBiasMae, a),
        Command::UqcaCorrected(a) => (Experiment::UqcaCorrected, a),
        Command::Calibrate(a) => (Experiment::Calibrate, a),
    };
    let config = args.into_config(experiment);

    if experiment == Experiment::Calibrate {
        let records = run_calibration(&config)?;
        for r in &records {
            eprintln!("T={} R={}: b = {:.6} ± {:.6} ({} samples)", r.size, r.repetitions, r.b, r.stderr_b, r.n_samples);
        }
        match &config.output_path {
            Some(path) => harness::write_calibrations(&records, path)?,
            None => println!("{}", harness::calibrations_json(&records)?),
        }
        return Ok(0);
    }

    let report = run_sweep(&config)?;
    match &config.output_path {
        Some(path) => {
            let meta = harness::write_report(&report, path)?;
            eprintln!("wrote {} and {}", path.display(), meta.display());
        }
        None => harness::write_csv(&report.entries, io::stdout().lock())?,
    }
    for c in &report.metadata.calibration {
        eprintln!("calibration T={} R={}: b = {:.6} ± {:.6}", c.size, c.repetitions, c.b, c.stderr_b);
    }
    eprintln!("{} rows in {:.2} s", report.entries.len(), report.metadata.wall_time);
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<u8, Error> {
    if !args.size.is_power_of_two() || !(2..=64).contains(&args.size) {
        return Err(Error::InvalidParams(format!(
            "--T must be a power of two in 2..=64 for verify-circuit, got {}",
            args.size
        )));
    }
    let mut config = VerifyConfig {
        max_pea_t: args.size.trailing_zeros(),
        ..VerifyConfig::default()
    };
    config.max_grover_t = config.max_grover_t.min(config.max_pea_t);
    if let Some(s) = args.seed {
        config.seed = RngSeed(s);
    }
    let report = run_verify_circuit(&config)?;
    let mut out = io::stdout().lock();
    for c in &report.checks {
        let verdict = if c.passed { "ok" } else { "FAIL" };
        writeln!(out, "{:<18} {:>5} cases  max deviation {:.3e}  {verdict}", c.name, c.cases, c.max_deviation)?;
    }
    if let Some(path) = &args.out {
        harness::report::write_json(&report, path)?;
    }
    if report.passed() {
        writeln!(out, "all checks within {:e}", report.tolerance)?;
        Ok(0)
    } else {
        writeln!(out, "verification failed (tolerance {:e})", report.tolerance)?;
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

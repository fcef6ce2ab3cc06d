use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use subterra::experiments::{run, ExperimentConfig, ExperimentKind};
use subterra::phy::toa_table_csv;
use subterra::Error;

/// Worker-count override for the thread pool.
const WORKERS_ENV: &str = "SUBTERRA_WORKERS";

const EXIT_CONFIG: u8 = 2;
const EXIT_CALIBRATION: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "subterra",
    version,
    about = "Underground LoRaWAN + WET simulator and lifetime optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and report its lifetime.
    Run(Common),
    /// Success probability and EPP per soil condition and SF.
    Fig3(Common),
    /// Lifetime against WET duration per SF.
    Fig4(Common),
    /// Optimized lifetime against network size.
    Fig5(Common),
    /// Optimal WET duration per SF and the best SF.
    Optimize(Common),
    /// Fit the energy profile overhead to a lifetime anchor.
    Calibrate(Common),
    /// Computed against published time on air per SF.
    ToaTable(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration applied over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for geometry and traffic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in profile (default, calibrated, tx_only) or a profile file.
    #[arg(long)]
    energy_profile: Option<String>,
    /// computed | paper_table
    #[arg(long)]
    toa_source: Option<String>,
    /// aggregate | strongest
    #[arg(long)]
    interference: Option<String>,
}

impl Common {
    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
        let mut c = ExperimentConfig::preset(kind);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            c.apply_text(&text)?;
        }
        let flags = [
            ("seed.master", self.seed.map(|v| v.to_string())),
            ("run.trials", self.trials.map(|v| v.to_string())),
            ("energy.profile", self.energy_profile.clone()),
            ("lora.toa_source", self.toa_source.clone()),
            ("scenario.interference", self.interference.clone()),
            ("run.output", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, &v)?;
            }
        }
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CalibrationInfeasible { .. } => EXIT_CALIBRATION,
        Error::Config(_) | Error::InvalidScenario(_) | Error::OutOfRange { .. } | Error::Domain(_) => EXIT_CONFIG,
        _ => 1,
    }
}

fn emit(out: Option<&str>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {path}")),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn execute(command: &Command) -> Result<u8, Error> {
    let (kind, common) = match command {
        Command::Run(c) => (ExperimentKind::Single, c),
        Command::Fig3(c) => (ExperimentKind::Fig3, c),
        Command::Fig4(c) => (ExperimentKind::Fig4, c),
        Command::Fig5(c) => (ExperimentKind::Fig5, c),
        Command::Optimize(c) => (ExperimentKind::Optimize, c),
        Command::Calibrate(c) => (ExperimentKind::Calibrate, c),
        Command::ToaTable(c) => {
            let config = c.resolve(ExperimentKind::Single)?;
            let table = toa_table_csv(&config.scenario.lora)?;
            emit(config.output.as_deref(), &table).map_err(|e| Error::Io(e.to_string()))?;
            return Ok(0);
        }
    };
    let config = common.resolve(kind)?;
    let output = run(&config)?;
    emit(config.output.as_deref(), &output.body).map_err(|e| Error::Io(e.to_string()))?;
    if config.output.is_some() {
        print!("{}", output.summary);
    } else {
        eprint!("{}", output.summary);
    }
    for r in &output.rejects {
        eprintln!("rejected: {r}");
    }
    Ok(if output.is_partial() { EXIT_PARTIAL } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("thread pool is configured once");
            }
            _ => {
                eprintln!("error: {WORKERS_ENV} must be a positive integer, got '{v}'");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    }
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

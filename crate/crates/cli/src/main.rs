use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irsfso_cli::config::{ExperimentConfig, Settings};
use irsfso_cli::{run, AppError, ResultTable, WORKERS_ENV};

/// Simulator for IRS-assisted free-space optical links.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Power density of the reflected wave along a horizontal line.
    FieldMap(Common),
    /// Fraction of transmit power captured by the lens versus IRS length.
    PowerSweep(Common),
    /// Outage probability versus transmit SNR: IRS designs and relay.
    Outage(Common),
    /// Delay dispersion of anomalous reflection.
    Delay(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set irs.length=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `mc.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

fn load(common: &Common) -> Result<ExperimentConfig, AppError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut settings = Settings::parse(&text)?;
    for o in &common.overrides {
        settings.apply_override(o)?;
    }
    if let Some(seed) = common.seed {
        settings.set("mc.seed", &seed.to_string())?;
    }
    Ok(ExperimentConfig::from_settings(settings)?)
}

fn write(table: &ResultTable, out: Option<&PathBuf>) -> Result<(), AppError> {
    match out {
        Some(path) => table.write_csv(io::BufWriter::new(fs::File::create(path)?))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| AppError::Invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    Ok(f())
}

fn execute(cli: Cli) -> Result<(), AppError> {
    let (common, runner): (&Common, fn(&ExperimentConfig) -> Result<ResultTable, AppError>) = match &cli.command {
        Command::FieldMap(c) => (c, run::run_field_map),
        Command::PowerSweep(c) => (c, run::run_power_sweep),
        Command::Outage(c) => (c, run::run_outage),
        Command::Delay(c) => (c, run::run_delay),
    };
    let cfg = load(common)?;
    let table = with_workers(common.workers, || runner(&cfg))??;
    write(&table, common.out.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irsfso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

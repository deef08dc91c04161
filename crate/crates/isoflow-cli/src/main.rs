//! `isoflow` command-line front end.
//!
//! Exit status: 0 on success, 2 for usage or config errors, 3 for numerical
//! failures (with a diagnostic JSON on stderr and in the report file).

mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use args::*;

#[derive(Parser)]
#[command(name = "isoflow", version, about = "Area-constrained geodesics and the traveling waves they induce")]
struct Cli {
    /// Seed for every random choice (perturbation draws).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-well area-constrained geodesic for a quadratic well at the origin.
    Onewell(OnewellArgs),
    /// Two-well constrained minimizer (heteroclinic with prescribed momentum).
    Twowell(TwowellArgs),
    /// Traveling-wave profile, speed fit and spectra from a two-well curve.
    Wave(WaveArgs),
    /// Regime table of the well linearization over a speed sweep.
    Spectrum(SpectrumArgs),
    /// Series coefficients of the calibration potential at an analytic well.
    Series(SeriesArgs),
    /// Energies of the circle-accumulation sequence for `F = |p|^q`.
    Nonexist(NonexistArgs),
    /// Plot-ready CSV from an artifact written by another subcommand.
    Plotdata(PlotdataArgs),
    /// Run a subcommand described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical { kind: &'static str, message: String },
}

impl From<isoflow::Error> for CliError {
    fn from(e: isoflow::Error) -> Self {
        use isoflow::Error as E;
        match e {
            E::Config(_) | E::Precondition(_) | E::EmptyCurve(_) | E::Io(_) | E::Csv(_) => CliError::Usage(e.to_string()),
            E::Domain(_) | E::Degenerate(_) | E::Singular(_) | E::CertificateInvalid(_) | E::Grid(_) | E::NotConverged(_) => {
                CliError::Numerical { kind: e.kind(), message: e.to_string() }
            }
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("ISOFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("ISOFLOW_THREADS must be a positive integer, got '{text}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn from_config<T: DeserializeOwned>(name: &str, v: serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("run config args for {name}: {e}")))
}

fn run_config(path: &Path, cli_seed: u64) -> Result<(Command, u64), CliError> {
    let text = read_text(path)?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("run config: {e}")))?;
    let seed = cfg.seed.unwrap_or(cli_seed);
    let name = cfg.subcommand.as_str();
    let args = cfg.args;
    let cmd = match name {
        "onewell" => Command::Onewell(from_config(name, args)?),
        "twowell" => Command::Twowell(from_config(name, args)?),
        "wave" => Command::Wave(from_config(name, args)?),
        "spectrum" => Command::Spectrum(from_config(name, args)?),
        "series" => Command::Series(from_config(name, args)?),
        "nonexist" => Command::Nonexist(from_config(name, args)?),
        "plotdata" => Command::Plotdata(from_config(name, args)?),
        other => return Err(CliError::Usage(format!("unknown subcommand '{other}' in run config"))),
    };
    Ok((cmd, seed))
}

fn report_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Onewell(a) => a.report.as_deref(),
        Command::Twowell(a) => a.report.as_deref(),
        Command::Wave(a) => a.report.as_deref(),
        Command::Spectrum(a) => a.report.as_deref(),
        Command::Series(a) => a.report.as_deref(),
        Command::Nonexist(a) => a.report.as_deref(),
        Command::Plotdata(_) | Command::Run { .. } => None,
    }
}

fn dispatch(cmd: &Command, seed: u64) -> Result<commands::Done, CliError> {
    match cmd {
        Command::Onewell(a) => commands::onewell(a, seed),
        Command::Twowell(a) => commands::twowell(a, seed),
        Command::Wave(a) => commands::wave(a, seed),
        Command::Spectrum(a) => commands::spectrum(a, seed),
        Command::Series(a) => commands::series(a, seed),
        Command::Nonexist(a) => commands::nonexist(a, seed),
        Command::Plotdata(a) => commands::plotdata(a, seed),
        Command::Run { .. } => Err(CliError::Usage("run configs cannot nest".into())),
    }
}

fn diagnostic(kind: &str, message: &str, report: Option<&Path>) {
    let value = json!({ "status": "numerical-failure", "kind": kind, "message": message });
    if let Some(p) = report {
        // the report may already hold partial results; a failed solve replaces it
        let _ = output::write_json(p, &value);
    }
    if let Ok(text) = output::to_json(&value) {
        eprint!("{text}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(CliError::Usage(m)) = configure_threads() {
        eprintln!("error: {m}");
        return ExitCode::from(2);
    }
    let (cmd, seed) = match cli.command {
        Command::Run { config } => match run_config(&config, cli.seed) {
            Ok(x) => x,
            Err(e) => {
                eprintln!("error: {}", describe(&e));
                return ExitCode::from(2);
            }
        },
        other => (other, cli.seed),
    };
    match dispatch(&cmd, seed) {
        Ok(commands::Done { failure: None }) => ExitCode::SUCCESS,
        Ok(commands::Done { failure: Some(m) }) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical { kind, message }) => {
            diagnostic(kind, &message, report_path(&cmd));
            ExitCode::from(3)
        }
    }
}

fn describe(e: &CliError) -> String {
    match e {
        CliError::Usage(m) => m.clone(),
        CliError::Numerical { message, .. } => message.clone(),
    }
}

//! `holeburn`: run slow-light, storage and efficiency scenarios and write CSV/JSON data.

mod commands;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{PresetRun, RunOptions, PRESETS};
use scenario::{budget_from_tol, Scenario};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "holeburn", version, about = "Slow light, storage and retrieval in a spectral hole")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Relative quadrature tolerance for the retrieval integrals.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the input pulse through the slab with the exact and quadratic susceptibilities.
    Transmit {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Store and retrieve the pulse; writes the restored profile and its sidecar.
    Store {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieval efficiency over the scenario's opacity grid.
    SweepEfficiency {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Reproduce a figure's data set.
    Preset {
        #[arg(value_parser = PRESETS)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Validation(Vec<String>),
    Run(holeburn::Error),
    /// Some sweep points failed; the rest were written.
    Partial(String),
}

impl From<holeburn::Error> for Failure {
    fn from(e: holeburn::Error) -> Self {
        Failure::Run(e)
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let s = Scenario::load(path).map_err(Failure::Validation)?;
    s.validate().map_err(Failure::Validation)?;
    Ok(s)
}

fn run_transmit(s: &Scenario, out: &Path) -> Result<(), Failure> {
    let r = s.validate().map_err(Failure::Validation)?;
    Ok(commands::transmit(s, r, out)?)
}

fn run_store(s: &Scenario, opts: &RunOptions, out: &Path) -> Result<(), Failure> {
    let r = s.validate().map_err(Failure::Validation)?;
    Ok(commands::store(s, r, opts, out)?)
}

fn run_sweep(s: &Scenario, opts: &RunOptions, out: &Path) -> Result<(), Failure> {
    let r = s.validate().map_err(Failure::Validation)?;
    let failed = commands::sweep_efficiency(s, r.problem.profile, opts, out)?;
    if failed > 0 {
        return Err(Failure::Partial(format!(
            "{failed} of {} sweep points failed",
            s.sweep_sqrt_alpha0_l.len()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let budget = match cli.tol {
        Some(t) => Some(budget_from_tol(t).map_err(|e| Failure::Validation(vec![format!("--tol: {e}")]))?),
        None => None,
    };
    let opts = RunOptions {
        workers: cli.workers,
        budget,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .map_err(|e| Failure::Validation(vec![format!("--workers: {e}")]))?;
    match cli.command {
        Command::Validate { scenario } => {
            load(&scenario)?;
            println!("{}: valid", scenario.display());
            Ok(())
        }
        Command::Transmit { scenario, out } => run_transmit(&load(&scenario)?, &out),
        Command::Store { scenario, out } => run_store(&load(&scenario)?, &opts, &out),
        Command::SweepEfficiency { scenario, out } => run_sweep(&load(&scenario)?, &opts, &out),
        Command::Preset { name, out } => {
            let runs = commands::preset(&name).expect("preset names are checked by the parser");
            for (sub, run) in runs {
                let dir = out.join(&name).join(sub);
                let s = match &run {
                    PresetRun::Transmit(s) | PresetRun::Store(s) | PresetRun::Sweep(s) => s,
                };
                std::fs::create_dir_all(&dir).map_err(holeburn::Error::from)?;
                let text = serde_json::to_vec_pretty(s).expect("scenarios serialize");
                commands::write_atomic(&dir.join("scenario.json"), &text)?;
                match &run {
                    PresetRun::Transmit(s) => run_transmit(s, &dir)?,
                    PresetRun::Store(s) => run_store(s, &opts, &dir)?,
                    PresetRun::Sweep(s) => run_sweep(s, &opts, &dir)?,
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msgs)) => {
            eprintln!("invalid scenario:");
            for m in msgs {
                eprintln!("  - {m}");
            }
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Partial(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                holeburn::Error::Io(_) => EXIT_IO,
                holeburn::Error::Unsupported(_) => EXIT_VALIDATION,
                ref e if e.is_validation() => EXIT_VALIDATION,
                _ => EXIT_NUMERICAL,
            };
            ExitCode::from(code)
        }
    }
}

//! `antitree`: spectral diagnostics of metric antitrees from a JSON config.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 verification failed,
//! 3 internal consistency error. Inconclusive verdicts are data, not
//! errors. The worker count comes from `ANTITREE_THREADS`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use antitree_core::report::{run, Analysis, RunConfig};
use clap::{Args, Parser, Subcommand};

const THREADS_VAR: &str = "ANTITREE_THREADS";

#[derive(Parser)]
#[command(
    name = "antitree",
    version,
    about = "Spectral diagnostics of radially symmetric metric antitrees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the diagnostics report (JSON).
    Classify(Io),
    /// Write the decomposed spectrum (CSV).
    Spectrum(Io),
    /// Compare the decomposition with the finite-element reference (CSV);
    /// exits 2 on mismatch.
    Verify(Io),
    /// Write counting-function ratios (CSV).
    Weyl(Io),
    /// Write bottom-of-spectrum estimates and sandwich bounds (CSV).
    Gap(Io),
    /// Run every analysis listed in the config.
    Run(Io),
}

#[derive(Args)]
struct Io {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    RunConfig::from_json(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let (io, analyses) = match &cli.command {
        Command::Classify(io) => (io, Some(Analysis::Classify)),
        Command::Spectrum(io) => (io, Some(Analysis::Spectrum)),
        Command::Verify(io) => (io, Some(Analysis::Verify)),
        Command::Weyl(io) => (io, Some(Analysis::Weyl)),
        Command::Gap(io) => (io, Some(Analysis::Gap)),
        Command::Run(io) => (io, None),
    };
    let config = match load(&io.config) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let list = analyses.map_or_else(|| config.analyses.clone(), |a| vec![a]);
    match run(&config, &list, &io.out) {
        Ok(outcome) => {
            for (a, path) in &outcome.written {
                println!("{}: wrote {}", a.name(), path.display());
            }
            match outcome.verify_pass {
                Some(true) => println!("verify: PASS"),
                Some(false) => println!("verify: FAIL"),
                None => {}
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

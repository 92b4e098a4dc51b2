//! `dnlslab` — experiment driver for the periodic dNLS laboratory.
//!
//! ```text
//!     dnlslab <simulate|smoothing|growth|verify|falsify> \
//!         [--config cfg.json] [--set key=value]...
//! ```
//!
//! Configuration is a flat dotted-key JSON object; `--set` overrides file
//! values. Runs are written atomically under `$DNLSLAB_OUT` (default
//! `./runs`) with a checksummed manifest. Exit codes: 0 success, 1 validation
//! error, 2 numerical abort or failed check.

mod commands;
mod config;
mod rundir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::Config;

#[derive(Parser)]
#[command(name = "dnlslab", version, about = "pseudospectral dNLS laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file with flat dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set stepper.dt=5e-4 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run directory name (defaults to the command name).
    #[arg(long)]
    name: Option<String>,
    /// Output root (defaults to $DNLSLAB_OUT, then ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the dNLS or gauge flow and persist the trajectory.
    Simulate(RunArgs),
    /// Grid-doubling nonlinear-smoothing experiment.
    Smoothing(RunArgs),
    /// Long-time Sobolev growth tracking with the frequency split.
    Growth(RunArgs),
    /// Identity and residual battery (exit 0 iff all checks pass).
    Verify(RunArgs),
    /// Inequality falsification trials.
    Falsify(RunArgs),
}

fn out_root(args: &RunArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os("DNLSLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn run(cmd_name: &str, args: &RunArgs, f: CommandFn) -> ExitCode {
    let cfg = match Config::load(args.config.as_deref(), &args.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dnlslab: {e}");
            return ExitCode::from(1);
        }
    };
    let root = out_root(args);
    let name = args.name.clone().unwrap_or_else(|| cmd_name.to_string());
    match f(&cfg, &root, &name) {
        Ok(Outcome::Success(path)) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Numerical(msg)) => {
            eprintln!("dnlslab: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            // config errors surface here through anyhow; IO errors too
            eprintln!("dnlslab: {e}");
            ExitCode::from(1)
        }
    }
}

type CommandFn = fn(&Config, &std::path::Path, &str) -> anyhow::Result<Outcome>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Simulate(a) => run("simulate", &a, commands::simulate),
        Command::Smoothing(a) => run("smoothing", &a, commands::smoothing),
        Command::Growth(a) => run("growth", &a, commands::growth),
        Command::Verify(a) => run("verify", &a, commands::verify),
        Command::Falsify(a) => run("falsify", &a, commands::falsify),
    }
}

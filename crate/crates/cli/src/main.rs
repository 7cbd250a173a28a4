//! qmlab: runs measurement-update scenarios from JSON files and writes
//! the requested analyses as CSV. Exit codes: 0 success, 1 invalid
//! scenario or parameters, 2 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod error;
mod runner;
mod scenario;
mod table;

use runner::RunOptions;

#[derive(Parser)]
#[command(name = "qmlab", version, about = "Sequential-measurement scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis a scenario file requests.
    Run(JobArgs),
    /// Run the parameter sweep a scenario file declares.
    Sweep(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Scenario file (JSON).
    file: PathBuf,
    /// Directory for the CSV outputs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario's linearity tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl JobArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out.clone(),
            seed: self.seed,
            tol: self.tol,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; they exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Run(args) => runner::run_scenario_file(&args.file, &args.options()),
        Command::Sweep(args) => runner::run_sweep_file(&args.file, &args.options()),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavefront::driver::{output_root_from_env, run_scenario_in, validate_scenario, OUTPUT_ROOT_VAR};

/// Front tracking for 1D balance laws with lattice-localized sources.
#[derive(Parser)]
#[command(name = "wavefront", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tracker and write logs, reports and (if requested) the sweep table.
    Run {
        scenario: PathBuf,
        /// Root for relative output directories.
        #[arg(long, env = OUTPUT_ROOT_VAR)]
        output_root: Option<PathBuf>,
    },
    /// Run only the refinement sweep.
    Sweep {
        scenario: PathBuf,
        #[arg(long, env = OUTPUT_ROOT_VAR)]
        output_root: Option<PathBuf>,
    },
    /// Parse the scenario and check the structural assumptions.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, output_root } => {
            run_scenario_in(&scenario, output_root.or_else(output_root_from_env).as_deref(), false)
        }
        Command::Sweep { scenario, output_root } => {
            run_scenario_in(&scenario, output_root.or_else(output_root_from_env).as_deref(), true)
        }
        Command::Validate { scenario } => validate_scenario(&scenario),
    };
    if outcome.code == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    ExitCode::from(outcome.code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ggkdv::io::{exit_code, run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "ggkdv", version, about = "Simulation and boundary control of coupled KdV systems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write CSV/JSON artifacts.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a scenario without running it.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run {
            scenario,
            output_dir,
            seed,
        } => run_scenario(&scenario, output_dir.as_deref(), seed).map(|(dir, out)| {
            println!("{}", out.summary);
            eprintln!("artifacts written to {}", dir.display());
        }),
        Cmd::Validate { scenario } => Scenario::from_file(&scenario).map(|s| println!("ok: {}", s.command.name())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

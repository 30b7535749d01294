//! Scenario runner: every experiment of the library as a reproducible
//! batch command. JSON config in, CSV/JSON artifacts plus a manifest out.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use exphase::scenario::{self, Command, ScenarioError};

#[derive(Parser, Debug)]
#[command(
    name = "exphase",
    about = "Exchange-phase measurement protocols, simulated end to end",
    version
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON scenario config; omitted means the command's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for internal scans (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let config = match &cli.config {
        None => None,
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => Some(text),
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
    };
    match scenario::run(cli.command, config.as_deref(), &cli.out, cli.seed) {
        Ok(report) => {
            println!(
                "{}: {} artifacts in {:.2} s",
                report.command,
                report.artifacts.len(),
                report.wall_time_s
            );
            for a in &report.artifacts {
                println!("  {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            if let ScenarioError::ConfigInvalid(_) = err {
                eprintln!("hint: compare your config keys against the command defaults");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

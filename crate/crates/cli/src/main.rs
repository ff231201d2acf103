use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use infohopf_cli::{parse_config, run, RunError, RunStatus};

/// Delay-induced Hopf bifurcation analysis of the two-information model.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Configuration file with one `key = value` per line.
    config: PathBuf,
    /// Directory for reports, trajectories and plots.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Also write SVG waveform and phase plots (simulate only).
    #[arg(long)]
    plot: bool,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_FILESYSTEM: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_FILESYSTEM);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    config.output_dir = args.output_dir;
    config.plot = args.plot;

    match run(&config) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            match outcome.status {
                RunStatus::Completed => ExitCode::SUCCESS,
                RunStatus::Diverged { time } => {
                    eprintln!("error: simulation diverged at t = {time}; report written");
                    ExitCode::from(EXIT_DIVERGED)
                }
            }
        }
        Err(e @ RunError::Io { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FILESYSTEM)
        }
        Err(e @ RunError::Simulation(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radtail::cli::{main_with, Command, EXIT_CONFIG};

/// Late-time tails of radial wave equations.
///
/// Exit codes: 0 success or pass, 1 configuration error, 2 numerical blowup,
/// 3 quadrature failure, 4 verification failed, 5 inconclusive.
/// RADTAIL_PRECISION (standard|extended) overrides `[evolve] precision`;
/// RADTAIL_THREADS sets the worker thread count.
#[derive(Parser)]
#[command(name = "radtail", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve the model and write one series per observation radius.
    Evolve { config: PathBuf },
    /// Evaluate a perturbative iterate at the configured points.
    Perturb { config: PathBuf },
    /// Print the closed-form tail prediction.
    Predict { config: PathBuf },
    /// Evolve, fit the tail and compare it with the prediction.
    Verify { config: PathBuf },
    /// Measure the residual left behind a free wave.
    Huygens { config: PathBuf },
}

fn main() -> ExitCode {
    // clap's own usage-error code would collide with the blowup code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var("RADTAIL_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("radtail: RADTAIL_THREADS = {v:?} is not a positive integer");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
    }
    let (cmd, path) = match cli.command {
        Cmd::Evolve { config } => (Command::Evolve, config),
        Cmd::Perturb { config } => (Command::Perturb, config),
        Cmd::Predict { config } => (Command::Predict, config),
        Cmd::Verify { config } => (Command::Verify, config),
        Cmd::Huygens { config } => (Command::Huygens, config),
    };
    ExitCode::from(main_with(cmd, &path) as u8)
}

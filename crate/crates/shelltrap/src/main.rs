use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shelltrap::config::parse_config;
use shelltrap::run::{run, Subcommand as Cmd};
use shelltrap::Error;

/// Shell-trap simulator: characterization, loading, resonance scans, noise
/// heating, and quantum-gas estimates from one declarative config file.
#[derive(Parser)]
#[command(name = "shelltrap", version, about)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (speed only, never results).
    #[arg(long)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Characterize the dressed trap at the configured (or swept) drive.
    Characterize,
    /// Sweep a drive parameter and characterize each grid point.
    Sweep,
    /// Simulate the rf loading sequence and dump ensemble snapshots.
    Load,
    /// Simulate a dipolar resonance scan of the vertical mode.
    Resonance,
    /// Hold the cloud under rf frequency noise and fit heating rates.
    Noise,
    /// Static quantum-gas estimates (chemical potential, T_c, 2D flags).
    Estimate,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (including unknown subcommands) are config-class
            // errors: exit 1. --help/--version print and exit 0.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to set thread count: {e}");
            return ExitCode::from(2);
        }
    }

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.ensemble.seed = seed;
    }

    let cmd = match cli.command {
        Command::Characterize => Cmd::Characterize,
        Command::Sweep => Cmd::Sweep,
        Command::Load => Cmd::Load,
        Command::Resonance => Cmd::Resonance,
        Command::Noise => Cmd::Noise,
        Command::Estimate => Cmd::Estimate,
    };
    match run(&cfg, cmd, &cli.out) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

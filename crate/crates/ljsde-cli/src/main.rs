mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::{CmdError, EXIT_CONFIG, EXIT_NUMERIC};
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulation and verification toolkit for Brownian particle systems with a
/// singular pairwise Lennard-Jones drift.
#[derive(Parser)]
#[command(name = "ljsde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (flat `key = value` with dotted sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed (`sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory (`out.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the run count (`runs`).
    #[arg(long)]
    runs: Option<u64>,
    /// Print the effective normalized configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the system and write trajectory/summary files.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write a trajectory file for every run, not just the first.
        #[arg(long)]
        save_trajectories: bool,
    },
    /// First-exit probability study over a ladder of thresholds.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run the inequality and consistency property suite.
    #[command(name = "verify-lemmas")]
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
        /// Reduced sample counts.
        #[arg(long)]
        quick: bool,
        /// Replace the attractive force cap H in the triple bound
        /// (diagnostic; small values force failures).
        #[arg(long)]
        h_override: Option<f64>,
    },
    /// Scan the drift-dominance expression and report its ceiling.
    #[command(name = "check-h")]
    CheckH {
        #[command(flatten)]
        common: Common,
    },
    /// Draw an initial configuration and certify its mean pair energy.
    #[command(name = "sample-init")]
    SampleInit {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common, required: bool) -> Result<Config, CmdError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CmdError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            Config::parse(&text)?
        }
        None if required => {
            return Err(CmdError::Config("--config is required".into()));
        }
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set("sim.seed", seed.to_string());
    }
    if let Some(runs) = common.runs {
        cfg.set("runs", runs.to_string());
    }
    if let Some(out) = &common.out {
        cfg.set("out.dir", out.display().to_string());
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<u8, CmdError> {
    let (common, run): (&Common, Box<dyn FnOnce(&Config) -> Result<u8, CmdError>>) =
        match &cli.command {
            Command::Simulate {
                common,
                save_trajectories,
            } => {
                let save = *save_trajectories;
                (common, Box::new(move |cfg| commands::cmd_simulate(cfg, save)))
            }
            Command::Sweep { common } => (common, Box::new(commands::cmd_sweep)),
            Command::VerifyLemmas {
                common,
                quick,
                h_override,
            } => {
                let (quick, h) = (*quick, *h_override);
                (
                    common,
                    Box::new(move |cfg| commands::cmd_verify(cfg, quick, h)),
                )
            }
            Command::CheckH { common } => (common, Box::new(commands::cmd_check_h)),
            Command::SampleInit { common } => (common, Box::new(commands::cmd_sample_init)),
        };

    let config_required = !matches!(cli.command, Command::VerifyLemmas { .. });
    let cfg = load_config(common, config_required)?;
    if common.print_config {
        print!("{}", cfg.render());
        return Ok(commands::EXIT_OK);
    }
    run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CmdError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CmdError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lk::{commands, CliError, Run, RunConfig, Status};

/// Truncated power-series solutions of the controlled Loewner-Kufarev
/// equation, with control and univalence certificates.
#[derive(Debug, Parser)]
#[command(name = "lk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the coefficients and certify univalence per grid time.
    Solve(Common),
    /// Check super-additivity of omega and the controlled inequalities.
    VerifyControl(Common),
    /// Print the quartic threshold alpha.
    Alpha,
    /// Sample images of circles |z| = r under f_t.
    Boundary {
        #[command(flatten)]
        common: Common,
        /// Times in [0, T], comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        times: Vec<f64>,
        /// Radii, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        radii: Vec<f64>,
        /// Sample radii beyond the certified radius.
        #[arg(long)]
        force: bool,
    },
    /// Residual of the integral equation and the stepper cross-check.
    Residual(Common),
}

fn load(common: &Common) -> Result<(Run, PathBuf), CliError> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let run = config.validate()?;
    let out = run.output_dir(common.out.as_deref());
    Ok((run, out))
}

fn dispatch(command: Command) -> Result<Status, CliError> {
    match command {
        Command::Alpha => Ok(commands::alpha()),
        Command::Solve(c) => {
            let (run, out) = load(&c)?;
            commands::solve(&run, &out)
        }
        Command::VerifyControl(c) => {
            let (run, out) = load(&c)?;
            commands::verify_control(&run, &out)
        }
        Command::Residual(c) => {
            let (run, out) = load(&c)?;
            commands::residual(&run, &out)
        }
        Command::Boundary {
            common,
            times,
            radii,
            force,
        } => {
            let (run, out) = load(&common)?;
            commands::boundary(&run, &out, &times, &radii, force)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("lk: {e}");
            ExitCode::from(2)
        }
    }
}

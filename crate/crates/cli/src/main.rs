//! flexgrid: cluster EV charging behaviour, schedule demand turn-up
//! against wind curtailment on a radial feeder, and report the results.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use exit::{CliError, CONFIG_ERROR, OK};

#[derive(Parser)]
#[command(
    name = "flexgrid",
    version,
    about = "EV charging-behaviour clustering and curtailment-displacement simulation"
)]
struct Cli {
    /// Worker threads for per-timestep solves (default: all processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build per-user profiles and fit the k-means cluster model.
    Cluster {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the baseline and flexibility OPF sequences and write the bundle.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Cluster model produced by `flexgrid cluster`.
        #[arg(long)]
        clusters: PathBuf,
    },
    /// Validate and pretty-print a results bundle.
    Report { results_dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLEXGRID_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Cluster { config, seed } => {
            let mut config = RunConfig::load(&config).map_err(config_error)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            commands::cluster::run(&config)?;
            Ok(OK)
        }
        Command::Simulate { config, clusters } => {
            let config = RunConfig::load(&config).map_err(config_error)?;
            commands::simulate::run(&config, &clusters)
        }
        Command::Report { results_dir } => {
            commands::report::run(&results_dir)?;
            Ok(OK)
        }
    }
}

fn config_error(message: String) -> CliError {
    CliError {
        code: CONFIG_ERROR,
        message,
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use catbc_cli::commands;
use catbc_cli::{CliError, CliResult};
use clap::{Parser, Subcommand};

/// Category-level behavior cloning experiments in simulation.
#[derive(Parser)]
#[command(name = "catbc", version)]
struct Cli {
    /// Scenario config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding `scenario.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for batch runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Config override `section.key=value`, repeatable.
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes and a template library.
    GenData,
    /// Parse a demonstration log into a receptacle-frame trajectory.
    ParseDemo {
        /// Demo log (JSON lines); synthesized from the config when omitted.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Estimate the novel instance's canonical frame and scales.
    Predict,
    /// Reproject the demonstration onto the novel instance.
    Reproject,
    /// Run every seed of the scenario.
    Run,
    /// Aggregate results files into success tables.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
    },
    /// Run the scenario over a list of values for one key.
    Sweep {
        /// `section.key=v1,v2,...`
        #[arg(long)]
        param: String,
    },
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::config(format!("--jobs: {e}")))?;
    }
    let config = || -> CliResult<PathBuf> {
        cli.config.clone().ok_or_else(|| CliError::config("--config is required for this command"))
    };
    let scenario = || commands::load_scenario(&config()?, &cli.overrides, cli.seed);
    let written = match &cli.command {
        Command::GenData => commands::gen_data(&scenario()?, &cli.out)?,
        Command::ParseDemo { log } => commands::parse_demo(&scenario()?, log.as_deref(), &cli.out)?,
        Command::Predict => commands::predict(&scenario()?, &cli.out)?,
        Command::Reproject => commands::reproject(&scenario()?, &cli.out)?,
        Command::Run => commands::run(&scenario()?, &cli.out)?,
        Command::Report { results } => {
            let (written, table) = commands::report(results, &cli.out)?;
            print!("{table}");
            written
        }
        Command::Sweep { param } => commands::sweep(&config()?, &cli.overrides, cli.seed, param, &cli.out)?,
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! limitlab: deterministic experiments on learning computable measures
//! from sampled streams.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use limitlab_cli::pipelines::{self, RunOptions};
use limitlab_cli::{scenario, CliError};

#[derive(Parser)]
#[command(
    name = "limitlab",
    about = "Deterministic lab for learning computable probability measures in the limit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory for result files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Added to every stream seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    /// Overrides the scenario's construction horizon.
    #[arg(long, global = true)]
    max_stage: Option<u64>,

    /// Overrides the scenario's stream length.
    #[arg(long, global = true)]
    horizon: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the measure-representation laws over the scenario registry.
    Validate,
    /// Sample streams from the scenario sources.
    Sample,
    /// Run a learner over sampled streams and classify the traces.
    Learn,
    /// Run the stage construction (or its fixed-point composition).
    ConstructSparse,
    /// Extract the growth function from the learner and check the
    /// exception-set bounds and the failure dichotomy.
    Dominate,
    /// Re-render stored results into report.txt.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Scenario(_) => ExitCode::from(2),
                CliError::Invariant(_) => ExitCode::from(3),
                CliError::Io(_) => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let opts = RunOptions {
        seed_offset: cli.seed_offset,
        max_stage: cli.max_stage,
        horizon: cli.horizon,
    };
    if matches!(cli.command, Command::Report) {
        let outcome = pipelines::run_report(&cli.out)?;
        return Ok(outcome.ok());
    }
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::scenario("--scenario is required".into()))?;
    let mut scenario = scenario::load_scenario(path)?;
    let outcome = match cli.command {
        Command::Validate => pipelines::run_validate(&scenario, &cli.out, &opts)?,
        Command::Sample => pipelines::run_sample(&scenario, &cli.out, &opts)?,
        Command::Learn => pipelines::run_learn(&mut scenario, &cli.out, &opts)?.0,
        Command::ConstructSparse => pipelines::run_construct(&mut scenario, &cli.out, &opts)?.0,
        Command::Dominate => pipelines::run_dominate(&mut scenario, &cli.out, &opts)?.0,
        Command::Report => unreachable!("handled above"),
    };
    for failure in &outcome.invariant_failures {
        eprintln!("invariant: {failure}");
    }
    Ok(outcome.ok())
}

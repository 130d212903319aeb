use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use roughsq::verify::Tier;
use roughsq_cli::config::{threads_from_env, FileConfig, Flags, RunConfig};
use roughsq_cli::{experiments, runner};

/// Run the roughsq verification experiments and write their reports.
///
/// Exit status: 0 when every verdict passes, 1 when a verdict fails,
/// 2 for invalid input or an experiment error. ROUGHSQ_THREADS sets the
/// worker count.
#[derive(Parser)]
#[command(name = "roughsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print experiment ids, their parameters and the claim each checks.
    List,
    /// Run an experiment, a criterion (c1 .. c15) or `all` criteria.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment id, criterion (c7, strong-h1) or `all`.
    experiment: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    function: Option<String>,
    /// quick | standard | thorough
    #[arg(long)]
    tier: Option<Tier>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys; flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<runner::Outcome> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Flags {
        experiment: args.experiment,
        alpha: args.alpha,
        p: args.p,
        function: args.function,
        tier: args.tier,
        seed: args.seed,
        out: args.out,
    };
    runner::execute(&RunConfig::resolve(flags, file)?)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            print!("{}", experiments::listing());
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(args) {
            Ok(outcome) => {
                print!("{}", outcome.summary);
                if outcome.passed {
                    ExitCode::SUCCESS
                } else {
                    for f in &outcome.failures {
                        eprintln!("FAIL {f}");
                    }
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}

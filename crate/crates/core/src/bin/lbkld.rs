use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lbkld::cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "lbkld",
    version,
    about = "Simulation-based Bayesian experimental design"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the utility of one design (JSON).
    Utility(Common),
    /// Evaluate every design of an enumerable design space (CSV).
    Sweep(Common),
    /// Search a time box for the best design (JSON plus trace CSV).
    Optimize(Common),
    /// Repeated ABC inference at a fixed design (CSV).
    ReplicateInfer(Common),
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to $LBKLD_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let (command, common) = match args.command {
        Cmd::Utility(c) => (Command::Utility, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Optimize(c) => (Command::Optimize, c),
        Cmd::ReplicateInfer(c) => (Command::ReplicateInfer, c),
    };
    let overrides = Overrides {
        seed: common.seed,
        workers: common.workers,
        out: common.out,
    };
    match run(command, &common.config, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

mod cluster;
mod exit;
mod featurize;
mod library;
mod paths;
mod plot;
mod segment;
mod select;
mod synth;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use exit::CliError;

/// Segment demonstrations into motion primitives, cluster them, keep them in
/// a library and retarget them to new constraints.
#[derive(Debug, Parser)]
#[command(name = "primlib", version, about)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a demonstration at fused changepoints.
    Segment(segment::Args),
    /// Describe library primitives by DTW distance to representatives.
    Featurize(featurize::Args),
    /// Cluster a feature CSV with elastic EM.
    Cluster(cluster::Args),
    /// Inspect and edit a primitive library.
    #[command(subcommand)]
    Library(library::Command),
    /// Retarget library primitives to constraints and rank the results.
    Select(select::Args),
    /// Write synthetic demonstrations and features.
    #[command(subcommand)]
    Synth(synth::Command),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::params("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::params(e.to_string()))?;
    }
    match cli.command {
        Command::Segment(a) => segment::run(a),
        Command::Featurize(a) => featurize::run(a),
        Command::Cluster(a) => cluster::run(a),
        Command::Library(c) => library::run(c),
        Command::Select(a) => select::run(a),
        Command::Synth(c) => synth::run(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

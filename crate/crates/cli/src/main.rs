//! `sortnet`: existence and optimal-depth queries for sorting networks.
//!
//! Exit codes: 0 when a network exists (or the verified file sorts), 1 when
//! none exists (or the file does not sort), 2 on any error.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use sortnet::{default_workers, exists_sorting_network, optimal_depth, Network, OutputSet, SearchConfig};

use crate::report::StatsReport;

#[derive(Parser)]
#[command(name = "sortnet", version, about = "Optimal-depth sorting network search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an n-channel sorting network of the given depth exists.
    Exists(ExistsArgs),
    /// Find the smallest depth of an n-channel sorting network.
    Optimal(OptimalArgs),
    /// Check that a network file describes a sorting network.
    Verify {
        /// Network text file (`n=<channels>` header, one level per line).
        file: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Worker threads.
    #[arg(long, env = "SORTNET_WORKERS")]
    workers: Option<usize>,
    /// Skip minimisation after this depth (default: minimise every depth).
    #[arg(long)]
    minimize_through: Option<usize>,
    /// Abort when a depth produces more distinct sets than this.
    #[arg(long)]
    pool_limit: Option<usize>,
    /// Seconds between progress messages on standard error.
    #[arg(long, default_value_t = 10)]
    progress_secs: u64,
    /// Write per-depth statistics as JSON.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct ExistsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    run: RunArgs,
    /// Save the pool after every depth under this directory.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Continue from the deepest checkpoint in --checkpoint-dir.
    #[arg(long, requires = "checkpoint_dir")]
    resume: bool,
    /// Write a verified sorting network of the requested depth, if one exists.
    #[arg(long)]
    witness_out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimalArgs {
    #[arg(long)]
    n: usize,
    /// Largest depth to try.
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    #[command(flatten)]
    run: RunArgs,
}

impl RunArgs {
    fn config(&self, n: usize, depth: usize) -> SearchConfig {
        let mut config = SearchConfig::new(n, depth);
        config.workers = self.workers.unwrap_or_else(default_workers);
        config.minimize_through = self.minimize_through;
        config.pool_limit = self.pool_limit;
        config.progress_interval = Duration::from_secs(self.progress_secs);
        config
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exists(args) => cmd_exists(args),
        Command::Optimal(args) => cmd_optimal(args),
        Command::Verify { file } => cmd_verify(file),
    };
    match result {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_stats(path: &Option<PathBuf>, report: &StatsReport) -> Result<()> {
    if let Some(path) = path {
        let json = serde_json::to_string_pretty(report)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_exists(args: ExistsArgs) -> Result<bool> {
    let mut config = args.run.config(args.n, args.depth);
    config.checkpoint_dir = args.checkpoint_dir.clone();
    config.resume = args.resume;
    config.emit_witness = args.witness_out.is_some();
    let outcome = exists_sorting_network(&config)?;
    write_stats(&args.run.stats_out, &StatsReport::new(&config, &outcome))?;

    if let (Some(path), Some(witness)) = (&args.witness_out, &outcome.witness) {
        if !witness.is_sorting_network() || witness.depth() != args.depth {
            bail!("internal error: witness failed verification");
        }
        fs::write(path, witness.to_string()).with_context(|| format!("writing {}", path.display()))?;
        info!("witness written to {}", path.display());
    }
    println!("n={} depth={} exists={}", args.n, args.depth, outcome.exists);
    Ok(outcome.exists)
}

fn cmd_optimal(args: OptimalArgs) -> Result<bool> {
    let base = args.run.config(args.n, 1);
    match optimal_depth(args.n, args.max_depth, &base)? {
        Some((depth, outcome)) => {
            let config = SearchConfig { depth, ..base };
            write_stats(&args.run.stats_out, &StatsReport::new(&config, &outcome))?;
            println!("{depth}");
            Ok(true)
        }
        None => {
            println!("none up to depth {}", args.max_depth);
            Ok(false)
        }
    }
}

fn cmd_verify(file: PathBuf) -> Result<bool> {
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    let net = Network::parse(&text).with_context(|| format!("parsing {}", file.display()))?;
    let outputs = OutputSet::of_network(&net).cardinality();
    let sorts = net.is_sorting_network();
    println!(
        "sorting={sorts} channels={} depth={} comparators={} outputs={outputs}",
        net.channels(),
        net.depth(),
        net.comparator_count()
    );
    Ok(sorts)
}

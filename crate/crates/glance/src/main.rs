//! Thin command-line surface over the pipeline library. Exit codes:
//! 0 success, 2 config error, 3 missing artifact, 4 provider failure,
//! 5 numeric divergence.

use clap::{Parser, Subcommand};
use glance::pipeline::{
    cmd_ablate, cmd_embed, cmd_eval, cmd_gen, cmd_heuristics, cmd_sweep_gnn, cmd_train_glance,
    cmd_train_gnn, cmd_train_q, EmbedScope, EvalOptions, RunConfig,
};
use glance::GlanceError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "glance",
    about = "Adaptive GNN-LLM fusion: train a per-node router that queries a text expert only where the structural expert struggles",
    version
)]
struct Cli {
    /// Path to the run configuration (JSON).
    #[arg(long, global = true, default_value = "glance.json")]
    config: PathBuf,

    /// Output directory for artifacts and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the config's top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured synthetic dataset into <out>/data.
    Gen,
    /// Train the structural expert (GCN encoder + prediction head).
    TrainGnn,
    /// Sweep the expert over the learning-rate x weight-decay grid and
    /// keep the best checkpoint.
    SweepGnn,
    /// Train the label-free homophily estimator.
    TrainQ,
    /// Precompute the embedding cache for a node scope.
    Embed {
        /// Which nodes to embed.
        #[arg(long, value_enum, default_value = "all")]
        scope: ScopeArg,
        /// Cache file override (defaults to the provider's cache or
        /// <out>/cache.jsonl).
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Concurrent embedding workers.
        #[arg(long, default_value_t = 4)]
        max_in_flight: usize,
    },
    /// Train the router and refiner over the frozen experts.
    TrainGlance,
    /// Evaluate the trained bundle on the test split.
    Eval {
        /// Routed nodes per batch at test time.
        #[arg(long)]
        k_test: Option<usize>,
        /// Homophily bin edges, e.g. --bins 0,0.25,0.5,0.75,1.
        #[arg(long, value_delimiter = ',')]
        bins: Option<Vec<f64>>,
    },
    /// NCS grid over the static routing heuristics.
    Heuristics {
        /// Include the label-reading true-homophily strategy.
        #[arg(long)]
        oracle_h: bool,
    },
    /// Retrain with each routing feature dropped and report the deltas.
    Ablate,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum ScopeArg {
    Train,
    Val,
    Test,
    All,
}

impl From<ScopeArg> for EmbedScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Train => EmbedScope::Train,
            ScopeArg::Val => EmbedScope::Val,
            ScopeArg::Test => EmbedScope::Test,
            ScopeArg::All => EmbedScope::All,
        }
    }
}

fn run(cli: Cli) -> Result<(), GlanceError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Gen => {
            let summary = cmd_gen(&cfg, &cli.out)?;
            println!(
                "generated {} nodes / {} edges ({} classes)",
                summary.nodes, summary.edges, summary.num_classes
            );
            for (i, (target, realized)) in summary.mixture.iter().enumerate() {
                println!("  group {i}: target homophily {target:.2}, realized {realized:.3}");
            }
        }
        Command::TrainGnn => {
            let log = cmd_train_gnn(&cfg, &cli.out)?;
            println!(
                "structural expert: best val accuracy {:.4} at epoch {} ({} epochs run)",
                log.best_val_accuracy, log.best_epoch, log.epochs_run
            );
        }
        Command::TrainQ => {
            let meta = cmd_train_q(&cfg, &cli.out)?;
            println!(
                "homophily estimator: best val accuracy {:.4} at epoch {}",
                meta.best_val_accuracy, meta.best_epoch
            );
        }
        Command::SweepGnn => {
            let report = cmd_sweep_gnn(&cfg, &cli.out)?;
            print!("{}", report.render_text());
        }
        Command::Embed {
            scope,
            cache,
            max_in_flight,
        } => {
            let summary = cmd_embed(&cfg, &cli.out, scope.into(), cache, max_in_flight)?;
            println!(
                "embedded {} nodes: {} provider calls, {} http requests, cache {}",
                summary.nodes_embedded,
                summary.provider_calls,
                summary.http_requests,
                summary.cache_path.display()
            );
        }
        Command::TrainGlance => {
            let report = cmd_train_glance(&cfg, &cli.out)?;
            println!(
                "router+refiner: best val accuracy {:.4} at epoch {}, {} provider calls",
                report.best_val_accuracy, report.best_epoch, report.provider_calls
            );
            println!(
                "runtime: gnn {} ms, provider {} ms, router+refiner {} ms",
                report.timings.gnn_ms, report.timings.provider_ms, report.timings.router_refiner_ms
            );
        }
        Command::Eval { k_test, bins } => {
            let report = cmd_eval(
                &cfg,
                &cli.out,
                &EvalOptions {
                    k_test,
                    bin_edges: bins,
                },
            )?;
            print!("{}", report.render_text());
        }
        Command::Heuristics { oracle_h } => {
            let grid = cmd_heuristics(&cfg, &cli.out, oracle_h)?;
            print!("{}", grid.render_text());
        }
        Command::Ablate => {
            let report = cmd_ablate(&cfg, &cli.out)?;
            print!("{}", report.render_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! The full pipeline on the shipped fixture: generate data, train both
//! frozen experts, train the router and refiner with counterfactual
//! advantage rewards, and evaluate against the structural expert alone.
//!
//! Run with: cargo run --release --example glance_end_to_end

use glance::pipeline::{
    cmd_eval, cmd_gen, cmd_train_glance, cmd_train_gnn, cmd_train_q, EvalOptions, RunConfig,
};
use std::path::Path;

fn main() -> glance::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/efficacy.json");
    let cfg = RunConfig::load(&fixture)?;
    let tmp = tempfile::tempdir()?;
    let out = tmp.path().join("run");

    let summary = cmd_gen(&cfg, &out)?;
    println!(
        "data: {} nodes / {} edges, realized mixture {:?}",
        summary.nodes,
        summary.edges,
        summary
            .mixture
            .iter()
            .map(|(t, r)| format!("{t:.2}->{r:.3}"))
            .collect::<Vec<_>>()
    );

    let gnn_log = cmd_train_gnn(&cfg, &out)?;
    println!(
        "structural expert val accuracy {:.4}",
        gnn_log.best_val_accuracy
    );
    let q_meta = cmd_train_q(&cfg, &out)?;
    println!(
        "homophily estimator val accuracy {:.4}",
        q_meta.best_val_accuracy
    );

    let report = cmd_train_glance(&cfg, &out)?;
    println!(
        "router+refiner trained: best val {:.4} at epoch {} ({} provider calls)",
        report.best_val_accuracy, report.best_epoch, report.provider_calls
    );
    println!("per-epoch budget decay and rewards:");
    for epoch in &report.epochs {
        println!(
            "  epoch {:>2}: K_t {:>2}, routed {:>4}, mean reward {:>+7.3}, val {:.4}",
            epoch.epoch, epoch.k_t, epoch.routed_nodes, epoch.mean_reward, epoch.val_accuracy
        );
    }
    println!(
        "runtime breakdown: gnn {} ms, provider {} ms, router+refiner {} ms",
        report.timings.gnn_ms, report.timings.provider_ms, report.timings.router_refiner_ms
    );

    let eval = cmd_eval(&cfg, &out, &EvalOptions::default())?;
    println!("\n{}", eval.render_text());
    Ok(())
}

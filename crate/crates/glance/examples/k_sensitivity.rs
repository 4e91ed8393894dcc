//! Sensitivity to the test-time routing budget: evaluate one trained model
//! at K in {8, 12, 16} per batch of 32 and watch the low-homophily bin
//! improve as the budget grows while the homophilous bins stay put.
//!
//! Run with: cargo run --release --example k_sensitivity

use glance::pipeline::{
    cmd_eval, cmd_gen, cmd_train_glance, cmd_train_gnn, cmd_train_q, EvalOptions, RunConfig,
};
use std::path::Path;

fn main() -> glance::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/efficacy.json");
    let cfg = RunConfig::load(&fixture)?;
    let tmp = tempfile::tempdir()?;
    let out = tmp.path().join("run");

    cmd_gen(&cfg, &out)?;
    cmd_train_gnn(&cfg, &out)?;
    cmd_train_q(&cfg, &out)?;
    cmd_train_glance(&cfg, &out)?;

    println!(
        "{:<6}{:>10}{:>12}{:>12}{:>12}{:>16}",
        "K", "overall", "h<0.25", "h>=0.75", "routed", "provider calls"
    );
    for k in [8usize, 12, 16] {
        let report = cmd_eval(
            &cfg,
            &out,
            &EvalOptions {
                k_test: Some(k),
                bin_edges: None,
            },
        )?;
        println!(
            "{k:<6}{:>10.4}{:>12.4}{:>12.4}{:>12}{:>16}",
            report.overall_accuracy,
            report.bins[0].accuracy.unwrap_or(f64::NAN),
            report.bins.last().unwrap().accuracy.unwrap_or(f64::NAN),
            report.routed_count,
            report.provider_calls,
        );
    }
    Ok(())
}

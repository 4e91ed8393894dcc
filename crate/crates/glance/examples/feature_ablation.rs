//! Routing-feature ablation: retrain the router and refiner with each
//! feature segment dropped in turn and report the accuracy deltas against
//! the full model. Dropping the homophily estimate hurts the heterophilous
//! bin the most.
//!
//! Run with: cargo run --release --example feature_ablation

use glance::pipeline::{cmd_ablate, cmd_gen, cmd_train_gnn, cmd_train_q, DataConfig, RunConfig};
use std::path::Path;

fn main() -> glance::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/efficacy.json");
    let mut cfg = RunConfig::load(&fixture)?;
    // six retrains; a smaller graph keeps this example snappy
    if let DataConfig::Synthetic { synth } = &mut cfg.data {
        synth.num_nodes = 800;
    }
    let tmp = tempfile::tempdir()?;
    let out = tmp.path().join("run");

    cmd_gen(&cfg, &out)?;
    cmd_train_gnn(&cfg, &out)?;
    cmd_train_q(&cfg, &out)?;

    let report = cmd_ablate(&cfg, &out)?;
    println!("{}", report.render_text());
    Ok(())
}

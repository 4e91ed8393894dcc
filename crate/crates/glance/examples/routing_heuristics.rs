//! Static routing heuristics compared by net correction score: random,
//! clustering density, degree, uncertainty, estimated soft homophily,
//! relative degree, and (oracle) true homophily, each routing the top-k%
//! of the test split into the refiner pathway.
//!
//! Run with: cargo run --release --example routing_heuristics

use glance::pipeline::{
    cmd_gen, cmd_heuristics, cmd_train_glance, cmd_train_gnn, cmd_train_q, RunConfig,
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

    let grid = cmd_heuristics(&cfg, &out, true)?;
    println!("{}", grid.render_text());
    println!("(NCS = (fixed - broken) / routed; 1.0 means every routed node was fixed)");
    Ok(())
}

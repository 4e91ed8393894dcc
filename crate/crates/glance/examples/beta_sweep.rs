//! Query-cost sensitivity: retrain at beta in {0.0, 0.1, 0.2, 0.3} and
//! watch larger penalties concentrate the routing budget on the most
//! heterophilous nodes.
//!
//! Run with: cargo run --release --example beta_sweep

use glance::pipeline::{cmd_gen, cmd_train_gnn, cmd_train_q, evaluate, DataConfig, RunConfig};
use glance::trainer::{precompute, train_glance, EmbeddingMemo, PrecomputeSettings};
use std::path::Path;

fn main() -> glance::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/efficacy.json");
    let mut cfg = RunConfig::load(&fixture)?;
    if let DataConfig::Synthetic { synth } = &mut cfg.data {
        synth.num_nodes = 1000;
    }
    let tmp = tempfile::tempdir()?;
    let out = tmp.path().join("run");
    cmd_gen(&cfg, &out)?;
    cmd_train_gnn(&cfg, &out)?;
    cmd_train_q(&cfg, &out)?;

    let resolved = cfg.resolve();
    let (g, _) = resolved.load_graph()?;
    let gcn = glance::gnn::load_gcn(&out.join("gnn.json"))?;
    let q = glance::homophily::HomophilyEstimator {
        q: glance::homophily::HomophilyEstimator::load(&out.join("q.json"))?,
        meta: glance::homophily::QTrainMeta {
            seed: 0,
            epochs_run: 0,
            best_epoch: 0,
            best_val_accuracy: f64::NAN,
        },
    };
    let settings = PrecomputeSettings {
        mc_passes: resolved.glance.mc_passes,
        mc_rate: resolved.glance.mc_rate,
        uncertainty_seed: resolved.uncertainty_seed(),
        uncertainty_stat: resolved.glance.uncertainty_stat,
        ablate: Default::default(),
    };
    let ctx = precompute(&gcn, &q, &g, &settings)?;
    let class_names = resolved.class_names(g.num_classes());

    println!(
        "{:<8}{:>10}{:>12}{:>12}{:>16}",
        "beta", "overall", "h<0.25", "h>=0.75", "routed median h"
    );
    for beta in [0.0, 0.1, 0.2, 0.3] {
        let mut hyper = resolved.glance.clone();
        hyper.beta = beta;
        let provider = resolved.provider.build()?;
        let mut memo = EmbeddingMemo::new(
            resolved.sampler_seed(),
            hyper.zero_empty_hops,
            class_names.clone(),
        );
        let (policy, refiner, _) = train_glance(&g, &ctx, provider.as_ref(), &mut memo, &hyper)?;
        let report = evaluate(
            &g,
            &ctx,
            &policy,
            &refiner,
            provider.as_ref(),
            &mut memo,
            hyper.schedule.k_test,
            hyper.batch_size,
            &resolved.eval.bin_edges,
        )?;
        println!(
            "{beta:<8}{:>10.4}{:>12.4}{:>12.4}{:>16.3}",
            report.overall_accuracy,
            report.bins[0].accuracy.unwrap_or(f64::NAN),
            report.bins.last().unwrap().accuracy.unwrap_or(f64::NAN),
            report.routed_median_homophily.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

//! End-to-end commands shared by the CLI and the runnable examples:
//! generate or ingest data, train the frozen experts, precompute
//! embeddings, train the router and refiner, evaluate, and run the
//! heuristic grid and feature ablations.
//!
//! Every command resolves its config, writes the resolved copy next to its
//! outputs, and updates the output directory's manifest (artifact hashes,
//! tool version, component timings). No command mutates an input artifact
//! in place.

pub mod config;
pub mod manifest;

pub use config::{DataConfig, EvalSection, GnnSection, QSection, RunConfig};
pub use manifest::{sha256_bytes, sha256_file, BundleManifest, Manifest};

use crate::error::{GlanceError, Result};
use crate::eval::{
    average_rank, c_density, heuristic_route, median_of, ncs, routed_homophily_summary,
    stratified_accuracy, EvalReport, HeuristicGrid, HeuristicGridRow, HeuristicKind,
    HeuristicSignals, MethodScores,
};
use crate::gnn::{argmax, gnn_train, load_gcn, save_gcn, GcnModel, GnnTrainLog};
use crate::graph::{
    local_homophily_all, relative_degree_all, write_dataset, Split, SynthOutput,
    TextAttributedGraph,
};
use crate::homophily::{train_q, HomophilyEstimator, QTrainMeta};
use crate::llm::{EmbeddingProvider, ProviderConfig};
use crate::refiner::{refine_predict, RefinerModel};
use crate::router::{load_router, save_router, RouterPolicy};
use crate::trainer::{
    glance_predict, precompute, train_glance, EmbeddingMemo, FrozenContext, PredictSettings,
    TrainReport,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Path conventions inside an output directory.
pub struct Workspace {
    out: PathBuf,
}

impl Workspace {
    pub fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out)?;
        Ok(Self {
            out: out.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.out
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out.join("data")
    }

    pub fn gnn_checkpoint(&self) -> PathBuf {
        self.out.join("gnn.json")
    }

    pub fn q_checkpoint(&self) -> PathBuf {
        self.out.join("q.json")
    }

    pub fn bundle_dir(&self) -> PathBuf {
        self.out.join("bundle")
    }

    pub fn router_checkpoint(&self) -> PathBuf {
        self.bundle_dir().join("router.json")
    }

    pub fn refiner_checkpoint(&self) -> PathBuf {
        self.bundle_dir().join("refiner.json")
    }

    pub fn bundle_manifest(&self) -> PathBuf {
        self.bundle_dir().join("manifest.json")
    }

    pub fn train_report(&self) -> PathBuf {
        self.bundle_dir().join("train_report.json")
    }

    pub fn default_cache(&self) -> PathBuf {
        self.out.join("cache.jsonl")
    }

    fn write_resolved_config(&self, command: &str, cfg: &RunConfig) -> Result<()> {
        std::fs::write(
            self.out.join(format!("{command}.config.json")),
            serde_json::to_string_pretty(cfg)?,
        )?;
        Ok(())
    }
}

fn finish(ws: &Workspace, command: &str, started: Instant, artifacts: &[&str]) -> Result<()> {
    let mut manifest = Manifest::load_or_new(ws.root());
    for rel in artifacts {
        manifest.record_artifact(ws.root(), rel)?;
    }
    manifest.record_timing(command, started.elapsed().as_millis());
    manifest.save(ws.root())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSummary {
    pub nodes: usize,
    pub edges: usize,
    pub num_classes: usize,
    /// (target, realized mean) per mixture component.
    pub mixture: Vec<(f64, f64)>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Generate the configured synthetic dataset into `out/data` and report the
/// realized homophily mixture.
pub fn cmd_gen(cfg: &RunConfig, out: &Path) -> Result<GenSummary> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("gen", &cfg)?;
    let synth = match &cfg.data {
        DataConfig::Synthetic { synth } => synth,
        DataConfig::Files { .. } => {
            return Err(GlanceError::Config(
                "gen needs a synthetic data section".into(),
            ))
        }
    };
    let output: SynthOutput = crate::graph::synth_generate(synth)?;
    write_dataset(&ws.data_dir(), &output.graph)?;
    let summary = GenSummary {
        nodes: output.graph.num_nodes(),
        edges: output.graph.num_edges(),
        num_classes: output.graph.num_classes(),
        mixture: synth
            .homophily_mixture
            .iter()
            .zip(&output.realized)
            .map(|(m, &r)| (m.target, r))
            .collect(),
        self_loops_dropped: output.graph.cleaning().self_loops_dropped,
        duplicates_dropped: output.graph.cleaning().duplicates_dropped,
    };
    std::fs::write(
        ws.data_dir().join("gen_summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    finish(
        &ws,
        "gen",
        started,
        &[
            "data/nodes.jsonl",
            "data/edges.csv",
            "data/gen_summary.json",
        ],
    )?;
    Ok(summary)
}

/// Train the structural expert and write its checkpoint.
pub fn cmd_train_gnn(cfg: &RunConfig, out: &Path) -> Result<GnnTrainLog> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("train-gnn", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let (model, _, log) = gnn_train(&g, &cfg.gnn.model, &cfg.gnn.train)?;
    save_gcn(&ws.gnn_checkpoint(), &model)?;
    std::fs::write(
        ws.root().join("gnn_train_log.json"),
        serde_json::to_string_pretty(&log)?,
    )?;
    finish(
        &ws,
        "train-gnn",
        started,
        &["gnn.json", "gnn_train_log.json"],
    )?;
    Ok(log)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub val_accuracy: f64,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub best_learning_rate: f64,
    pub best_weight_decay: f64,
    pub best_val_accuracy: f64,
}

impl SweepReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14}{:<14}{:>10}{:>8}\n",
            "learning rate", "weight decay", "val acc", "epochs"
        ));
        for cell in &self.cells {
            out.push_str(&format!(
                "{:<14}{:<14}{:>10.4}{:>8}\n",
                cell.learning_rate, cell.weight_decay, cell.val_accuracy, cell.epochs_run
            ));
        }
        out.push_str(&format!(
            "best: lr {} wd {} at val accuracy {:.4}\n",
            self.best_learning_rate, self.best_weight_decay, self.best_val_accuracy
        ));
        out
    }
}

/// Structural-expert hyperparameter sweep over the standard grid
/// (learning rate {1e-2, 1e-3, 1e-4} x weight decay {1e-3, 1e-4, 1e-5}).
/// Writes the best cell's checkpoint as the expert.
pub fn cmd_sweep_gnn(cfg: &RunConfig, out: &Path) -> Result<SweepReport> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("sweep-gnn", &cfg)?;
    let (g, _) = cfg.load_graph()?;

    let mut cells = Vec::new();
    let mut best: Option<(GcnModel, SweepCell)> = None;
    for lr in [1e-2, 1e-3, 1e-4] {
        for wd in [1e-3, 1e-4, 1e-5] {
            let mut train_cfg = cfg.gnn.train.clone();
            train_cfg.learning_rate = lr;
            train_cfg.weight_decay = wd;
            let (model, _, log) = gnn_train(&g, &cfg.gnn.model, &train_cfg)?;
            let cell = SweepCell {
                learning_rate: lr,
                weight_decay: wd,
                val_accuracy: log.best_val_accuracy,
                epochs_run: log.epochs_run,
            };
            if best
                .as_ref()
                .map(|(_, b)| cell.val_accuracy > b.val_accuracy)
                .unwrap_or(true)
            {
                best = Some((model, cell.clone()));
            }
            cells.push(cell);
        }
    }
    let (model, best_cell) = best.expect("grid is non-empty");
    save_gcn(&ws.gnn_checkpoint(), &model)?;
    let report = SweepReport {
        cells,
        best_learning_rate: best_cell.learning_rate,
        best_weight_decay: best_cell.weight_decay,
        best_val_accuracy: best_cell.val_accuracy,
    };
    std::fs::write(
        ws.root().join("sweep_gnn.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    std::fs::write(ws.root().join("sweep_gnn.txt"), report.render_text())?;
    finish(
        &ws,
        "sweep-gnn",
        started,
        &["gnn.json", "sweep_gnn.json", "sweep_gnn.txt"],
    )?;
    Ok(report)
}

/// Train the label-free homophily estimator and write its checkpoint.
pub fn cmd_train_q(cfg: &RunConfig, out: &Path) -> Result<QTrainMeta> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("train-q", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let estimator = train_q(&g, &cfg.q.train)?;
    estimator.save(&ws.q_checkpoint())?;
    std::fs::write(
        ws.root().join("q_train_log.json"),
        serde_json::to_string_pretty(&estimator.meta)?,
    )?;
    finish(&ws, "train-q", started, &["q.json", "q_train_log.json"])?;
    Ok(estimator.meta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedScope {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedSummary {
    pub nodes_embedded: usize,
    pub provider_calls: u64,
    pub http_requests: u64,
    pub cache_path: PathBuf,
}

/// Precompute the embedding cache for a node scope. The configured
/// provider is wrapped in a file cache (its own, or `out/cache.jsonl`),
/// and up to `max_in_flight` workers embed concurrently; the cache is
/// content-addressed, so fill order does not matter.
pub fn cmd_embed(
    cfg: &RunConfig,
    out: &Path,
    scope: EmbedScope,
    cache_override: Option<PathBuf>,
    max_in_flight: usize,
) -> Result<EmbedSummary> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("embed", &cfg)?;
    let (g, _) = cfg.load_graph()?;

    let cache_path = cache_override.unwrap_or_else(|| match &cfg.provider {
        ProviderConfig::Http {
            cache_path: Some(p),
            ..
        } => p.clone(),
        ProviderConfig::FileCache { cache_path, .. } => cache_path.clone(),
        _ => ws.default_cache(),
    });
    let inner = cfg.provider.build()?;
    let provider =
        crate::llm::CachedProvider::new(inner, crate::llm::EmbeddingCache::open(&cache_path)?);

    let nodes: Vec<usize> = match scope {
        EmbedScope::Train => g.split_ids(Split::Train),
        EmbedScope::Val => g.split_ids(Split::Val),
        EmbedScope::Test => g.split_ids(Split::Test),
        EmbedScope::All => (0..g.num_nodes()).collect(),
    };
    let class_names = cfg.class_names(g.num_classes());
    let prompt_seed = cfg.sampler_seed();
    let zero_empty = cfg.glance.zero_empty_hops;
    let workers = max_in_flight.max(1).min(nodes.len().max(1));
    let chunk = nodes.len().div_ceil(workers);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for slice in nodes.chunks(chunk.max(1)) {
            let g = &g;
            let provider = &provider;
            let class_names = &class_names;
            handles.push(scope.spawn(move || -> Result<()> {
                for &v in slice {
                    let bundle = crate::llm::serialize_prompts(g, v, class_names, prompt_seed)?;
                    crate::llm::embed_node(provider, &bundle, zero_empty)?;
                }
                Ok(())
            }));
        }
        for handle in handles {
            handle
                .join()
                .map_err(|_| GlanceError::Provider("embed worker panicked".into()))??;
        }
        Ok(())
    })?;
    let summary = EmbedSummary {
        nodes_embedded: nodes.len(),
        provider_calls: provider.calls(),
        http_requests: provider.http_requests(),
        cache_path,
    };
    finish(&ws, "embed", started, &[])?;
    Ok(summary)
}

fn load_experts(ws: &Workspace) -> Result<(GcnModel, HomophilyEstimator)> {
    let gcn = load_gcn(&ws.gnn_checkpoint())?;
    let q_model = HomophilyEstimator::load(&ws.q_checkpoint())?;
    let q = HomophilyEstimator {
        q: q_model,
        meta: QTrainMeta {
            seed: 0,
            epochs_run: 0,
            best_epoch: 0,
            best_val_accuracy: f64::NAN,
        },
    };
    Ok((gcn, q))
}

fn precompute_settings(cfg: &RunConfig) -> crate::trainer::PrecomputeSettings {
    crate::trainer::PrecomputeSettings {
        mc_passes: cfg.glance.mc_passes,
        mc_rate: cfg.glance.mc_rate,
        uncertainty_seed: cfg.uncertainty_seed(),
        uncertainty_stat: cfg.glance.uncertainty_stat,
        ablate: cfg.glance.ablate.iter().cloned().collect::<HashSet<_>>(),
    }
}

/// Train the router and refiner over the frozen experts and write the
/// model bundle (checkpoints, manifest with expert hash pins, train
/// report).
pub fn cmd_train_glance(cfg: &RunConfig, out: &Path) -> Result<TrainReport> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("train-glance", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let (gcn, q) = load_experts(&ws)?;

    let gnn_hash_before = sha256_file(&ws.gnn_checkpoint())?;
    let q_hash_before = sha256_file(&ws.q_checkpoint())?;

    let provider = cfg.provider.build()?;
    let ctx = precompute(&gcn, &q, &g, &precompute_settings(&cfg))?;
    let class_names = cfg.class_names(g.num_classes());
    let prompt_seed = cfg.sampler_seed();
    let mut memo = EmbeddingMemo::new(prompt_seed, cfg.glance.zero_empty_hops, class_names.clone());
    let (policy, refiner, report) =
        train_glance(&g, &ctx, provider.as_ref(), &mut memo, &cfg.glance)?;

    // frozen-expert contract: the checkpoints on disk are untouched
    let gnn_hash_after = sha256_file(&ws.gnn_checkpoint())?;
    let q_hash_after = sha256_file(&ws.q_checkpoint())?;
    if gnn_hash_before != gnn_hash_after || q_hash_before != q_hash_after {
        return Err(GlanceError::Config(
            "frozen expert checkpoints changed during training".into(),
        ));
    }

    std::fs::create_dir_all(ws.bundle_dir())?;
    save_router(&ws.router_checkpoint(), &policy)?;
    refiner.save(&ws.refiner_checkpoint())?;
    std::fs::write(ws.train_report(), serde_json::to_string_pretty(&report)?)?;

    let mut expert_hashes = BTreeMap::new();
    expert_hashes.insert("gnn.json".to_string(), gnn_hash_after);
    expert_hashes.insert("q.json".to_string(), q_hash_after);
    let mut artifact_hashes = BTreeMap::new();
    artifact_hashes.insert(
        "router.json".to_string(),
        sha256_file(&ws.router_checkpoint())?,
    );
    artifact_hashes.insert(
        "refiner.json".to_string(),
        sha256_file(&ws.refiner_checkpoint())?,
    );
    let bundle = BundleManifest {
        schema: 1,
        hyper: cfg.glance.clone(),
        prompt_seed,
        class_names,
        provider_dim: cfg.provider.dim(),
        expert_hashes,
        artifact_hashes,
    };
    bundle.save(&ws.bundle_manifest())?;
    let mut manifest = Manifest::load_or_new(ws.root());
    for rel in [
        "bundle/router.json",
        "bundle/refiner.json",
        "bundle/manifest.json",
        "bundle/train_report.json",
    ] {
        manifest.record_artifact(ws.root(), rel)?;
    }
    manifest.record_timing("train-glance", started.elapsed().as_millis());
    manifest.record_timing("train-glance.gnn", report.timings.gnn_ms);
    manifest.record_timing("train-glance.provider", report.timings.provider_ms);
    manifest.record_timing(
        "train-glance.router_refiner",
        report.timings.router_refiner_ms,
    );
    manifest.save(ws.root())?;
    Ok(report)
}

fn load_bundle(
    ws: &Workspace,
) -> Result<(
    BundleManifest,
    RouterPolicy,
    RefinerModel,
    GcnModel,
    HomophilyEstimator,
)> {
    let bundle = BundleManifest::load(&ws.bundle_manifest())?;
    bundle.verify_expert("gnn.json", &ws.gnn_checkpoint())?;
    bundle.verify_expert("q.json", &ws.q_checkpoint())?;
    let (gcn, q) = load_experts(ws)?;
    let policy = load_router(&ws.router_checkpoint())?;
    let refiner = RefinerModel::load(
        &ws.refiner_checkpoint(),
        gcn.hidden_dim,
        bundle.provider_dim * 3,
    )?;
    Ok((bundle, policy, refiner, gcn, q))
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub k_test: Option<usize>,
    pub bin_edges: Option<Vec<f64>>,
}

/// Evaluate a trained bundle on the test split and emit the report (JSON
/// plus an aligned text table).
pub fn cmd_eval(cfg: &RunConfig, out: &Path, opts: &EvalOptions) -> Result<EvalReport> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("eval", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let (bundle, policy, refiner, gcn, q) = load_bundle(&ws)?;

    // precompute with the bundle's settings so the feature layout matches
    let mut eval_cfg = cfg.clone();
    eval_cfg.glance = bundle.hyper.clone();
    let ctx = precompute(&gcn, &q, &g, &precompute_settings(&eval_cfg))?;
    if ctx.layout != policy.layout {
        return Err(GlanceError::Dim(
            "feature layout does not match the trained router checkpoint".into(),
        ));
    }
    let provider = cfg.provider.build()?;
    let mut memo = EmbeddingMemo::new(
        bundle.prompt_seed,
        bundle.hyper.zero_empty_hops,
        bundle.class_names.clone(),
    );
    let k_test = opts.k_test.unwrap_or(bundle.hyper.schedule.k_test);
    let bin_edges = opts
        .bin_edges
        .clone()
        .unwrap_or_else(|| cfg.eval.bin_edges.clone());

    let report = evaluate(
        &g,
        &ctx,
        &policy,
        &refiner,
        provider.as_ref(),
        &mut memo,
        k_test,
        bundle.hyper.batch_size,
        &bin_edges,
    )?;
    let stem = format!("eval_k{k_test}");
    std::fs::write(
        ws.root().join(format!("{stem}.json")),
        serde_json::to_string_pretty(&report)?,
    )?;
    std::fs::write(ws.root().join(format!("{stem}.txt")), report.render_text())?;
    finish(
        &ws,
        &format!("eval-k{k_test}"),
        started,
        &[&format!("{stem}.json"), &format!("{stem}.txt")],
    )?;
    Ok(report)
}

/// Core evaluation: fused predictions at a budget vs. the frozen expert
/// alone, stratified by true local homophily.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    g: &TextAttributedGraph,
    ctx: &FrozenContext,
    policy: &RouterPolicy,
    refiner: &RefinerModel,
    provider: &dyn EmbeddingProvider,
    memo: &mut EmbeddingMemo,
    k_test: usize,
    batch_size: usize,
    bin_edges: &[f64],
) -> Result<EvalReport> {
    let test_ids = g.split_ids(Split::Test);
    if test_ids.is_empty() {
        return Err(GlanceError::Config("empty test split".into()));
    }
    let calls_before = provider.calls();
    let (predictions, trace) = glance_predict(
        policy,
        refiner,
        ctx,
        g,
        provider,
        memo,
        &test_ids,
        k_test,
        &PredictSettings { batch_size },
    )?;
    let provider_calls = provider.calls() - calls_before;

    let h_all = local_homophily_all(g);
    let mut gnn_correct_all = vec![false; g.num_nodes()];
    let mut post_correct_all = vec![false; g.num_nodes()];
    let mut glance_hits = 0usize;
    let mut gnn_hits = 0usize;
    for (&v, &pred) in test_ids.iter().zip(&predictions) {
        let gnn_pred = argmax(ctx.p_h.row(v));
        gnn_correct_all[v] = gnn_pred == g.label(v);
        post_correct_all[v] = pred == g.label(v);
        gnn_hits += gnn_correct_all[v] as usize;
        glance_hits += post_correct_all[v] as usize;
    }

    // stratified views exclude isolated nodes, whose homophily is undefined
    let strat_ids: Vec<usize> = test_ids
        .iter()
        .copied()
        .filter(|&v| !g.is_isolated(v))
        .collect();
    let strat_h: Vec<f64> = strat_ids.iter().map(|&v| h_all[v]).collect();
    let glance_flags: Vec<bool> = strat_ids.iter().map(|&v| post_correct_all[v]).collect();
    let gnn_flags: Vec<bool> = strat_ids.iter().map(|&v| gnn_correct_all[v]).collect();
    let bins = stratified_accuracy(&glance_flags, &strat_h, bin_edges)?;
    let gnn_only_bins = stratified_accuracy(&gnn_flags, &strat_h, bin_edges)?;

    let routed = trace.routed_nodes();
    let routed_non_isolated: Vec<usize> = routed
        .iter()
        .copied()
        .filter(|&v| !g.is_isolated(v))
        .collect();
    let ncs_value = if routed.is_empty() {
        None
    } else {
        Some(ncs(&gnn_correct_all, &post_correct_all, &routed)?)
    };
    let benefited: Vec<bool> = (0..g.num_nodes())
        .map(|v| !gnn_correct_all[v] && post_correct_all[v])
        .collect();
    let routed_summary = if routed_non_isolated.is_empty() {
        None
    } else {
        Some(routed_homophily_summary(
            &routed_non_isolated,
            &benefited,
            &h_all,
        )?)
    };
    let routed_h: Vec<f64> = routed_non_isolated.iter().map(|&v| h_all[v]).collect();

    Ok(EvalReport {
        schema: 1,
        k_test,
        evaluated_nodes: test_ids.len(),
        overall_accuracy: glance_hits as f64 / test_ids.len() as f64,
        gnn_only_accuracy: gnn_hits as f64 / test_ids.len() as f64,
        bin_edges: bin_edges.to_vec(),
        bins,
        gnn_only_bins,
        ncs: ncs_value,
        routed_count: routed.len(),
        routed_median_homophily: median_of(&routed_h),
        dataset_median_homophily: median_of(&strat_h),
        routed_summary,
        provider_calls,
        notes: vec![
            "stratified bins and medians cover non-isolated test nodes".to_string(),
            "numerics: f64 storage and accumulation".to_string(),
        ],
    })
}

/// The Table-1-style NCS grid: every heuristic routes the top-k% of the
/// test split, routed nodes take the refiner pathway, and strategies are
/// ranked by mean NCS rank.
pub fn cmd_heuristics(cfg: &RunConfig, out: &Path, oracle_h: bool) -> Result<HeuristicGrid> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("heuristics", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let (bundle, _, refiner, gcn, q) = load_bundle(&ws)?;
    let mut eval_cfg = cfg.clone();
    eval_cfg.glance = bundle.hyper.clone();
    let ctx = precompute(&gcn, &q, &g, &precompute_settings(&eval_cfg))?;
    let provider = cfg.provider.build()?;
    let mut memo = EmbeddingMemo::new(
        bundle.prompt_seed,
        bundle.hyper.zero_empty_hops,
        bundle.class_names.clone(),
    );

    let test_ids = g.split_ids(Split::Test);
    let gnn_correct: Vec<bool> = (0..g.num_nodes())
        .map(|v| argmax(ctx.p_h.row(v)) == g.label(v))
        .collect();
    let signals = HeuristicSignals {
        degree: (0..g.num_nodes()).map(|v| g.degree(v) as f64).collect(),
        c_density: Some(c_density(
            &ctx.x,
            g.num_classes(),
            crate::rng::SeedSplitter::new(cfg.seed).derive_seed("c-density"),
        )?),
        uncertainty: Some(ctx.uncertainty.clone()),
        soft_homophily: Some(ctx.soft_h.clone()),
        relative_degree: relative_degree_all(&g),
        true_homophily: if oracle_h {
            Some(local_homophily_all(&g))
        } else {
            None
        },
    };

    let kinds: Vec<HeuristicKind> = HeuristicKind::all()
        .into_iter()
        .filter(|k| oracle_h || !k.needs_labels())
        .collect();
    let budgets = cfg.eval.heuristic_budgets.clone();
    let seed = crate::rng::SeedSplitter::new(cfg.seed).derive_seed("heuristic-random");

    // routed sets per cell, then one refiner pass over the union
    let mut cells: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut union: Vec<usize> = Vec::new();
    for kind in &kinds {
        let mut row = Vec::new();
        for &budget in &budgets {
            let routed = heuristic_route(*kind, &signals, &test_ids, budget, seed)?;
            union.extend(&routed);
            row.push(routed);
        }
        cells.push(row);
    }
    union.sort_unstable();
    union.dedup();
    let refined_correct =
        refined_correctness(&g, &ctx, &refiner, provider.as_ref(), &mut memo, &union)?;

    let mut rows = Vec::new();
    let mut score_table = Vec::new();
    for (kind, row) in kinds.iter().zip(&cells) {
        let mut ncs_row = Vec::new();
        let mut counts = Vec::new();
        for routed in row {
            let mut post = gnn_correct.clone();
            for &v in routed {
                post[v] = refined_correct[&v];
            }
            ncs_row.push(ncs(&gnn_correct, &post, routed)?);
            counts.push(routed.len());
        }
        score_table.push(MethodScores {
            name: kind.name().to_string(),
            scores: ncs_row.clone(),
        });
        rows.push(HeuristicGridRow {
            strategy: kind.name().to_string(),
            ncs: ncs_row,
            routed_counts: counts,
        });
    }
    let grid = HeuristicGrid {
        schema: 1,
        budgets,
        rows,
        average_rank: average_rank(&score_table)?,
        notes: vec![
            "budgets are fractions of the test split (frozen-expert protocol)".to_string(),
            if oracle_h {
                "true_h reads labels: oracle evaluation only".to_string()
            } else {
                "true_h omitted; pass the oracle flag to include it".to_string()
            },
        ],
    };
    std::fs::write(
        ws.root().join("heuristics.json"),
        serde_json::to_string_pretty(&grid)?,
    )?;
    std::fs::write(ws.root().join("heuristics.txt"), grid.render_text())?;
    finish(
        &ws,
        "heuristics",
        started,
        &["heuristics.json", "heuristics.txt"],
    )?;
    Ok(grid)
}

/// Refiner-pathway correctness for a set of nodes.
fn refined_correctness(
    g: &TextAttributedGraph,
    ctx: &FrozenContext,
    refiner: &RefinerModel,
    provider: &dyn EmbeddingProvider,
    memo: &mut EmbeddingMemo,
    nodes: &[usize],
) -> Result<BTreeMap<usize, bool>> {
    let mut out = BTreeMap::new();
    if nodes.is_empty() {
        return Ok(out);
    }
    let embeddings = memo.embed_nodes(g, provider, nodes)?;
    let z_g_rows: Vec<&[f64]> = nodes.iter().map(|&v| ctx.z_g.row(v)).collect();
    let z_l_rows: Vec<&[f64]> = embeddings.iter().map(|e| e.z.as_slice()).collect();
    let fused = refiner.fuse_inputs(&z_g_rows, &z_l_rows)?;
    let p_c = refine_predict(refiner, &fused)?;
    for (row, &v) in nodes.iter().enumerate() {
        out.insert(v, argmax(p_c.row(row)) == g.label(v));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub feature: String,
    pub overall_accuracy: f64,
    /// Acc_ablated - Acc_full.
    pub overall_delta: f64,
    pub low_h_accuracy: Option<f64>,
    pub low_h_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationReport {
    pub schema: u32,
    pub k_test: usize,
    pub baseline_overall: f64,
    pub baseline_low_h: Option<f64>,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "full model: overall {:.4}, low-homophily bin {}\n\n",
            self.baseline_overall,
            self.baseline_low_h
                .map(|a| format!("{a:.4}"))
                .unwrap_or_else(|| "-".into())
        ));
        out.push_str(&format!(
            "{:<18}{:>10}{:>10}{:>12}{:>12}\n",
            "dropped feature", "overall", "delta", "low-h", "low-h delta"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<18}{:>10.4}{:>+10.4}{:>12}{:>12}\n",
                row.feature,
                row.overall_accuracy,
                row.overall_delta,
                row.low_h_accuracy
                    .map(|a| format!("{a:.4}"))
                    .unwrap_or_else(|| "-".into()),
                row.low_h_delta
                    .map(|d| format!("{d:+.4}"))
                    .unwrap_or_else(|| "-".into()),
            ));
        }
        out
    }
}

/// Retrain with each routing feature dropped in turn and report the
/// accuracy deltas against the full model.
pub fn cmd_ablate(cfg: &RunConfig, out: &Path) -> Result<AblationReport> {
    let started = Instant::now();
    let ws = Workspace::new(out)?;
    let cfg = cfg.resolve();
    ws.write_resolved_config("ablate", &cfg)?;
    let (g, _) = cfg.load_graph()?;
    let (gcn, q) = load_experts(&ws)?;
    let provider_cfg = cfg.provider.clone();
    let class_names = cfg.class_names(g.num_classes());
    let k_test = cfg.glance.schedule.k_test;

    let run_variant = |ablate: Vec<String>| -> Result<EvalReport> {
        let mut variant = cfg.clone();
        variant.glance.ablate = ablate;
        let ctx = precompute(&gcn, &q, &g, &precompute_settings(&variant))?;
        let provider = provider_cfg.build()?;
        let mut memo = EmbeddingMemo::new(
            variant.sampler_seed(),
            variant.glance.zero_empty_hops,
            class_names.clone(),
        );
        let (policy, refiner, _) =
            train_glance(&g, &ctx, provider.as_ref(), &mut memo, &variant.glance)?;
        evaluate(
            &g,
            &ctx,
            &policy,
            &refiner,
            provider.as_ref(),
            &mut memo,
            k_test,
            variant.glance.batch_size,
            &variant.eval.bin_edges,
        )
    };

    let baseline = run_variant(Vec::new())?;
    let low_h_of = |report: &EvalReport| report.bins.first().and_then(|b| b.accuracy);
    let baseline_low_h = low_h_of(&baseline);
    let mut rows = Vec::new();
    for feature in crate::router::ALL_FEATURES {
        let report = run_variant(vec![feature.to_string()])?;
        let low_h = low_h_of(&report);
        rows.push(AblationRow {
            feature: feature.to_string(),
            overall_accuracy: report.overall_accuracy,
            overall_delta: report.overall_accuracy - baseline.overall_accuracy,
            low_h_accuracy: low_h,
            low_h_delta: match (low_h, baseline_low_h) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            },
        });
    }
    let report = AblationReport {
        schema: 1,
        k_test,
        baseline_overall: baseline.overall_accuracy,
        baseline_low_h,
        rows,
    };
    std::fs::write(
        ws.root().join("ablation.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    std::fs::write(ws.root().join("ablation.txt"), report.render_text())?;
    finish(&ws, "ablate", started, &["ablation.json", "ablation.txt"])?;
    Ok(report)
}

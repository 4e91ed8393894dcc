//! Evaluation: net correction score, homophily-stratified accuracy, average
//! rank, routing heuristics, and the serializable reports.

pub mod heuristics;
pub mod metrics;

pub use heuristics::{c_density, heuristic_route, Direction, HeuristicKind, HeuristicSignals};
pub use metrics::{
    average_rank, median_of, ncs, routed_homophily_summary, stratified_accuracy, BinAccuracy,
    GroupHomophilySummary, MethodRank, MethodScores, RoutedHomophilySummary,
};

use serde::{Deserialize, Serialize};

/// Full evaluation output. Serialization is struct-ordered and contains no
/// wall-clock fields, so identical runs produce byte-identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub k_test: usize,
    pub evaluated_nodes: usize,
    pub overall_accuracy: f64,
    pub gnn_only_accuracy: f64,
    pub bin_edges: Vec<f64>,
    pub bins: Vec<BinAccuracy>,
    pub gnn_only_bins: Vec<BinAccuracy>,
    pub ncs: Option<f64>,
    pub routed_count: usize,
    pub routed_median_homophily: Option<f64>,
    pub dataset_median_homophily: Option<f64>,
    pub routed_summary: Option<RoutedHomophilySummary>,
    pub provider_calls: u64,
    pub notes: Vec<String>,
}

impl EvalReport {
    /// Aligned-column text table mirroring the homophily-bin layout.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "evaluated {} test nodes, k_test {}, provider calls {}\n",
            self.evaluated_nodes, self.k_test, self.provider_calls
        ));
        out.push_str(&format!(
            "overall accuracy {:.4} (structural expert alone {:.4})\n\n",
            self.overall_accuracy, self.gnn_only_accuracy
        ));
        out.push_str(&format!(
            "{:<14}{:>10}{:>12}{:>12}{:>10}\n",
            "homophily", "nodes", "fused", "gnn-only", "delta"
        ));
        for (bin, gnn_bin) in self.bins.iter().zip(&self.gnn_only_bins) {
            let label = format!("{:.2}-{:.2}", bin.lo, bin.hi);
            match (bin.accuracy, gnn_bin.accuracy) {
                (Some(a), Some(g)) => out.push_str(&format!(
                    "{label:<14}{:>10}{:>12.4}{:>12.4}{:>+10.4}\n",
                    bin.population,
                    a,
                    g,
                    a - g
                )),
                _ => out.push_str(&format!(
                    "{label:<14}{:>10}{:>12}{:>12}{:>10}\n",
                    bin.population, "-", "-", "-"
                )),
            }
        }
        if let Some(ncs) = self.ncs {
            out.push_str(&format!(
                "\nnet correction score {ncs:.4} over {} routed nodes\n",
                self.routed_count
            ));
        }
        if let (Some(routed), Some(dataset)) =
            (self.routed_median_homophily, self.dataset_median_homophily)
        {
            out.push_str(&format!(
                "median homophily: routed {routed:.3} vs dataset {dataset:.3}\n"
            ));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

/// NCS grid over heuristic strategies and routing budgets, plus the mean
/// rank per strategy (rank 1 = best).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeuristicGrid {
    pub schema: u32,
    pub budgets: Vec<f64>,
    pub rows: Vec<HeuristicGridRow>,
    pub average_rank: Vec<MethodRank>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeuristicGridRow {
    pub strategy: String,
    pub ncs: Vec<f64>,
    pub routed_counts: Vec<usize>,
}

impl HeuristicGrid {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<14}", "strategy"));
        for b in &self.budgets {
            out.push_str(&format!("{:>12}", format!("{:.0}%", b * 100.0)));
        }
        out.push_str(&format!("{:>12}\n", "mean rank"));
        let rank_of = |name: &str| {
            self.average_rank
                .iter()
                .find(|r| r.name == name)
                .map(|r| r.mean_rank)
        };
        for row in &self.rows {
            out.push_str(&format!("{:<14}", row.strategy));
            for v in &row.ncs {
                out.push_str(&format!("{v:>12.3}"));
            }
            match rank_of(&row.strategy) {
                Some(r) => out.push_str(&format!("{r:>12.2}\n")),
                None => out.push_str(&format!("{:>12}\n", "-")),
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_serialization_is_byte_stable() {
        let report = EvalReport {
            schema: 1,
            k_test: 12,
            evaluated_nodes: 100,
            overall_accuracy: 0.91,
            gnn_only_accuracy: 0.88,
            bin_edges: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            bins: vec![],
            gnn_only_bins: vec![],
            ncs: Some(0.25),
            routed_count: 40,
            routed_median_homophily: Some(0.2),
            dataset_median_homophily: Some(0.6),
            routed_summary: None,
            provider_calls: 120,
            notes: vec!["test".into()],
        };
        let a = serde_json::to_string_pretty(&report).unwrap();
        let b = serde_json::to_string_pretty(&report).unwrap();
        assert_eq!(a, b);
        let back: EvalReport = serde_json::from_str(&a).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), a);
    }

    #[test]
    fn text_render_includes_bins() {
        let bin = BinAccuracy {
            lo: 0.0,
            hi: 0.25,
            population: 10,
            accuracy: Some(0.5),
        };
        let report = EvalReport {
            schema: 1,
            k_test: 0,
            evaluated_nodes: 10,
            overall_accuracy: 0.5,
            gnn_only_accuracy: 0.5,
            bin_edges: vec![0.0, 0.25],
            bins: vec![bin.clone()],
            gnn_only_bins: vec![bin],
            ncs: None,
            routed_count: 0,
            routed_median_homophily: None,
            dataset_median_homophily: None,
            routed_summary: None,
            provider_calls: 0,
            notes: vec![],
        };
        let text = report.render_text();
        assert!(text.contains("0.00-0.25"));
        assert!(text.contains("overall accuracy 0.5000"));
    }
}

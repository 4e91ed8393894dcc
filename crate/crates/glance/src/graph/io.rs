//! Dataset files: nodes as JSON Lines, edges as a two-column CSV.
//!
//! Node lines look like
//! `{"id": 0, "text": "...", "label": 2, "feature": [0.1, ...], "split": "train"}`
//! with `split` optional; the edges file has a `src,dst` header and one
//! undirected edge per row. All ids are 0-based.

use crate::error::{GlanceError, Result};
use crate::graph::core::{assign_splits, build_graph, NodeRecord, Split, TextAttributedGraph};
use crate::rng::SeedSplitter;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct NodeLine {
    id: usize,
    text: String,
    label: usize,
    feature: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
}

fn data_err(path: &Path, line: usize, msg: impl Into<String>) -> GlanceError {
    GlanceError::Data {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn read_nodes_jsonl(path: &Path) -> Result<Vec<NodeRecord>> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: NodeLine = serde_json::from_str(&line)
            .map_err(|e| data_err(path, i + 1, format!("bad node record: {e}")))?;
        records.push(NodeRecord {
            id: parsed.id,
            text: parsed.text,
            label: parsed.label,
            feature: parsed.feature,
            split: parsed.split,
        });
    }
    if records.is_empty() {
        return Err(data_err(path, 0, "no node records"));
    }
    Ok(records)
}

pub fn read_edges_csv(path: &Path) -> Result<Vec<(usize, usize)>> {
    if !path.exists() {
        return Err(GlanceError::MissingArtifact(path.to_path_buf()));
    }
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if i == 0 {
            if trimmed != "src,dst" {
                return Err(data_err(
                    path,
                    1,
                    format!("expected header 'src,dst', got '{trimmed}'"),
                ));
            }
            continue;
        }
        let mut parts = trimmed.split(',');
        let (src, dst) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a.trim(), b.trim()),
            _ => return Err(data_err(path, i + 1, "expected exactly two columns")),
        };
        let src: usize = src
            .parse()
            .map_err(|_| data_err(path, i + 1, format!("bad src id '{src}'")))?;
        let dst: usize = dst
            .parse()
            .map_err(|_| data_err(path, i + 1, format!("bad dst id '{dst}'")))?;
        edges.push((src, dst));
    }
    Ok(edges)
}

/// Load a dataset. Labels are checked against `num_classes` when given and
/// inferred as max+1 otherwise. Records without a split get a seeded
/// 50/25/25 assignment.
pub fn ingest_dataset(
    nodes_path: &Path,
    edges_path: &Path,
    num_classes: Option<usize>,
    split_seed: u64,
) -> Result<TextAttributedGraph> {
    let mut records = read_nodes_jsonl(nodes_path)?;
    let classes = match num_classes {
        Some(c) => {
            for (i, r) in records.iter().enumerate() {
                if r.label >= c {
                    return Err(data_err(
                        nodes_path,
                        i + 1,
                        format!("label {} out of range for {} classes", r.label, c),
                    ));
                }
            }
            c
        }
        None => records.iter().map(|r| r.label).max().unwrap_or(0) + 1,
    };
    let mut rng = SeedSplitter::new(split_seed).stream("split");
    assign_splits(&mut records, &mut rng);
    let edges = read_edges_csv(edges_path)?;
    build_graph(records, &edges, classes)
}

/// Write `nodes.jsonl` and `edges.csv` for a graph into `dir`. Output is
/// byte-stable for a fixed graph.
pub fn write_dataset(dir: &Path, g: &TextAttributedGraph) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut nodes = BufWriter::new(std::fs::File::create(dir.join("nodes.jsonl"))?);
    for v in 0..g.num_nodes() {
        let line = NodeLine {
            id: v,
            text: g.text(v).to_string(),
            label: g.label(v),
            feature: g.feature(v).to_vec(),
            split: Some(g.split(v)),
        };
        serde_json::to_writer(&mut nodes, &line)?;
        nodes.write_all(b"\n")?;
    }
    nodes.flush()?;
    let mut edges = BufWriter::new(std::fs::File::create(dir.join("edges.csv"))?);
    edges.write_all(b"src,dst\n")?;
    for &(u, v) in g.edges() {
        writeln!(edges, "{u},{v}")?;
    }
    edges.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path, with_split: bool) {
        let split = if with_split {
            r#","split":"train""#
        } else {
            ""
        };
        let nodes = format!(
            concat!(
                r#"{{"id":0,"text":"a","label":0,"feature":[1.0,0.0]{s}}}"#,
                "\n",
                r#"{{"id":1,"text":"b","label":1,"feature":[0.0,1.0]{s}}}"#,
                "\n",
                r#"{{"id":2,"text":"c","label":0,"feature":[1.0,0.0]{s}}}"#,
                "\n",
                r#"{{"id":3,"text":"d","label":1,"feature":[0.0,1.0]{s}}}"#,
                "\n",
            ),
            s = split
        );
        std::fs::write(dir.join("nodes.jsonl"), nodes).unwrap();
        std::fs::write(dir.join("edges.csv"), "src,dst\n0,1\n1,2\n2,3\n").unwrap();
    }

    #[test]
    fn fixture_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), true);
        let g = ingest_dataset(
            &dir.path().join("nodes.jsonl"),
            &dir.path().join("edges.csv"),
            None,
            0,
        )
        .unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.num_classes(), 2);

        let out = tempfile::tempdir().unwrap();
        write_dataset(out.path(), &g).unwrap();
        let g2 = ingest_dataset(
            &out.path().join("nodes.jsonl"),
            &out.path().join("edges.csv"),
            None,
            0,
        )
        .unwrap();
        assert_eq!(g2.num_nodes(), g.num_nodes());
        assert_eq!(g2.edges(), g.edges());
        for v in 0..4 {
            assert_eq!(g2.text(v), g.text(v));
            assert_eq!(g2.split(v), g.split(v));
        }
    }

    #[test]
    fn out_of_range_label_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), true);
        let err = ingest_dataset(
            &dir.path().join("nodes.jsonl"),
            &dir.path().join("edges.csv"),
            Some(1),
            0,
        )
        .unwrap_err();
        match err {
            GlanceError::Data { line, .. } => assert_eq!(line, 2),
            other => panic!("expected data error, got {other}"),
        }
    }

    #[test]
    fn malformed_node_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("nodes.jsonl"),
            "{\"id\":0,\"text\":\"a\",\"label\":0,\"feature\":[1.0]}\nnot json\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("edges.csv"), "src,dst\n").unwrap();
        let err = read_nodes_jsonl(&dir.path().join("nodes.jsonl")).unwrap_err();
        match err {
            GlanceError::Data { line, .. } => assert_eq!(line, 2),
            other => panic!("expected data error, got {other}"),
        }
    }

    #[test]
    fn omitted_split_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path(), false);
        let nodes = dir.path().join("nodes.jsonl");
        let edges = dir.path().join("edges.csv");
        let a = ingest_dataset(&nodes, &edges, None, 7).unwrap();
        let b = ingest_dataset(&nodes, &edges, None, 7).unwrap();
        for v in 0..4 {
            assert_eq!(a.split(v), b.split(v));
        }
    }

    #[test]
    fn bad_edge_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("edges.csv"), "from,to\n0,1\n").unwrap();
        assert!(read_edges_csv(&dir.path().join("edges.csv")).is_err());
    }
}

//! Serialization of ego / 1-hop / 2-hop neighborhoods into instruction
//! prompts for the embedding expert.
//!
//! Three prompts per node: the ego text alone, the ego text with up to 5
//! sampled 1-hop neighbors, and the ego text with up to 25 sampled 2-hop
//! neighbors (5 per sampled 1-hop node). Per-node text is capped at a
//! character budget and whole prompts at per-level character limits; every
//! prompt ends with the template terminator.

use crate::error::Result;
use crate::graph::{sample_khop, TextAttributedGraph};

pub const PER_NODE_CHAR_BUDGET: usize = 2000;
pub const EGO_MAX_CHARS: usize = 1024;
pub const HOP_MAX_CHARS: usize = 4096;
pub const HOP1_CAP: usize = 5;
pub const TERMINATOR: &str = "</END>";

/// Version tag mixed into cache keys so template changes invalidate old
/// cache entries.
pub const PROMPT_TEMPLATE_VERSION: &str = "glance-prompt-v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub ego: String,
    pub hop1: String,
    pub hop2: String,
    pub hop1_neighbors: usize,
    pub hop2_neighbors: usize,
}

impl PromptBundle {
    pub fn prompts(&self) -> [&str; 3] {
        [&self.ego, &self.hop1, &self.hop2]
    }
}

fn truncate_chars(text: &str, max_chars: usize) -> &str {
    match text.char_indices().nth(max_chars) {
        Some((byte, _)) => &text[..byte],
        None => text,
    }
}

fn header(class_names: &[String]) -> String {
    format!(
        "Instruct: Predict the node's category from the provided context.\n\
         Possible categories: [{}].\nQuery:\n",
        class_names.join(", ")
    )
}

const TAIL: &str = "Category?\n</END>";

/// Assemble one prompt and enforce its character limit while preserving the
/// terminator tail.
fn finish_prompt(mut body: String, max_chars: usize) -> String {
    body.push_str(TAIL);
    if body.chars().count() <= max_chars {
        return body;
    }
    let tail_chars = TAIL.chars().count();
    let keep = max_chars.saturating_sub(tail_chars + 1);
    let mut cut: String = body.chars().take(keep).collect();
    cut.push('\n');
    cut.push_str(TAIL);
    cut
}

/// Build the three prompts for node `v`. Neighbor selection goes through
/// the seeded k-hop sampler, so the bundle is a pure function of
/// (graph, node, class names, seed, caps).
pub fn serialize_prompts(
    g: &TextAttributedGraph,
    v: usize,
    class_names: &[String],
    seed: u64,
) -> Result<PromptBundle> {
    let head = header(class_names);
    let ego_text = truncate_chars(g.text(v), PER_NODE_CHAR_BUDGET);
    let ego_block = format!("EGO:\n{ego_text}\n");

    let ego = finish_prompt(format!("{head}{ego_block}"), EGO_MAX_CHARS);

    let sample = sample_khop(g, v, 2, HOP1_CAP, seed)?;
    let hop1_ids: Vec<usize> = sample
        .iter()
        .filter(|(_, hop)| *hop == 1)
        .map(|(u, _)| *u)
        .collect();
    let hop2_ids: Vec<usize> = sample
        .iter()
        .filter(|(_, hop)| *hop == 2)
        .map(|(u, _)| *u)
        .collect();

    let bullet_block = |tag: &str, ids: &[usize]| -> String {
        let mut block = format!("{tag}:\n");
        for &u in ids {
            block.push_str("- ");
            block.push_str(truncate_chars(g.text(u), PER_NODE_CHAR_BUDGET));
            block.push('\n');
        }
        block
    };

    let hop1 = finish_prompt(
        format!("{head}{ego_block}{}", bullet_block("HOP1", &hop1_ids)),
        HOP_MAX_CHARS,
    );
    let hop2 = finish_prompt(
        format!("{head}{ego_block}{}", bullet_block("HOP2", &hop2_ids)),
        HOP_MAX_CHARS,
    );

    Ok(PromptBundle {
        ego,
        hop1,
        hop2,
        hop1_neighbors: hop1_ids.len(),
        hop2_neighbors: hop2_ids.len(),
    })
}

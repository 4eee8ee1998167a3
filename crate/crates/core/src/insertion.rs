//! Undoing condensation: merged vertices are expanded into chains and the
//! single-set elements are put back on their lines.

use std::collections::HashMap;

use crate::model::{CondensedSystem, ElementId};
use crate::support::SupportGraph;

/// Replaces every kernel vertex by its merged source elements (ascending id,
/// i.e. document order). All lines through a representative run through the
/// same chain. The result is indexed by source element ids.
pub fn expand_merged(g: &SupportGraph, cs: &CondensedSystem) -> SupportGraph {
    let lines = g
        .lines()
        .iter()
        .map(|line| {
            line.iter()
                .flat_map(|&k| cs.expansion(k).iter().copied())
                .collect()
        })
        .collect();
    SupportGraph::from_lines(cs.source.element_count(), lines)
}

/// Prepends each set's single-set elements (input order) to its line.
pub fn insert_first_viable(g: &SupportGraph, cs: &CondensedSystem) -> SupportGraph {
    let lines = g
        .lines()
        .iter()
        .enumerate()
        .map(|(s, line)| {
            let mut out = cs.singles_map[s].clone();
            out.extend_from_slice(line);
            out
        })
        .collect();
    SupportGraph::from_lines(g.vertex_count(), lines)
}

/// Prepends the first `ceil(m/2)` single-set elements of each set and
/// subdivides the edges used by that set alone with the rest, round-robin in
/// line order. Without such edges all `m` are prepended.
pub fn insert_split(g: &SupportGraph, cs: &CondensedSystem) -> SupportGraph {
    let usage = g.lines_per_edge();
    let lines = g
        .lines()
        .iter()
        .enumerate()
        .map(|(s, line)| {
            let singles = &cs.singles_map[s];
            // positions i such that (line[i], line[i+1]) is exclusive to this line
            let candidates: Vec<usize> = line
                .windows(2)
                .enumerate()
                .filter(|(_, w)| {
                    let e = g.edge_index(w[0], w[1]).expect("line edge");
                    usage[e].len() == 1
                })
                .map(|(i, _)| i)
                .collect();
            let keep = if candidates.is_empty() {
                singles.len()
            } else {
                singles.len().div_ceil(2)
            };
            let mut inside: HashMap<usize, Vec<ElementId>> = HashMap::new();
            for (k, &e) in singles[keep..].iter().enumerate() {
                inside
                    .entry(candidates[k % candidates.len()])
                    .or_default()
                    .push(e);
            }
            let mut out: Vec<ElementId> = singles[..keep].to_vec();
            for (i, &v) in line.iter().enumerate() {
                out.push(v);
                if let Some(extra) = inside.get(&i) {
                    out.extend_from_slice(extra);
                }
            }
            out
        })
        .collect();
    SupportGraph::from_lines(g.vertex_count(), lines)
}

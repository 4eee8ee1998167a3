//! Quality measures of a finished map.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geometry::{octilinear_deviation_deg, segments_cross_properly};
use crate::layout::EmbeddedMap;
use crate::lines::{count_line_crossings, LineOrderMap};
use crate::model::ElementId;

/// Wall-clock seconds per pipeline stage, in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunningTime {
    pub stages: Vec<StageTime>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub avg_octolinearity: f64,
    pub max_octolinearity: f64,
    pub avg_edge_uniformity: f64,
    pub max_edge_uniformity: f64,
    pub monotonicity: usize,
    pub gabriel_score: usize,
    pub consecutive_ones: usize,
    pub edge_crossings: usize,
    pub self_crossings: usize,
    pub line_crossings: usize,
    /// Absent unless timings were requested; they make output
    /// run-dependent.
    pub running_time: Option<RunningTime>,
}

impl MetricReport {
    pub fn compute(m: &EmbeddedMap, orders: &LineOrderMap) -> Self {
        let (avg_octolinearity, max_octolinearity) = octolinearity(m);
        let (avg_edge_uniformity, max_edge_uniformity) = edge_uniformity(m);
        let (edge_crossings, self_crossings) = geometric_crossings(m);
        Self {
            avg_octolinearity,
            max_octolinearity,
            avg_edge_uniformity,
            max_edge_uniformity,
            monotonicity: monotonicity(m),
            gabriel_score: gabriel_score(m),
            consecutive_ones: consecutive_ones_score(m),
            edge_crossings,
            self_crossings,
            line_crossings: count_line_crossings(m, orders),
            running_time: None,
        }
    }

    pub const FIELDS: [&'static str; 11] = [
        "avg_octolinearity",
        "max_octolinearity",
        "avg_edge_uniformity",
        "max_edge_uniformity",
        "monotonicity",
        "gabriel_score",
        "consecutive_ones",
        "edge_crossings",
        "self_crossings",
        "line_crossings",
        "running_time_total",
    ];

    /// Values in [`Self::FIELDS`] order; a missing running time is empty.
    pub fn values(&self) -> Vec<String> {
        vec![
            self.avg_octolinearity.to_string(),
            self.max_octolinearity.to_string(),
            self.avg_edge_uniformity.to_string(),
            self.max_edge_uniformity.to_string(),
            self.monotonicity.to_string(),
            self.gabriel_score.to_string(),
            self.consecutive_ones.to_string(),
            self.edge_crossings.to_string(),
            self.self_crossings.to_string(),
            self.line_crossings.to_string(),
            self.running_time
                .as_ref()
                .map_or(String::new(), |t| t.total.to_string()),
        ]
    }
}

/// Average and maximum deviation (degrees) of edges from the nearest
/// multiple of 45°.
pub fn octolinearity(m: &EmbeddedMap) -> (f64, f64) {
    let devs: Vec<f64> = m
        .support
        .edges()
        .iter()
        .map(|&(u, v)| octilinear_deviation_deg((m.pos(v) - m.pos(u)).angle_deg()))
        .collect();
    mean_max(&devs)
}

/// Average and maximum of `|len / mean_len - 1|` over edges.
pub fn edge_uniformity(m: &EmbeddedMap) -> (f64, f64) {
    let mean = m.mean_edge_length();
    if mean <= 0.0 {
        return (0.0, 0.0);
    }
    let devs: Vec<f64> = (0..m.support.edges().len())
        .map(|e| (m.edge_length(e) / mean - 1.0).abs())
        .collect();
    mean_max(&devs)
}

fn mean_max(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = xs.iter().sum();
    (sum / xs.len() as f64, xs.iter().cloned().fold(0.0, f64::max))
}

/// Number of times a line's edges turn against its end-to-end vector,
/// summed over lines. Orientation starts positive; edges perpendicular to
/// the vector keep the previous orientation.
pub fn line_monotonicity(m: &EmbeddedMap, line: &[ElementId]) -> usize {
    if line.len() < 2 {
        return 0;
    }
    let crow = m.pos(line[line.len() - 1]) - m.pos(line[0]);
    if crow.norm() == 0.0 {
        return 0;
    }
    let mut positive = true;
    let mut count = 0;
    for w in line.windows(2) {
        let d = (m.pos(w[1]) - m.pos(w[0])).dot(crow);
        if d < 0.0 && positive {
            count += 1;
            positive = false;
        } else if d > 0.0 {
            positive = true;
        }
    }
    count
}

pub fn monotonicity(m: &EmbeddedMap) -> usize {
    m.support.lines().iter().map(|l| line_monotonicity(m, l)).sum()
}

/// Pairs (vertex, edge) with the vertex off the edge but inside or on the
/// circle having the edge as diameter.
pub fn gabriel_score(m: &EmbeddedMap) -> usize {
    let vertices = m.support.vertices();
    let mut count = 0;
    for &(u, v) in m.support.edges() {
        let (pu, pv) = (m.pos(u), m.pos(v));
        for &w in &vertices {
            if w == u || w == v {
                continue;
            }
            let pw = m.pos(w);
            if (pu - pw).dot(pv - pw) <= 0.0 {
                count += 1;
            }
        }
    }
    count
}

/// For every pair of lines: connected pieces of their shared vertices, linked
/// by edges both lines use, minus one.
pub fn consecutive_ones_score(m: &EmbeddedMap) -> usize {
    let g = &m.support;
    let lines = g.lines();
    let usage = g.lines_per_edge();
    let n = g.vertex_count();
    let mut total = 0;
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let mut in_b = vec![false; n];
            for v in &lines[b] {
                in_b[v.0] = true;
            }
            let shared: Vec<usize> = lines[a].iter().filter(|v| in_b[v.0]).map(|v| v.0).collect();
            if shared.is_empty() {
                continue;
            }
            // union-find over shared vertices
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                let mut y = x;
                while p[y] != r {
                    let next = p[y];
                    p[y] = r;
                    y = next;
                }
                r
            }
            let mut pieces = shared.len();
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                let used = usage[e].iter().any(|s| s.0 == a) && usage[e].iter().any(|s| s.0 == b);
                if used {
                    let (ru, rv) = (find(&mut parent, u.0), find(&mut parent, v.0));
                    if ru != rv {
                        parent[ru] = rv;
                        pieces -= 1;
                    }
                }
            }
            total += pieces - 1;
        }
    }
    total
}

/// Proper crossings between support edges without a common endpoint, and
/// between non-consecutive segments of the same line.
pub fn geometric_crossings(m: &EmbeddedMap) -> (usize, usize) {
    let edges = m.support.edges();
    let mut edge_crossings = 0;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            if a == c || a == d || b == c || b == d {
                continue;
            }
            if segments_cross_properly(m.pos(a), m.pos(b), m.pos(c), m.pos(d)) {
                edge_crossings += 1;
            }
        }
    }
    let mut self_crossings = 0;
    for line in m.support.lines() {
        for i in 0..line.len().saturating_sub(1) {
            for j in i + 2..line.len().saturating_sub(1) {
                if segments_cross_properly(m.pos(line[i]), m.pos(line[i + 1]), m.pos(line[j]), m.pos(line[j + 1])) {
                    self_crossings += 1;
                }
            }
        }
    }
    (edge_crossings, self_crossings)
}

/// Collects stage timings into the reported form.
pub fn timing_capture(stages: &[(&str, Duration)]) -> RunningTime {
    let stages: Vec<StageTime> = stages
        .iter()
        .map(|(name, d)| StageTime {
            stage: name.to_string(),
            seconds: d.as_secs_f64(),
        })
        .collect();
    let total = stages.iter().map(|s| s.seconds).sum();
    RunningTime { stages, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::support::SupportGraph;

    fn map(points: &[(f64, f64)], lines: Vec<Vec<usize>>) -> EmbeddedMap {
        let lines = lines.into_iter().map(|l| l.into_iter().map(ElementId).collect()).collect();
        let g = SupportGraph::from_lines(points.len(), lines);
        EmbeddedMap::new(g, points.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    #[test]
    fn octolinearity_of_one_skewed_edge() {
        let m = map(&[(0.0, 0.0), (50f64.to_radians().cos(), 50f64.to_radians().sin())], vec![vec![0, 1]]);
        let (avg, max) = octolinearity(&m);
        assert!((avg - 5.0).abs() < 1e-9 && (max - 5.0).abs() < 1e-9);
    }

    #[test]
    fn uniformity_arithmetic() {
        let m = map(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (6.0, 0.0)], vec![vec![0, 1, 2, 3]]);
        let (avg, max) = edge_uniformity(&m);
        assert!((avg - 2.0 / 3.0).abs() < 1e-12);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_timing_is_zero() {
        assert_eq!(timing_capture(&[]).total, 0.0);
    }

    #[test]
    fn shared_corridors_counted() {
        // lines share 0-1 and 3-4, separated by different middle routes
        let pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (2.0, -1.0), (3.0, 0.0), (4.0, 0.0)];
        let m = map(&pts, vec![vec![0, 1, 2, 4, 5], vec![0, 1, 3, 4, 5]]);
        assert_eq!(consecutive_ones_score(&m), 1);
        let m = map(&pts, vec![vec![0, 1, 2, 4, 5], vec![0, 1, 2, 4]]);
        assert_eq!(consecutive_ones_score(&m), 0);
    }
}

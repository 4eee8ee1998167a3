//! Initial embeddings of a support graph.
//!
//! * [`mds_seed`]: classical multidimensional scaling of hop distances.
//! * [`spring_layout`]: Fruchterman–Reingold forces with a per-vertex
//!   adaptive temperature (oscillation and rotation damping).
//! * [`stress_layout`]: stress majorization with `w = d^-2`, updated one
//!   vertex at a time so the stress never increases.
//! * [`refine_paths`]: alternately re-solves every line as a TSP path over the
//!   current geometry and re-runs the stress layout.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::model::{ElementId, SetSystem};
use crate::support::{two_opt_path, CostMatrix, SupportGraph};

/// A support graph with planar coordinates, indexed by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedMap {
    pub support: SupportGraph,
    pub positions: Vec<Point>,
}

impl EmbeddedMap {
    pub fn new(support: SupportGraph, positions: Vec<Point>) -> Self {
        assert_eq!(support.vertex_count(), positions.len());
        Self { support, positions }
    }

    pub fn pos(&self, v: ElementId) -> Point {
        self.positions[v.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (u, v) = self.support.edges()[e];
        self.pos(u).dist(self.pos(v))
    }

    pub fn mean_edge_length(&self) -> f64 {
        crate::geometry::mean_edge_length(&self.positions, &self.support.edge_pairs())
    }

    /// Euclidean length of one line.
    pub fn line_length(&self, line: &[ElementId]) -> f64 {
        line.windows(2).map(|w| self.pos(w[0]).dist(self.pos(w[1]))).sum()
    }
}

/// How the spring embedder places vertices before iterating.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPositions {
    Mds,
    /// Uniform in the unit square.
    Random { seed: u64 },
    Given(Vec<Point>),
}

/// Hop distances between the listed vertices. Unreachable pairs get the
/// largest finite distance plus one.
pub fn hop_distances(g: &SupportGraph, vertices: &[ElementId]) -> Vec<Vec<f64>> {
    let adj = g.adjacency();
    let mut local = vec![usize::MAX; g.vertex_count()];
    for (i, v) in vertices.iter().enumerate() {
        local[v.0] = i;
    }
    let n = vertices.len();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut queue = VecDeque::new();
    for (i, src) in vertices.iter().enumerate() {
        let row = &mut dist[i];
        row[i] = 0.0;
        queue.clear();
        queue.push_back(src.0);
        while let Some(u) = queue.pop_front() {
            let du = row[local[u]];
            for &w in &adj[u] {
                let lw = local[w];
                if lw != usize::MAX && row[lw].is_infinite() {
                    row[lw] = du + 1.0;
                    queue.push_back(w);
                }
            }
        }
    }
    let max = dist
        .iter()
        .flatten()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    for d in dist.iter_mut().flatten() {
        if d.is_infinite() {
            *d = max + 1.0;
        }
    }
    dist
}

/// Classical MDS of hop distances into the plane, scaled by `ideal_len`.
/// Each eigenvector is flipped so its first non-negligible entry is positive.
pub fn mds_seed(g: &SupportGraph, ideal_len: f64) -> Vec<Point> {
    let vertices = g.vertices();
    let n = vertices.len();
    let mut positions = vec![Point::ZERO; g.vertex_count()];
    if n < 2 {
        return positions;
    }
    let d = hop_distances(g, &vertices);
    let sq = DMatrix::from_fn(n, n, |i, j| d[i][j] * d[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let total_mean = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + total_mean)
    });
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]].max(0.0);
    let mut axes = [vec![0.0; n], vec![0.0; n]];
    for (axis, &k) in axes.iter_mut().zip(&order) {
        // numerically zero eigenvalues carry no geometry
        let lambda = eig.eigenvalues[k];
        let lambda = if lambda > 1e-9 * top { lambda } else { 0.0 };
        let scale = lambda.sqrt();
        let col = eig.eigenvectors.column(k);
        let sign = col
            .iter()
            .find(|x| x.abs() > 1e-9)
            .map_or(1.0, |x| x.signum());
        for i in 0..n {
            axis[i] = sign * col[i] * scale;
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        positions[v.0] = Point::new(axes[0][i], axes[1][i]) * ideal_len;
    }
    separate_coincident(&mut positions, &vertices);
    positions
}

/// Pushes apart vertices closer than `1e-6` of the bounding-box diagonal.
pub fn separate_coincident(positions: &mut [Point], vertices: &[ElementId]) {
    if vertices.len() < 2 {
        return;
    }
    let pts: Vec<Point> = vertices.iter().map(|v| positions[v.0]).collect();
    let bb = crate::geometry::Rect::from_points(&pts);
    let diag = bb.width().hypot(bb.height());
    let eps = if diag > 0.0 { 1e-6 * diag } else { 1e-6 };
    for round in 0..3 {
        let mut moved = false;
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let (a, b) = (vertices[i].0, vertices[j].0);
                if positions[a].dist(positions[b]) < eps {
                    // golden-angle offsets keep the nudges distinct
                    let angle = (j as f64 + round as f64 * 0.5) * 2.399_963_229_728_653;
                    positions[b] += Point::new(angle.cos(), angle.sin()) * (2.0 * eps);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

/// Per-vertex temperatures that grow while a vertex keeps moving the same
/// way and shrink when it oscillates or rotates.
#[derive(Debug, Clone)]
pub(crate) struct AdaptiveTemperature {
    temp: Vec<f64>,
    last: Vec<Point>,
    min: f64,
    max: f64,
}

impl AdaptiveTemperature {
    pub(crate) fn new(n: usize, initial: f64, min: f64, max: f64) -> Self {
        Self {
            temp: vec![initial; n],
            last: vec![Point::ZERO; n],
            min,
            max,
        }
    }

    /// Turns a force into a displacement, updating the vertex temperature.
    pub(crate) fn step(&mut self, v: usize, force: Point) -> Point {
        let f = force.norm();
        if f == 0.0 || !f.is_finite() {
            self.last[v] = Point::ZERO;
            return Point::ZERO;
        }
        let prev = self.last[v];
        let pn = prev.norm();
        if pn > 0.0 {
            let cos = force.dot(prev) / (f * pn);
            let t = &mut self.temp[v];
            if cos > 0.7 {
                *t *= 1.15;
            } else if cos < -0.7 {
                *t *= 0.5;
            } else {
                *t *= 0.85;
            }
            *t = t.clamp(self.min, self.max);
        }
        self.last[v] = force;
        force * (self.temp[v].min(f) / f)
    }
}

pub const SPRING_MAX_ITERATIONS: usize = 5000;

/// Scales raw spring forces before the temperature limit is applied.
const SPRING_STEP: f64 = 0.1;

/// Fruchterman–Reingold attraction/repulsion for all vertices, accumulated
/// into `forces`.
fn spring_forces(
    positions: &[Point],
    vertices: &[ElementId],
    edges: &[(usize, usize)],
    k: f64,
    forces: &mut [Point],
) {
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let (a, b) = (vertices[i].0, vertices[j].0);
            let delta = positions[a] - positions[b];
            let d = delta.norm().max(1e-9 * k);
            let push = delta * (k * k / (d * d));
            forces[a] += push;
            forces[b] -= push;
        }
    }
    for &(u, v) in edges {
        let delta = positions[u] - positions[v];
        let d = delta.norm();
        let pull = delta * (d / k);
        forces[u] -= pull;
        forces[v] += pull;
    }
}

/// Spring embedder with an unrestricted drawing area. Stops when the largest
/// displacement falls below `1e-3 * ideal_len` or after 5000 iterations.
pub fn spring_layout(
    g: &SupportGraph,
    init: InitialPositions,
    ideal_len: f64,
) -> EmbeddedMap {
    let vertices = g.vertices();
    let mut positions = match init {
        InitialPositions::Mds => mds_seed(g, ideal_len),
        InitialPositions::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = vec![Point::ZERO; g.vertex_count()];
            for v in &vertices {
                p[v.0] = Point::new(rng.random::<f64>(), rng.random::<f64>());
            }
            p
        }
        InitialPositions::Given(p) => p,
    };
    separate_coincident(&mut positions, &vertices);
    let edges = g.edge_pairs();
    let k = ideal_len;
    let mut temp = AdaptiveTemperature::new(g.vertex_count(), 0.5 * k, 1e-6 * k, 2.0 * k);
    let mut forces = vec![Point::ZERO; g.vertex_count()];
    for _ in 0..SPRING_MAX_ITERATIONS {
        forces.iter_mut().for_each(|f| *f = Point::ZERO);
        spring_forces(&positions, &vertices, &edges, k, &mut forces);
        let mut max_move: f64 = 0.0;
        for v in &vertices {
            let d = temp.step(v.0, forces[v.0] * SPRING_STEP);
            positions[v.0] += d;
            max_move = max_move.max(d.norm());
        }
        if max_move < 1e-3 * k {
            break;
        }
    }
    separate_coincident(&mut positions, &vertices);
    EmbeddedMap::new(g.clone(), positions)
}

pub const STRESS_MAX_ITERATIONS: usize = 300;
pub const STRESS_TOLERANCE: f64 = 1e-4;

pub(crate) struct StressModel {
    pub(crate) vertices: Vec<ElementId>,
    target: Vec<Vec<f64>>,
    weight: Vec<Vec<f64>>,
}

impl StressModel {
    pub(crate) fn new(g: &SupportGraph, ideal_len: f64) -> Self {
        let vertices = g.vertices();
        let hops = hop_distances(g, &vertices);
        let target: Vec<Vec<f64>> = hops
            .iter()
            .map(|row| row.iter().map(|h| h * ideal_len).collect())
            .collect();
        let weight = target
            .iter()
            .map(|row| row.iter().map(|&d| if d > 0.0 { 1.0 / (d * d) } else { 0.0 }).collect())
            .collect();
        Self {
            vertices,
            target,
            weight,
        }
    }

    fn stress(&self, positions: &[Point]) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = positions[self.vertices[i].0].dist(positions[self.vertices[j].0]);
                let r = d - self.target[i][j];
                s += self.weight[i][j] * r * r;
            }
        }
        s
    }

    /// Offset of every vertex to its single-vertex majorization update, all
    /// taken from the same coordinates.
    pub(crate) fn pulls(&self, positions: &[Point], out: &mut [Point]) {
        let n = self.vertices.len();
        for i in 0..n {
            let xi = positions[self.vertices[i].0];
            let mut acc = Point::ZERO;
            let mut wsum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.weight[i][j];
                let xj = positions[self.vertices[j].0];
                let delta = xi - xj;
                let d = delta.norm();
                let dir = if d > 0.0 { delta / d } else { Point::ZERO };
                acc += (xj + dir * self.target[i][j]) * w;
                wsum += w;
            }
            out[self.vertices[i].0] = if wsum > 0.0 { acc / wsum - xi } else { Point::ZERO };
        }
    }

    /// One sweep of single-vertex majorization updates.
    fn sweep(&self, positions: &mut [Point]) {
        let n = self.vertices.len();
        for i in 0..n {
            let xi = positions[self.vertices[i].0];
            let mut acc = Point::ZERO;
            let mut wsum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = self.weight[i][j];
                let xj = positions[self.vertices[j].0];
                let delta = xi - xj;
                let d = delta.norm();
                let dir = if d > 0.0 { delta / d } else { Point::ZERO };
                acc += (xj + dir * self.target[i][j]) * w;
                wsum += w;
            }
            if wsum > 0.0 {
                positions[self.vertices[i].0] = acc / wsum;
            }
        }
    }
}

/// Weighted stress `sum w (|p_u - p_v| - d)^2` of a layout, with `d` the hop
/// distance times `ideal_len` and `w = d^-2`.
pub fn layout_stress(g: &SupportGraph, positions: &[Point], ideal_len: f64) -> f64 {
    StressModel::new(g, ideal_len).stress(positions)
}

/// Stress majorization from `init`. Returns the map and the stress after
/// every iteration (the first entry is the initial stress).
pub fn stress_layout_traced(
    g: &SupportGraph,
    init: &[Point],
    ideal_len: f64,
) -> (EmbeddedMap, Vec<f64>) {
    let model = StressModel::new(g, ideal_len);
    let mut positions = init.to_vec();
    separate_coincident(&mut positions, &model.vertices);
    let mut trace = vec![model.stress(&positions)];
    for _ in 0..STRESS_MAX_ITERATIONS {
        model.sweep(&mut positions);
        let s = model.stress(&positions);
        let prev = *trace.last().expect("initial stress");
        trace.push(s);
        if prev <= 0.0 || (prev - s) / prev < STRESS_TOLERANCE {
            break;
        }
    }
    separate_coincident(&mut positions, &model.vertices);
    (EmbeddedMap::new(g.clone(), positions), trace)
}

pub fn stress_layout(g: &SupportGraph, init: &[Point], ideal_len: f64) -> EmbeddedMap {
    stress_layout_traced(g, init, ideal_len).0
}

/// What happened to the lines in one reordering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinePass {
    /// Costs were plain Euclidean distances (otherwise the geometric mean of
    /// `1/similarity` and distance).
    pub euclidean: bool,
    /// Euclidean line lengths before and after reordering, same coordinates.
    pub lengths_before: Vec<f64>,
    pub lengths_after: Vec<f64>,
    pub changed: bool,
}

/// Upper bound on reorder/relayout cycles in the closing Euclidean phase.
const EUCLIDEAN_PHASE_CAP: usize = 4;

fn reorder_lines(map: &EmbeddedMap, system: &SetSystem, euclidean: bool) -> (Vec<Vec<ElementId>>, RefinePass) {
    let mut lines = Vec::with_capacity(map.support.lines().len());
    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut changed = false;
    for line in map.support.lines() {
        let c = CostMatrix::from_fn(line.len(), |i, j| {
            let d = map.pos(line[i]).dist(map.pos(line[j]));
            if euclidean {
                d
            } else {
                let sim = system.similarity_unchecked(line[i], line[j]).max(1) as f64;
                (d / sim).sqrt()
            }
        });
        let start: Vec<usize> = (0..line.len()).collect();
        let order = two_opt_path(&start, &c);
        let new_line: Vec<ElementId> = order.into_iter().map(|i| line[i]).collect();
        before.push(map.line_length(line));
        after.push(map.line_length(&new_line));
        changed |= new_line != *line;
        lines.push(new_line);
    }
    (
        lines,
        RefinePass {
            euclidean,
            lengths_before: before,
            lengths_after: after,
            changed,
        },
    )
}

/// Repeated path refinement. Runs up to `rounds - 1` mixed-cost passes (each
/// followed by a stress relayout, stopping early once no line changes), then
/// a Euclidean phase that reorders until the lines are two-optimal under the
/// final coordinates.
pub fn refine_paths_traced(
    map: &EmbeddedMap,
    system: &SetSystem,
    rounds: usize,
    ideal_len: f64,
) -> (EmbeddedMap, Vec<RefinePass>) {
    let mut current = map.clone();
    let mut passes = Vec::new();
    for _ in 0..rounds.saturating_sub(1) {
        let (lines, pass) = reorder_lines(&current, system, false);
        let changed = pass.changed;
        passes.push(pass);
        if !changed {
            break;
        }
        let g = SupportGraph::from_lines(current.support.vertex_count(), lines);
        current = stress_layout(&g, &current.positions, ideal_len);
    }
    if rounds == 0 {
        return (current, passes);
    }
    for i in 0..EUCLIDEAN_PHASE_CAP {
        let (lines, pass) = reorder_lines(&current, system, true);
        let changed = pass.changed;
        passes.push(pass);
        if !changed {
            break;
        }
        let g = SupportGraph::from_lines(current.support.vertex_count(), lines);
        if i + 1 == EUCLIDEAN_PHASE_CAP {
            // keep the coordinates the lines were optimized for
            current = EmbeddedMap::new(g, current.positions);
            break;
        }
        current = stress_layout(&g, &current.positions, ideal_len);
    }
    (current, passes)
}

pub fn refine_paths(map: &EmbeddedMap, system: &SetSystem, rounds: usize, ideal_len: f64) -> EmbeddedMap {
    refine_paths_traced(map, system, rounds, ideal_len).0
}

//! Path-based supports: for every set an ordering of its elements, such that
//! the union of consecutive pairs forms the support graph.
//!
//! Two extractors are provided. The similarity route solves one travelling
//! salesperson *path* per set with costs `1 / similarity`, using a
//! nearest-neighbour start and best-improvement two-opt. The consecutive-ones
//! route finds one global vertex order by annealing a tour through the
//! incidence-matrix columns (plus an all-zero dummy column) and cuts every set
//! out of it.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ElementId, SetId, SetSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostMatrixError {
    #[error("cost matrix has {got} entries, expected {n}x{n}")]
    Shape { n: usize, got: usize },
    #[error("cost ({i},{j}) is not a finite non-negative number")]
    Invalid { i: usize, j: usize },
    #[error("cost matrix is not symmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },
    #[error("cost matrix has a non-zero diagonal at {0}")]
    Diagonal(usize),
}

/// Symmetric, finite, non-negative costs with a zero diagonal. Need not be metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, CostMatrixError> {
        if data.len() != n * n {
            return Err(CostMatrixError::Shape { n, got: data.len() });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(CostMatrixError::Diagonal(i));
            }
            for j in 0..n {
                let c = data[i * n + j];
                if !c.is_finite() || c < 0.0 {
                    return Err(CostMatrixError::Invalid { i, j });
                }
                if c != data[j * n + i] {
                    return Err(CostMatrixError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a pair cost function evaluated for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let c = f(i, j);
                data[i * n + j] = c;
                data[j * n + i] = c;
            }
        }
        Self::new(n, data).expect("pair costs must be finite and non-negative")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Mean of the off-diagonal entries.
    pub fn mean_cost(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / (self.n * (self.n - 1)) as f64
    }
}

/// Total cost of an open path.
pub fn path_cost(path: &[usize], c: &CostMatrix) -> f64 {
    path.windows(2).map(|w| c.get(w[0], w[1])).sum()
}

/// Total cost of a closed tour.
pub fn tour_cost(tour: &[usize], c: &CostMatrix) -> f64 {
    if tour.len() < 2 {
        return 0.0;
    }
    path_cost(tour, c) + c.get(tour[tour.len() - 1], tour[0])
}

/// Greedy path: from `start`, repeatedly move to the cheapest unvisited
/// vertex; ties go to the lowest index.
pub fn nearest_neighbor_path(c: &CostMatrix, start: usize) -> Vec<usize> {
    let n = c.len();
    assert!(start < n, "start vertex out of range");
    let mut visited = vec![false; n];
    let mut path = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    path.push(cur);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if visited[v] {
                continue;
            }
            if best.is_none_or(|b| c.get(cur, v) < c.get(cur, b)) {
                best = Some(v);
            }
        }
        let next = best.expect("unvisited vertex remains");
        visited[next] = true;
        path.push(next);
        cur = next;
    }
    path
}

/// Cost change from reversing `path[i..=j]` of an open path.
#[inline]
fn reversal_delta(path: &[usize], i: usize, j: usize, c: &CostMatrix) -> f64 {
    let n = path.len();
    let mut delta = 0.0;
    if i > 0 {
        delta += c.get(path[i - 1], path[j]) - c.get(path[i - 1], path[i]);
    }
    if j + 1 < n {
        delta += c.get(path[i], path[j + 1]) - c.get(path[j], path[j + 1]);
    }
    delta
}

fn improvement_eps(path: &[usize], c: &CostMatrix) -> f64 {
    1e-12 * (1.0 + path_cost(path, c))
}

/// The best improving segment reversal of an open path, if any.
pub fn best_two_opt_move(path: &[usize], c: &CostMatrix) -> Option<(usize, usize, f64)> {
    let n = path.len();
    let eps = improvement_eps(path, c);
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            if i == 0 && j + 1 == n {
                continue;
            }
            let d = reversal_delta(path, i, j, c);
            if d < -eps && best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// Best-improvement two-opt on an open path. Every pass applies the segment
/// reversal with the largest gain, until no reversal improves the cost.
pub fn two_opt_path(initial: &[usize], c: &CostMatrix) -> Vec<usize> {
    let mut path = initial.to_vec();
    while let Some((i, j, _)) = best_two_opt_move(&path, c) {
        path[i..=j].reverse();
    }
    path
}

/// A vertex order: `order[position] = vertex`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; order.len()];
        for &v in &order {
            if v >= order.len() || std::mem::replace(&mut seen[v], true) {
                return None;
            }
        }
        Some(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Inverse map, `positions()[vertex] = position`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupportError {
    #[error("support has {got} lines but the system has {expected} sets")]
    LineCount { expected: usize, got: usize },
    #[error("line {0} does not visit exactly the members of its set")]
    WrongMembers(SetId),
}

/// A graph in which every set induces a Hamiltonian path (its line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGraph {
    vertex_count: usize,
    lines: Vec<Vec<ElementId>>,
    edges: Vec<(ElementId, ElementId)>,
}

impl SupportGraph {
    /// Builds the support from per-set vertex orders over an id space of
    /// `vertex_count` vertices. Edges are the consecutive pairs, normalized
    /// to `(low, high)` and sorted.
    pub fn from_lines(vertex_count: usize, lines: Vec<Vec<ElementId>>) -> Self {
        let mut edges = BTreeSet::new();
        for line in &lines {
            for w in line.windows(2) {
                assert!(w[0] != w[1], "line repeats a vertex");
                edges.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        Self {
            vertex_count,
            lines,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn lines(&self) -> &[Vec<ElementId>] {
        &self.lines
    }

    pub fn line(&self, s: SetId) -> &[ElementId] {
        &self.lines[s.0]
    }

    pub fn edges(&self) -> &[(ElementId, ElementId)] {
        &self.edges
    }

    /// Edges as plain index pairs.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u.0, v.0)).collect()
    }

    pub fn edge_index(&self, a: ElementId, b: ElementId) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Vertices that appear on at least one line, ascending.
    pub fn vertices(&self) -> Vec<ElementId> {
        let set: BTreeSet<ElementId> = self.lines.iter().flatten().copied().collect();
        set.into_iter().collect()
    }

    /// Neighbour lists over the full id space.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u.0].push(v.0);
            adj[v.0].push(u.0);
        }
        adj
    }

    /// Lines using each edge, ascending by set id.
    pub fn lines_per_edge(&self) -> Vec<Vec<SetId>> {
        let mut out = vec![Vec::new(); self.edges.len()];
        for (s, line) in self.lines.iter().enumerate() {
            for w in line.windows(2) {
                let e = self.edge_index(w[0], w[1]).expect("line edge exists");
                out[e].push(SetId(s));
            }
        }
        out
    }

    /// Checks that every line visits exactly the members of its set.
    pub fn validate(&self, system: &SetSystem) -> Result<(), SupportError> {
        if self.lines.len() != system.set_count() {
            return Err(SupportError::LineCount {
                expected: system.set_count(),
                got: self.lines.len(),
            });
        }
        for s in system.sets() {
            let mut line = self.lines[s.0].clone();
            line.sort_unstable();
            if line != system.members(s) {
                return Err(SupportError::WrongMembers(s));
            }
        }
        Ok(())
    }
}

/// Orders one set by a similarity TSP path: cost `1 / similarity`, greedy
/// start at the set's first vertex, then two-opt.
fn similarity_path(system: &SetSystem, members: &[ElementId]) -> Vec<ElementId> {
    let c = CostMatrix::from_fn(members.len(), |i, j| {
        // members of one set share at least that set
        1.0 / system.similarity_unchecked(members[i], members[j]) as f64
    });
    let path = two_opt_path(&nearest_neighbor_path(&c, 0), &c);
    path.into_iter().map(|i| members[i]).collect()
}

/// Similarity-TSP support over a (kernel) system.
pub fn extract_support_two_opt(system: &SetSystem) -> SupportGraph {
    let lines = system
        .sets()
        .map(|s| {
            let members = system.members(s);
            if members.is_empty() {
                Vec::new()
            } else {
                similarity_path(system, members)
            }
        })
        .collect();
    SupportGraph::from_lines(system.element_count(), lines)
}

/// Column-distance costs for the consecutive-ones tour: entry `(i, j)` is the
/// Euclidean distance between incidence vectors. The last index is a dummy
/// vertex with the all-zero vector.
pub fn c1p_cost_matrix(system: &SetSystem) -> CostMatrix {
    let n = system.element_count();
    let sigs: Vec<_> = system.elements().map(|e| system.signature_unchecked(e)).collect();
    CostMatrix::from_fn(n + 1, |i, j| {
        let d = if j == n {
            sigs[i].count_ones()
        } else {
            sigs[i].hamming(&sigs[j])
        };
        (d as f64).sqrt()
    })
}

/// Parameters of the annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    /// Number of sweeps; one sweep proposes `n` random segment reversals.
    pub sweeps: usize,
    /// Geometric cooling factor per sweep.
    pub cooling: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            sweeps: 500,
            cooling: 0.995,
        }
    }
}

#[inline]
fn cycle_reversal_delta(t: &[usize], i: usize, j: usize, c: &CostMatrix) -> f64 {
    let n = t.len();
    let prev = t[(i + n - 1) % n];
    let next = t[(j + 1) % n];
    c.get(prev, t[j]) + c.get(t[i], next) - c.get(prev, t[i]) - c.get(t[j], next)
}

/// Best-improvement two-opt on a closed tour.
fn polish_tour(tour: &mut [usize], c: &CostMatrix) {
    let n = tour.len();
    if n < 4 {
        return;
    }
    loop {
        let eps = 1e-12 * (1.0 + tour_cost(tour, c));
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                if i == 0 && j + 1 == n {
                    continue;
                }
                let d = cycle_reversal_delta(tour, i, j, c);
                if d < -eps && best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        match best {
            Some((i, j, _)) => tour[i..=j].reverse(),
            None => break,
        }
    }
}

/// Simulated annealing over closed tours of all vertices of `c`, whose last
/// index is the dummy. The result is the best tour found, polished by two-opt
/// descent and cut at the dummy: a permutation of the remaining vertices.
///
/// Starts from the nearest-neighbour tour out of the dummy; initial
/// temperature is the mean edge cost, cooled geometrically each sweep.
pub fn anneal_tour(c: &CostMatrix, seed: u64, schedule: AnnealSchedule) -> Permutation {
    let n = c.len();
    assert!(n >= 2, "need at least one vertex besides the dummy");
    let dummy = n - 1;
    let mut tour = nearest_neighbor_path(c, dummy);
    let mut cost = tour_cost(&tour, c);
    let mut best = tour.clone();
    let mut best_cost = cost;
    let mut temp = c.mean_cost();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n >= 4 && temp > 0.0 {
        for _ in 0..schedule.sweeps {
            for _ in 0..n {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                let (i, j) = (a.min(b), a.max(b));
                if i == j || (i == 0 && j + 1 == n) {
                    continue;
                }
                let d = cycle_reversal_delta(&tour, i, j, c);
                if d <= 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                    tour[i..=j].reverse();
                    cost += d;
                    if cost < best_cost - 1e-12 {
                        best_cost = cost;
                        best.copy_from_slice(&tour);
                    }
                }
            }
            temp *= schedule.cooling;
        }
    }
    polish_tour(&mut best, c);
    let at = best.iter().position(|&v| v == dummy).expect("dummy in tour");
    let order: Vec<usize> = best[at + 1..].iter().chain(&best[..at]).copied().collect();
    Permutation::new(order).expect("tour visits every vertex once")
}

/// Cuts every set out of a global vertex order.
pub fn support_from_permutation(system: &SetSystem, perm: &Permutation) -> SupportGraph {
    let pos = perm.positions();
    let lines = system
        .sets()
        .map(|s| {
            let mut line = system.members(s).to_vec();
            line.sort_by_key(|e| pos[e.0]);
            line
        })
        .collect();
    SupportGraph::from_lines(system.element_count(), lines)
}

/// Consecutive-ones support over a (kernel) system.
pub fn extract_support_c1p(system: &SetSystem, seed: u64, schedule: AnnealSchedule) -> SupportGraph {
    let c = c1p_cost_matrix(system);
    let perm = anneal_tour(&c, seed, schedule);
    support_from_permutation(system, &perm)
}

//! Pushing an embedding toward octilinear edges of uniform length.
//!
//! Two methods: a least-squares fit to per-edge directions derived from a
//! port assignment, and a magnetic force simulation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{nearest_octilinear, octilinear_deviation_deg, wrap_deg, Point};
use crate::layout::{separate_coincident, AdaptiveTemperature, EmbeddedMap, StressModel};
use crate::model::ElementId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchematizeError {
    #[error("vertex {vertex:?} has {degree} incident edges; at most 8 fit the octilinear ports")]
    DegreeTooHigh { vertex: ElementId, degree: usize },
}

/// Port (0..8, direction `45·k` degrees) of every incident edge, per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortAssignment {
    /// `ports[v]` lists `(edge index, port)` in counter-clockwise edge order.
    pub ports: Vec<Vec<(usize, u8)>>,
}

impl PortAssignment {
    pub fn port(&self, v: ElementId, edge: usize) -> Option<u8> {
        self.ports[v.0].iter().find(|(e, _)| *e == edge).map(|&(_, p)| p)
    }
}

/// Incident edges of every vertex as `(edge index, direction angle)`, sorted
/// counter-clockwise (ties by edge index).
pub fn incident_angles(m: &EmbeddedMap) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); m.support.vertex_count()];
    for (e, &(u, v)) in m.support.edges().iter().enumerate() {
        out[u.0].push((e, (m.pos(v) - m.pos(u)).angle_deg()));
        out[v.0].push((e, (m.pos(u) - m.pos(v)).angle_deg()));
    }
    for list in &mut out {
        list.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    }
    out
}

fn port_angle(p: u8) -> f64 {
    45.0 * p as f64
}

/// Best cyclic assignment for one vertex: edges (sorted counter-clockwise)
/// get an increasing subset of ports, rotated. Minimizes the summed squared
/// angular deviation; the first optimum in enumeration order wins.
fn best_ports(angles: &[f64]) -> Vec<u8> {
    let d = angles.len();
    let mut best: Option<(f64, Vec<u8>)> = None;
    for mask in 0u16..256 {
        if mask.count_ones() as usize != d {
            continue;
        }
        let subset: Vec<u8> = (0..8u8).filter(|k| mask & (1 << k) != 0).collect();
        for r in 0..d {
            let ports: Vec<u8> = (0..d).map(|i| subset[(i + r) % d]).collect();
            let cost: f64 = angles
                .iter()
                .zip(&ports)
                .map(|(a, &p)| wrap_deg(a - port_angle(p)).powi(2))
                .sum();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, ports));
            }
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

pub fn assign_ports(m: &EmbeddedMap) -> Result<PortAssignment, SchematizeError> {
    let incident = incident_angles(m);
    let mut ports = Vec::with_capacity(incident.len());
    for (v, list) in incident.iter().enumerate() {
        if list.len() > 8 {
            return Err(SchematizeError::DegreeTooHigh {
                vertex: ElementId(v),
                degree: list.len(),
            });
        }
        let angles: Vec<f64> = list.iter().map(|&(_, a)| a).collect();
        let chosen = best_ports(&angles);
        ports.push(list.iter().map(|&(e, _)| e).zip(chosen).collect());
    }
    Ok(PortAssignment { ports })
}

/// One octilinear direction (0..8, oriented low id → high id) per edge that
/// best agrees with the ports at both ends; ties go to the direction nearer
/// the current edge angle, then to the lower index.
pub fn desired_directions(m: &EmbeddedMap, p: &PortAssignment) -> Vec<u8> {
    m.support
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let pu = p.port(u, e).expect("port at low end");
            let pv = (p.port(v, e).expect("port at high end") + 4) % 8;
            let current = (m.pos(v) - m.pos(u)).angle_deg();
            (0..8u8)
                .min_by(|&a, &b| {
                    let cost = |k: u8| {
                        wrap_deg(port_angle(k) - port_angle(pu)).abs()
                            + wrap_deg(port_angle(k) - port_angle(pv)).abs()
                    };
                    let near = |k: u8| wrap_deg(port_angle(k) - current).abs();
                    cost(a)
                        .total_cmp(&cost(b))
                        .then(near(a).total_cmp(&near(b)))
                        .then(a.cmp(&b))
                })
                .expect("eight candidates")
        })
        .collect()
}

/// Least-squares fit of every edge vector `p_v - p_u` to `target_len` along
/// its desired direction `d` (both `<Δ, d> = L` and `<Δ, d⊥> = 0`). The
/// lowest-id vertex stays at the origin; `target_len` is the mean input edge
/// length.
pub fn least_squares_schematize(m: &EmbeddedMap, p: &PortAssignment) -> EmbeddedMap {
    let dirs = desired_directions(m, p);
    let target = m.mean_edge_length();
    let vertices = m.support.vertices();
    let mut positions = m.positions.clone();
    if vertices.len() < 2 {
        return m.clone();
    }
    // Since d and d⊥ are orthonormal the two equations amount to
    // Δ = L·d, so x and y decouple into two reduced Laplacian systems.
    let mut local = vec![usize::MAX; m.support.vertex_count()];
    for (i, v) in vertices.iter().skip(1).enumerate() {
        local[v.0] = i;
    }
    let n = vertices.len() - 1;
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut bx = DVector::<f64>::zeros(n);
    let mut by = DVector::<f64>::zeros(n);
    for (e, &(u, v)) in m.support.edges().iter().enumerate() {
        let want = Point::from_angle_deg(port_angle(dirs[e])) * target;
        let (iu, iv) = (local[u.0], local[v.0]);
        // residual (x_v - x_u - want)
        if iu != usize::MAX {
            lap[(iu, iu)] += 1.0;
            bx[iu] -= want.x;
            by[iu] -= want.y;
        }
        if iv != usize::MAX {
            lap[(iv, iv)] += 1.0;
            bx[iv] += want.x;
            by[iv] += want.y;
        }
        if iu != usize::MAX && iv != usize::MAX {
            lap[(iu, iv)] -= 1.0;
            lap[(iv, iu)] -= 1.0;
        }
    }
    let chol = lap.cholesky().expect("anchored Laplacian of a connected support is definite");
    let x = chol.solve(&bx);
    let y = chol.solve(&by);
    positions[vertices[0].0] = Point::ZERO;
    for v in vertices.iter().skip(1) {
        positions[v.0] = Point::new(x[local[v.0]], y[local[v.0]]);
    }
    separate_coincident(&mut positions, &vertices);
    EmbeddedMap::new(m.support.clone(), positions)
}

pub const MAGNETIC_STAGE2_ITERATIONS: usize = 700;
pub const MAGNETIC_STAGE3_ITERATIONS: usize = 200;

/// Fraction of the distance to an edge's ideal endpoint positions moved per
/// iteration at full magnetic weight.
const MAGNETIC_STEP: f64 = 0.25;
/// Fraction of the way to the stress-majorization update moved per iteration
/// at full spring weight.
const SPRING_STEP: f64 = 0.5;
/// Weight of the pull toward the target length inside the magnetic force,
/// relative to the rotation. Larger values fight the rotation on cycles and
/// leave edges further off; below about 0.1 the lengths drift during the
/// purely magnetic stage.
const LENGTH_WEIGHT: f64 = 0.1;

fn magnetic_forces(
    positions: &[Point],
    edges: &[(usize, usize)],
    target: f64,
    tie_break: &[bool],
    forces: &mut [Point],
) {
    for (e, &(u, v)) in edges.iter().enumerate() {
        let (pu, pv) = (positions[u], positions[v]);
        let delta = pv - pu;
        let len = delta.norm();
        if len == 0.0 {
            continue;
        }
        let angle = delta.angle_deg();
        let k = if (octilinear_deviation_deg(angle) - 22.5).abs() < 1e-9 {
            // exactly between two directions: a seeded coin decides
            let below = (angle / 45.0).floor() as u8 % 8;
            if tie_break[e] { (below + 1) % 8 } else { below }
        } else {
            nearest_octilinear(angle)
        };
        let dir = Point::from_angle_deg(port_angle(k));
        let mid = (pu + pv) * 0.5;
        // rotation about the midpoint, keeping the length
        forces[u] += mid - dir * (0.5 * len) - pu;
        forces[v] += mid + dir * (0.5 * len) - pv;
        // weak stretching toward the target length along the current direction
        let stretch = delta * (LENGTH_WEIGHT * (len - target) / (2.0 * len));
        forces[u] += stretch;
        forces[v] -= stretch;
    }
}

/// Magnetic schematization toward the input's mean edge length.
///
/// Stage 2 blends spring and magnetic forces with a spring weight falling
/// linearly from 1 to 0 over up to 700 iterations; stage 3 runs up to 200
/// purely magnetic iterations. A stage ends early when the displacement an
/// iteration would make at full magnetic weight, summed over vertices, drops
/// below `1e-4 · target_len · |V|`. The seed only decides edges lying exactly
/// halfway between two octilinear directions.
///
/// The spring force pulls each vertex toward its stress-majorization update
/// (hop distance times the target length), so the drawing keeps its scale;
/// repulsive spring embedders inflate it.
pub fn magnetic_schematize(m: &EmbeddedMap, seed: u64) -> EmbeddedMap {
    magnetic_schematize_with(m, seed, m.mean_edge_length())
}

/// [`magnetic_schematize`] with an explicit target edge length.
pub fn magnetic_schematize_with(m: &EmbeddedMap, seed: u64, target: f64) -> EmbeddedMap {
    let vertices = m.support.vertices();
    let edges = m.support.edge_pairs();
    if edges.is_empty() || target <= 0.0 {
        return m.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tie_break: Vec<bool> = edges.iter().map(|_| rng.random::<bool>()).collect();
    let mut positions = m.positions.clone();
    let n = m.support.vertex_count();
    let threshold = 1e-4 * target * vertices.len() as f64;
    let mut temp = AdaptiveTemperature::new(n, 0.1 * target, 1e-7 * target, target);
    let springs = StressModel::new(&m.support, target);
    let mut spring = vec![Point::ZERO; n];
    let mut magnet = vec![Point::ZERO; n];
    let stages = [
        (MAGNETIC_STAGE2_ITERATIONS, true),
        (MAGNETIC_STAGE3_ITERATIONS, false),
    ];
    for (iterations, blended) in stages {
        for it in 0..iterations {
            let alpha_spring = if blended {
                1.0 - it as f64 / (iterations - 1) as f64
            } else {
                0.0
            };
            let alpha_mag = 1.0 - alpha_spring;
            spring.iter_mut().for_each(|f| *f = Point::ZERO);
            magnet.iter_mut().for_each(|f| *f = Point::ZERO);
            if alpha_spring > 0.0 {
                springs.pulls(&positions, &mut spring);
            }
            magnetic_forces(&positions, &edges, target, &tie_break, &mut magnet);
            let mut residual = 0.0;
            for v in &vertices {
                let s = spring[v.0] * (alpha_spring * SPRING_STEP);
                let g = magnet[v.0] * MAGNETIC_STEP;
                residual += s.norm() + g.norm();
                positions[v.0] += temp.step(v.0, s + g * alpha_mag);
            }
            if residual < threshold {
                break;
            }
        }
    }
    separate_coincident(&mut positions, &vertices);
    EmbeddedMap::new(m.support.clone(), positions)
}

/// `Σ angular deviation² (radians) + Σ ((len - t) / t)²` over all edges,
/// with `t = target_len`.
pub fn schematic_energy(m: &EmbeddedMap, target_len: f64) -> f64 {
    m.support
        .edges()
        .iter()
        .map(|&(u, v)| {
            let delta = m.pos(v) - m.pos(u);
            let dev = octilinear_deviation_deg(delta.angle_deg()).to_radians();
            let rel = (delta.norm() - target_len) / target_len;
            dev * dev + rel * rel
        })
        .sum()
}

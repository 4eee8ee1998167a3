#![allow(dead_code)]

//! Fixtures and brute-force oracles shared by the integration tests.

use metrosets::layout::EmbeddedMap;
use metrosets::lines::{LineOrderMap, Side};
use metrosets::model::{ElementId, SetId};
use metrosets::support::SupportGraph;
use metrosets::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn map_from(points: &[(f64, f64)], lines: &[&[usize]]) -> EmbeddedMap {
    let lines = lines
        .iter()
        .map(|l| l.iter().map(|&v| ElementId(v)).collect())
        .collect();
    let g = SupportGraph::from_lines(points.len(), lines);
    EmbeddedMap::new(g, points.iter().map(|&(x, y)| Point::new(x, y)).collect())
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

// ---------------------------------------------------------------- metrics

pub fn oracle_octolinearity(m: &EmbeddedMap) -> (f64, f64) {
    let devs: Vec<f64> = m
        .support
        .edges()
        .iter()
        .map(|&(u, v)| {
            let d = m.pos(v) - m.pos(u);
            let a = d.y.atan2(d.x).to_degrees().rem_euclid(45.0);
            a.min(45.0 - a)
        })
        .collect();
    let max = devs.iter().cloned().fold(0.0, f64::max);
    (devs.iter().sum::<f64>() / devs.len() as f64, max)
}

pub fn oracle_uniformity(m: &EmbeddedMap) -> (f64, f64) {
    let lens: Vec<f64> = m
        .support
        .edges()
        .iter()
        .map(|&(u, v)| m.pos(u).dist(m.pos(v)))
        .collect();
    let mean = lens.iter().sum::<f64>() / lens.len() as f64;
    let devs: Vec<f64> = lens.iter().map(|l| (l / mean - 1.0).abs()).collect();
    let max = devs.iter().cloned().fold(0.0, f64::max);
    (devs.iter().sum::<f64>() / devs.len() as f64, max)
}

/// Entries into the negative sign of `<edge, crow>`; zero inherits.
pub fn oracle_monotonicity(m: &EmbeddedMap) -> usize {
    let mut total = 0;
    for line in m.support.lines() {
        let c = m.pos(*line.last().unwrap()) - m.pos(line[0]);
        if c.x == 0.0 && c.y == 0.0 {
            continue;
        }
        let mut signs = vec![1i8];
        for w in line.windows(2) {
            let d = m.pos(w[1]) - m.pos(w[0]);
            let dot = d.x * c.x + d.y * c.y;
            let prev = *signs.last().unwrap();
            signs.push(if dot > 0.0 {
                1
            } else if dot < 0.0 {
                -1
            } else {
                prev
            });
        }
        total += signs.windows(2).filter(|w| w[0] == 1 && w[1] == -1).count();
    }
    total
}

pub fn oracle_gabriel(m: &EmbeddedMap) -> usize {
    let used: Vec<ElementId> = m.support.vertices();
    let mut count = 0;
    for &(u, v) in m.support.edges() {
        let (a, b) = (m.pos(u), m.pos(v));
        let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        let r2 = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)) / 4.0;
        for &w in &used {
            if w == u || w == v {
                continue;
            }
            let p = m.pos(w);
            if (p.x - mid.x).powi(2) + (p.y - mid.y).powi(2) <= r2 {
                count += 1;
            }
        }
    }
    count
}

/// Components of the shared-vertex subgraph over edges used by both lines,
/// found by flood fill.
pub fn oracle_consecutive_ones(m: &EmbeddedMap) -> usize {
    let lines = m.support.lines();
    let mut total = 0;
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let shared: Vec<ElementId> = lines[a].iter().filter(|v| lines[b].contains(v)).copied().collect();
            if shared.is_empty() {
                continue;
            }
            let on = |l: &[ElementId], x: ElementId, y: ElementId| l.windows(2).any(|w| (w[0] == x && w[1] == y) || (w[0] == y && w[1] == x));
            let mut seen = vec![false; shared.len()];
            let mut components = 0;
            for start in 0..shared.len() {
                if seen[start] {
                    continue;
                }
                components += 1;
                let mut stack = vec![start];
                seen[start] = true;
                while let Some(i) = stack.pop() {
                    for j in 0..shared.len() {
                        if !seen[j] && on(&lines[a], shared[i], shared[j]) && on(&lines[b], shared[i], shared[j]) {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            total += components - 1;
        }
    }
    total
}

fn orient(a: Point, b: Point, c: Point) -> i8 {
    let v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

pub fn proper_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0
}

pub fn oracle_edge_crossings(m: &EmbeddedMap) -> usize {
    let e = m.support.edges();
    let mut n = 0;
    for i in 0..e.len() {
        for j in 0..i {
            let ((a, b), (c, d)) = (e[i], e[j]);
            if [a, b].iter().any(|x| *x == c || *x == d) {
                continue;
            }
            if proper_cross(m.pos(a), m.pos(b), m.pos(c), m.pos(d)) {
                n += 1;
            }
        }
    }
    n
}

pub fn oracle_self_crossings(m: &EmbeddedMap) -> usize {
    let mut n = 0;
    for line in m.support.lines() {
        let segs: Vec<(Point, Point)> = line.windows(2).map(|w| (m.pos(w[0]), m.pos(w[1]))).collect();
        for i in 0..segs.len() {
            for j in 0..segs.len() {
                if j >= i + 2 && proper_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Neighbour of `x` on `line` other than `back`, if the line goes on.
fn beyond(line: &[ElementId], back: ElementId, x: ElementId) -> Option<ElementId> {
    let i = line.iter().position(|&v| v == x)?;
    let prev = i.checked_sub(1).map(|k| line[k]);
    let next = line.get(i + 1).copied();
    if prev == Some(back) {
        next
    } else if next == Some(back) {
        prev
    } else {
        None
    }
}

/// Line crossings from the orders: per pair of lines and per shared edge
/// end, an order flip into the next shared edge or an exit arrangement that
/// contradicts the order.
pub fn oracle_line_crossings(m: &EmbeddedMap, orders: &LineOrderMap) -> usize {
    let g = &m.support;
    let lines = g.lines();
    let edge_of = |x: ElementId, y: ElementId| g.edges().iter().position(|&(a, b)| (a == x && b == y) || (a == y && b == x));
    // a left of b travelling from `from` to `to` on edge e
    let left = |e: usize, from: ElementId, a: usize, b: usize| {
        let o = &orders.orders[e];
        let pa = o.iter().position(|s| s.0 == a).unwrap();
        let pb = o.iter().position(|s| s.0 == b).unwrap();
        (pa < pb) == (g.edges()[e].0 == from)
    };
    let mut count = 0;
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            for (e, &(lo, hi)) in g.edges().iter().enumerate() {
                let has = |s: usize| orders.orders[e].iter().any(|t| t.0 == s);
                if !has(a) || !has(b) {
                    continue;
                }
                for (from, x) in [(lo, hi), (hi, lo)] {
                    let (Some(na), Some(nb)) = (beyond(&lines[a], from, x), beyond(&lines[b], from, x)) else {
                        continue;
                    };
                    let here = left(e, from, a, b);
                    if na == nb {
                        let f = edge_of(x, na).unwrap();
                        if f > e && here != left(f, x, a, b) {
                            count += 1;
                        }
                    } else {
                        let d = m.pos(x) - m.pos(from);
                        let turn = |y: ElementId| {
                            let w = m.pos(y) - m.pos(x);
                            (d.x * w.y - d.y * w.x).atan2(d.x * w.x + d.y * w.y)
                        };
                        let a_exits_left = turn(na) > turn(nb);
                        if here != a_exits_left {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

// ---------------------------------------------------------------- MLCM instances

/// A random tree drawn with unit-ish octilinear edges carrying 2 to 4
/// random paths as lines; `None` when the draw is unusable.
pub fn corridor_instance(seed: u64, max_edges: usize, max_lines: usize) -> Option<EmbeddedMap> {
    let mut r = rng(seed);
    let edges_target = r.random_range(2..=max_edges);
    let mut pos = vec![Point::new(0.0, 0.0)];
    let mut used_dirs: Vec<Vec<u8>> = vec![Vec::new()];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
    let mut guard = 0;
    while pos.len() <= edges_target {
        guard += 1;
        if guard > 500 {
            return None;
        }
        let p = r.random_range(0..pos.len());
        let k: u8 = r.random_range(0..8);
        if used_dirs[p].contains(&k) {
            continue;
        }
        let len = 1.0 + r.random::<f64>() * 0.5;
        let q = pos[p] + Point::from_angle_deg(45.0 * k as f64) * len;
        if pos.iter().any(|o| o.dist(q) < 0.3) {
            continue;
        }
        let id = pos.len();
        pos.push(q);
        used_dirs[p].push(k);
        used_dirs.push(vec![(k + 4) % 8]);
        adj[p].push(id);
        adj.push(vec![p]);
    }
    let n = pos.len();
    let path = |s: usize, t: usize| -> Vec<usize> {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    q.push_back(v);
                }
            }
        }
        let mut p = vec![t];
        while *p.last().unwrap() != s {
            p.push(parent[*p.last().unwrap()]);
        }
        p
    };
    let line_count = r.random_range(2..=max_lines);
    let mut lines = Vec::new();
    for _ in 0..line_count {
        let s = r.random_range(0..n);
        let mut t = r.random_range(0..n);
        while t == s {
            t = r.random_range(0..n);
        }
        lines.push(path(s, t));
    }
    // compact to the vertices in use
    let mut id = vec![usize::MAX; n];
    let mut pts = Vec::new();
    for l in &lines {
        for &v in l {
            if id[v] == usize::MAX {
                id[v] = pts.len();
                pts.push(pos[v]);
            }
        }
    }
    let lines: Vec<Vec<ElementId>> = lines
        .iter()
        .map(|l| l.iter().map(|&v| ElementId(id[v])).collect())
        .collect();
    let g = SupportGraph::from_lines(pts.len(), lines);
    if g.lines_per_edge().iter().all(|l| l.len() < 2) {
        return None;
    }
    Some(EmbeddedMap::new(g, pts))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub fn order_space(m: &EmbeddedMap) -> usize {
    m.support.lines_per_edge().iter().map(|l| factorial(l.len())).product()
}

fn permutations(items: &[SetId]) -> Vec<Vec<SetId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every combination of per-edge line orders.
pub fn all_orders(m: &EmbeddedMap) -> Vec<Vec<Vec<SetId>>> {
    let per_edge: Vec<Vec<Vec<SetId>>> = m.support.lines_per_edge().iter().map(|l| permutations(l)).collect();
    let mut out = vec![Vec::new()];
    for choices in per_edge {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for c in &choices {
                let mut p: Vec<Vec<SetId>> = prefix.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

pub fn all_sides(line_count: usize) -> Vec<Vec<[Side; 2]>> {
    let bits = 2 * line_count;
    (0..1usize << bits)
        .map(|mask| {
            (0..line_count)
                .map(|s| {
                    let side = |b: usize| if mask >> b & 1 == 1 { Side::Right } else { Side::Left };
                    [side(2 * s), side(2 * s + 1)]
                })
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------- labels

/// Conflict box of a label from its anchor under the declared text model:
/// `0.6·size` per character wide, `1.2·size` high, axis-aligned hull of the
/// rotated text rectangle.
pub fn oracle_label_box(l: &metrosets::labels::Label) -> (Point, Point) {
    use metrosets::labels::Placement;
    let w = 0.6 * l.font_size * l.text.chars().count() as f64;
    let h = 1.2 * l.font_size;
    let (c, s) = (l.angle.to_radians().cos(), l.angle.to_radians().sin());
    let along = |t: f64, q: f64| Point::new(l.anchor.x + t * c - q * s, l.anchor.y + t * s + q * c);
    let corners = match l.placement {
        Placement::Right => [along(0.0, h / 2.0), along(0.0, -h / 2.0), along(w, h / 2.0), along(w, -h / 2.0)],
        Placement::Left => [along(-w, h / 2.0), along(-w, -h / 2.0), along(0.0, h / 2.0), along(0.0, -h / 2.0)],
        Placement::Above | Placement::Below => [
            along(-w / 2.0, h / 2.0),
            along(-w / 2.0, -h / 2.0),
            along(w / 2.0, h / 2.0),
            along(w / 2.0, -h / 2.0),
        ],
    };
    let min = Point::new(corners.iter().map(|p| p.x).fold(f64::MAX, f64::min), corners.iter().map(|p| p.y).fold(f64::MAX, f64::min));
    let max = Point::new(corners.iter().map(|p| p.x).fold(f64::MIN, f64::max), corners.iter().map(|p| p.y).fold(f64::MIN, f64::max));
    (min, max)
}

fn point_rect_dist(p: Point, (lo, hi): (Point, Point)) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    dx.hypot(dy)
}

fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let t = if d.norm_sq() == 0.0 { 0.0 } else { ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0) };
    p.dist(a + d * t)
}

pub fn segment_rect_dist(a: Point, b: Point, r: (Point, Point)) -> f64 {
    let (lo, hi) = r;
    let corners = [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
    let inside = |p: Point| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    if inside(a) || inside(b) {
        return 0.0;
    }
    for i in 0..4 {
        let (c, d) = (corners[i], corners[(i + 1) % 4]);
        if proper_cross(a, b, c, d) {
            return 0.0;
        }
    }
    let mut best = point_rect_dist(a, r).min(point_rect_dist(b, r));
    for c in corners {
        best = best.min(point_segment_dist(c, a, b));
    }
    best
}

/// Positive-area overlap beyond a contact tolerance of 1e-9 pt.
pub fn boxes_overlap(a: (Point, Point), b: (Point, Point)) -> bool {
    let t = 1e-9;
    a.0.x + t < b.1.x && b.0.x + t < a.1.x && a.0.y + t < b.1.y && b.0.y + t < a.1.y
}

/// Validity of a labeling: stored boxes agree with the box model, boxes are
/// pairwise disjoint, clear every corridor (half width `8·lines/2`) and every
/// other station disc. Returns the first violation.
pub fn check_labels(
    m: &EmbeddedMap,
    orders: &LineOrderMap,
    radii: &[f64],
    labels: &[metrosets::labels::Label],
) -> Result<(), String> {
    let boxes: Vec<(Point, Point)> = labels.iter().map(oracle_label_box).collect();
    for (l, b) in labels.iter().zip(&boxes) {
        let stored = (l.bbox.min, l.bbox.max);
        let err = stored.0.dist(b.0) + stored.1.dist(b.1);
        if err > 1e-6 {
            return Err(format!("label of {:?}: stored box {:?} differs from model {:?}", l.vertex, stored, b));
        }
    }
    for i in 0..labels.len() {
        for j in 0..i {
            if boxes_overlap(boxes[i], boxes[j]) {
                return Err(format!("labels of {:?} and {:?} overlap", labels[i].vertex, labels[j].vertex));
            }
        }
        for (e, &(u, v)) in m.support.edges().iter().enumerate() {
            let half = 4.0 * orders.orders[e].len() as f64;
            if segment_rect_dist(m.pos(u), m.pos(v), boxes[i]) < half - 1e-9 {
                return Err(format!("label of {:?} touches corridor {e}", labels[i].vertex));
            }
        }
        for w in m.support.vertices() {
            if w != labels[i].vertex && point_rect_dist(m.pos(w), boxes[i]) < radii[w.0] - 1e-9 {
                return Err(format!("label of {:?} covers station {:?}", labels[i].vertex, w));
            }
        }
    }
    Ok(())
}

/// The eight candidate boxes of the declared model around a station.
pub fn oracle_candidates(p: Point, r: f64, text: &str, size: f64) -> Vec<(Point, Point)> {
    use metrosets::labels::{Label, Placement};
    let h = 1.2 * size;
    let mut out = Vec::new();
    for (angle, placement) in [
        (0.0, Placement::Right),
        (0.0, Placement::Left),
        (45.0, Placement::Right),
        (45.0, Placement::Left),
        (-45.0, Placement::Right),
        (-45.0, Placement::Left),
        (0.0, Placement::Above),
        (0.0, Placement::Below),
    ] {
        let gap = if angle == 0.0 { r + 2.0 } else { std::f64::consts::SQRT_2 * (r + 2.0) + h / 2.0 };
        let u = Point::from_angle_deg(angle);
        let anchor = match placement {
            Placement::Right => p + u * gap,
            Placement::Left => p - u * gap,
            Placement::Above => p + Point::new(0.0, r + 2.0 + h / 2.0),
            Placement::Below => p - Point::new(0.0, r + 2.0 + h / 2.0),
        };
        let l = Label {
            vertex: ElementId(0),
            text: text.to_string(),
            full_text: text.to_string(),
            anchor,
            angle,
            placement,
            font_size: size,
            bbox: metrosets::geometry::Rect { min: anchor, max: anchor },
        };
        out.push(oracle_label_box(&l));
    }
    out
}

/// Whether some choice of one candidate per station is conflict-free at
/// `size`, by exhaustive search.
pub fn labeling_exists(m: &EmbeddedMap, orders: &LineOrderMap, radii: &[f64], texts: &[String], size: f64) -> bool {
    let stations = m.support.vertices();
    let mut options: Vec<Vec<(Point, Point)>> = Vec::new();
    for &v in &stations {
        let ok: Vec<(Point, Point)> = oracle_candidates(m.pos(v), radii[v.0], &texts[v.0], size)
            .into_iter()
            .filter(|b| {
                m.support.edges().iter().enumerate().all(|(e, &(a, c))| {
                    segment_rect_dist(m.pos(a), m.pos(c), *b) >= 4.0 * orders.orders[e].len() as f64 - 1e-9
                }) && stations
                    .iter()
                    .all(|&w| w == v || point_rect_dist(m.pos(w), *b) >= radii[w.0] - 1e-9)
            })
            .collect();
        if ok.is_empty() {
            return false;
        }
        options.push(ok);
    }
    fn go(i: usize, options: &[Vec<(Point, Point)>], chosen: &mut Vec<(Point, Point)>) -> bool {
        if i == options.len() {
            return true;
        }
        for b in &options[i] {
            if chosen.iter().all(|c| !boxes_overlap(*c, *b)) {
                chosen.push(*b);
                if go(i + 1, options, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(0, &options, &mut Vec::new())
}

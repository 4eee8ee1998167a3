//! Ordering parallel metro lines along shared edges.
//!
//! Each edge `(lo, hi)` (lo < hi by vertex id) stores its lines from left to
//! right as seen travelling from `lo` to `hi`. A line terminus has a side,
//! left or right, seen travelling along the line toward the terminus.
//!
//! Two lines sharing a run of edges must cross when the ends of the run
//! disagree about which of them is on the left. [`order_lines`] places each
//! such crossing once, and nowhere else; [`terminator_heuristic`] picks
//! terminus sides greedily to keep the forced crossings few.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::layout::EmbeddedMap;
use crate::model::{ElementId, SetId};
use crate::support::SupportGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Sides of both termini of every line: `[at first vertex, at last vertex]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminusSides(pub Vec<[Side; 2]>);

/// Left-to-right line order of every edge plus the terminus sides it honours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOrderMap {
    pub orders: Vec<Vec<SetId>>,
    pub sides: TerminusSides,
}

/// Walks and geometry shared by the heuristic, the ordering and the crossing
/// count.
pub(crate) struct LineIndex<'a> {
    pub(crate) map: &'a EmbeddedMap,
    /// `position[s][v]` is the index of `v` on line `s`.
    position: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    /// Whether the first line is left of the second, in the travel frame.
    Known(bool),
    /// Both lines stop at the same vertex on the same side.
    Free,
    /// Depends on a terminus without a side yet.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Split {
    /// `2·edges walked`, plus one when the lines diverge rather than stop.
    depth: usize,
    outcome: Outcome,
}

type PartialSides = Vec<[Option<Side>; 2]>;

impl<'a> LineIndex<'a> {
    pub(crate) fn new(map: &'a EmbeddedMap) -> Self {
        let n = map.support.vertex_count();
        let position = map
            .support
            .lines()
            .iter()
            .map(|line| {
                let mut p = vec![None; n];
                for (i, v) in line.iter().enumerate() {
                    p[v.0] = Some(i);
                }
                p
            })
            .collect();
        Self { map, position }
    }

    fn line(&self, s: SetId) -> &[ElementId] {
        self.map.support.line(s)
    }

    /// Vertex after `x` on line `s` when arriving from `from`, or `None` if
    /// the line ends at `x`.
    fn next(&self, s: SetId, from: ElementId, x: ElementId) -> Option<ElementId> {
        let i = self.position[s.0][x.0].expect("line visits x");
        let j = self.position[s.0][from.0].expect("line visits from");
        let line = self.line(s);
        if j + 1 == i {
            line.get(i + 1).copied()
        } else {
            i.checked_sub(1).map(|k| line[k])
        }
    }

    /// Which end (0 first, 1 last) of line `s` is the vertex `x`.
    fn end_index(&self, s: SetId, x: ElementId) -> usize {
        if self.line(s)[0] == x {
            0
        } else {
            1
        }
    }

    /// Clockwise angle of `x → to`, measured from the direction `x → back`.
    fn cw_angle(&self, back: ElementId, x: ElementId, to: ElementId) -> f64 {
        let px = self.map.pos(x);
        let a_back = (self.map.pos(back) - px).angle_deg();
        let a_to = (self.map.pos(to) - px).angle_deg();
        (a_back - a_to).rem_euclid(360.0)
    }

    /// Follows lines `a` and `b` from edge `from → x` onward until they part.
    fn walk(&self, a: SetId, b: SetId, from: ElementId, x: ElementId, sides: &PartialSides) -> Split {
        let (mut u, mut x) = (from, x);
        let mut steps = 0;
        loop {
            let na = self.next(a, u, x);
            let nb = self.next(b, u, x);
            let side = |s: SetId| sides[s.0][self.end_index(s, x)];
            match (na, nb) {
                (None, None) => {
                    let outcome = match (side(a), side(b)) {
                        (Some(sa), Some(sb)) if sa == sb => Outcome::Free,
                        (Some(sa), Some(_)) => Outcome::Known(sa == Side::Left),
                        _ => Outcome::Undecided,
                    };
                    return Split { depth: 2 * steps, outcome };
                }
                (None, Some(_)) => {
                    let outcome = side(a).map_or(Outcome::Undecided, |s| Outcome::Known(s == Side::Left));
                    return Split { depth: 2 * steps, outcome };
                }
                (Some(_), None) => {
                    let outcome = side(b).map_or(Outcome::Undecided, |s| Outcome::Known(s == Side::Right));
                    return Split { depth: 2 * steps, outcome };
                }
                (Some(ya), Some(yb)) if ya == yb => {
                    u = x;
                    x = ya;
                    steps += 1;
                }
                (Some(ya), Some(yb)) => {
                    let left = self.cw_angle(u, x, ya) < self.cw_angle(u, x, yb);
                    return Split {
                        depth: 2 * steps + 1,
                        outcome: Outcome::Known(left),
                    };
                }
            }
        }
    }

    /// Splits of `a` and `b` on edge `e` in both directions, as outcomes in
    /// the edge frame (`lo → hi`): `(toward hi, toward lo)`.
    fn splits(&self, e: usize, a: SetId, b: SetId, sides: &PartialSides) -> (Split, Split) {
        let (lo, hi) = self.map.support.edges()[e];
        let fwd = self.walk(a, b, lo, hi, sides);
        let mut bwd = self.walk(a, b, hi, lo, sides);
        if let Outcome::Known(l) = bwd.outcome {
            // travelling toward lo, left and right swap
            bwd.outcome = Outcome::Known(!l);
        }
        (fwd, bwd)
    }
}

/// Whether the pair's two ends force a crossing: `Some(true/false)` when both
/// ends are known, `None` when an end is undecided.
fn forced(fwd: Split, bwd: Split) -> Option<bool> {
    match (fwd.outcome, bwd.outcome) {
        (Outcome::Free, _) | (_, Outcome::Free) => Some(false),
        (Outcome::Known(f), Outcome::Known(b)) => Some(f != b),
        _ => None,
    }
}

/// The edge a terminus sits on and its far vertex.
fn terminus_edge(g: &SupportGraph, s: SetId, end: usize) -> (usize, ElementId, ElementId) {
    let line = g.line(s);
    let (x, y) = if end == 0 {
        (line[0], line[1])
    } else {
        (line[line.len() - 1], line[line.len() - 2])
    };
    (g.edge_index(x, y).expect("terminal edge"), x, y)
}

/// Physical extreme of an edge (`false` = left of `lo → hi`, `true` = right)
/// taken by a terminus at `x` with side `side`.
fn extreme(g: &SupportGraph, e: usize, x: ElementId, side: Side) -> bool {
    let (_, hi) = g.edges()[e];
    let left_in_edge_frame = if x == hi { side == Side::Left } else { side == Side::Right };
    !left_in_edge_frame
}

fn is_whole_edge(g: &SupportGraph, s: SetId) -> bool {
    g.line(s).len() == 2
}

/// Side choices for terminus `(s, end)` that keep every edge drawable: the
/// termini arriving from one end of an edge and those arriving from the
/// other must use different extremes.
fn feasible_sides(g: &SupportGraph, sides: &PartialSides, s: SetId, end: usize) -> Vec<Side> {
    if is_whole_edge(g, s) {
        return vec![Side::Left, Side::Right];
    }
    let (e, x, _) = terminus_edge(g, s, end);
    let usage = &g.lines_per_edge()[e];
    let mut here = Vec::new();
    let mut there = Vec::new();
    for &t in usage {
        if t == s || is_whole_edge(g, t) {
            continue;
        }
        for te in 0..2 {
            let (f, tx, _) = terminus_edge(g, t, te);
            if f != e {
                continue;
            }
            let decided = sides[t.0][te].map(|sd| extreme(g, e, tx, sd));
            if tx == x {
                here.push(decided);
            } else {
                there.push(decided);
            }
        }
    }
    [Side::Left, Side::Right]
        .into_iter()
        .filter(|&side| {
            let ex = extreme(g, e, x, side);
            let clash_there = there.contains(&Some(ex));
            let split_here = !there.is_empty() && here.iter().any(|d| d.is_some_and(|h| h != ex));
            !clash_there && !split_here
        })
        .collect()
}

fn set_side(g: &SupportGraph, sides: &mut PartialSides, s: SetId, end: usize, side: Side) {
    sides[s.0][end] = Some(side);
    if is_whole_edge(g, s) {
        // the same physical extreme seen from the other end
        sides[s.0][1 - end] = Some(side.flip());
    }
}

/// Forced crossings with terminus `(s, end)` on side `side`, and the number
/// of partner lines whose outcome still hinges on undecided termini.
fn terminus_costs(idx: &LineIndex, sides: &PartialSides, s: SetId, end: usize, side: Side) -> (usize, usize) {
    let g = &idx.map.support;
    let (e, _, _) = terminus_edge(g, s, end);
    let mut trial = sides.clone();
    set_side(g, &mut trial, s, end, side);
    let mut forced_count = 0;
    let mut contingent = 0;
    for &b in &g.lines_per_edge()[e] {
        if b == s {
            continue;
        }
        let (fwd, bwd) = idx.splits(e, s, b, &trial);
        match forced(fwd, bwd) {
            Some(true) => forced_count += 1,
            Some(false) => {}
            None => contingent += 1,
        }
    }
    (forced_count, contingent)
}

/// Greedy terminus sides: repeatedly fixes the undecided terminus maximizing
/// `|f_L - f_R| - r` to its cheaper side (ties: left; equal priority: lower
/// set id, first end before last). Termini left with one drawable side are
/// fixed as soon as that happens.
pub fn terminator_heuristic(m: &EmbeddedMap) -> TerminusSides {
    let g = &m.support;
    let idx = LineIndex::new(m);
    let count = g.lines().len();
    let mut sides: PartialSides = vec![[None, None]; count];
    let termini: Vec<(SetId, usize)> = (0..count).flat_map(|s| [(SetId(s), 0), (SetId(s), 1)]).collect();
    loop {
        // propagate forced choices
        let mut progress = true;
        while progress {
            progress = false;
            for &(s, end) in &termini {
                if sides[s.0][end].is_none() {
                    let ok = feasible_sides(g, &sides, s, end);
                    if ok.len() == 1 {
                        set_side(g, &mut sides, s, end, ok[0]);
                        progress = true;
                    }
                }
            }
        }
        let mut best: Option<(i64, SetId, usize, Side)> = None;
        for &(s, end) in &termini {
            if sides[s.0][end].is_some() {
                continue;
            }
            let ok = feasible_sides(g, &sides, s, end);
            let (fl, rl) = terminus_costs(&idx, &sides, s, end, Side::Left);
            let (fr, rr) = terminus_costs(&idx, &sides, s, end, Side::Right);
            let r = rl.max(rr) as i64;
            let priority = (fl as i64 - fr as i64).abs() - r;
            let side = if ok.len() == 1 {
                ok[0]
            } else if fr < fl {
                Side::Right
            } else {
                Side::Left
            };
            if best.is_none_or(|(p, ..)| priority > p) {
                best = Some((priority, s, end, side));
            }
        }
        match best {
            Some((_, s, end, side)) => set_side(g, &mut sides, s, end, side),
            None => break,
        }
    }
    TerminusSides(
        sides
            .into_iter()
            .map(|[a, b]| [a.unwrap_or(Side::Left), b.unwrap_or(Side::Left)])
            .collect(),
    )
}

/// Left-of relation on edge `e` with all sides known: the outcome at the
/// nearer split (forward on ties), falling back to the other direction and
/// then to set ids.
fn compare_on_edge(idx: &LineIndex, e: usize, sides: &PartialSides, a: SetId, b: SetId) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let (fwd, bwd) = idx.splits(e, a, b, sides);
    let known = |s: Split| match s.outcome {
        Outcome::Known(l) => Some(l),
        _ => None,
    };
    let left = match (known(fwd), known(bwd)) {
        (Some(f), Some(b)) => {
            if bwd.depth < fwd.depth {
                b
            } else {
                f
            }
        }
        (Some(f), None) => f,
        (None, Some(b)) => b,
        (None, None) => {
            // free at both ends: by set id, in the travel frame of the lower
            // line so that the choice agrees along the whole run
            let (lo, hi) = idx.map.support.edges()[e];
            let line = idx.line(a.min(b));
            let forward = line.windows(2).any(|w| w[0] == lo && w[1] == hi);
            (a < b) == forward
        }
    };
    if left {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Line orders on every edge for fixed terminus sides.
pub fn order_lines(m: &EmbeddedMap, sides: &TerminusSides) -> LineOrderMap {
    let idx = LineIndex::new(m);
    let partial: PartialSides = sides.0.iter().map(|&[a, b]| [Some(a), Some(b)]).collect();
    let orders = m
        .support
        .lines_per_edge()
        .into_iter()
        .enumerate()
        .map(|(e, mut lines)| {
            // insertion sort: never trusts the comparator to be a total order
            for i in 1..lines.len() {
                let mut j = i;
                while j > 0 && compare_on_edge(&idx, e, &partial, lines[j], lines[j - 1]) == Ordering::Less {
                    lines.swap(j, j - 1);
                    j -= 1;
                }
            }
            lines
        })
        .collect();
    LineOrderMap {
        orders,
        sides: sides.clone(),
    }
}

/// Both stages: heuristic sides, then orders.
pub fn minimize_line_crossings(m: &EmbeddedMap) -> LineOrderMap {
    let sides = terminator_heuristic(m);
    order_lines(m, &sides)
}

/// Whether `a` is left of `b` on edge `e` travelling toward `x`.
fn left_toward(g: &SupportGraph, orders: &LineOrderMap, e: usize, x: ElementId, a: SetId, b: SetId) -> bool {
    let order = &orders.orders[e];
    let pa = order.iter().position(|&s| s == a).expect("line on edge");
    let pb = order.iter().position(|&s| s == b).expect("line on edge");
    let (_, hi) = g.edges()[e];
    (pa < pb) == (x == hi)
}

/// Line crossings realized by the orders: order inversions between
/// consecutive shared edges, plus crossings where two lines leave a shared
/// edge in the opposite left/right arrangement to their exit directions.
pub fn count_line_crossings(m: &EmbeddedMap, orders: &LineOrderMap) -> usize {
    let g = &m.support;
    let idx = LineIndex::new(m);
    let mut total = 0;
    for (e, lines) in orders.orders.iter().enumerate() {
        let (lo, hi) = g.edges()[e];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a, b) = (lines[i], lines[j]);
                for (from, x) in [(lo, hi), (hi, lo)] {
                    let (Some(na), Some(nb)) = (idx.next(a, from, x), idx.next(b, from, x)) else {
                        continue;
                    };
                    let left_here = left_toward(g, orders, e, x, a, b);
                    if na == nb {
                        let f = g.edge_index(x, na).expect("shared edge");
                        if e < f && left_here != left_toward(g, orders, f, na, a, b) {
                            total += 1;
                        }
                    } else {
                        let exits_left = idx.cw_angle(from, x, na) < idx.cw_angle(from, x, nb);
                        if left_here != exits_left {
                            total += 1;
                        }
                    }
                }
            }
        }
    }
    total
}

/// Whether every terminating line is outside all lines that continue past
/// its terminus, on the side its terminus names.
pub fn satisfies_periphery(m: &EmbeddedMap, orders: &LineOrderMap) -> bool {
    let g = &m.support;
    let idx = LineIndex::new(m);
    for s in (0..g.lines().len()).map(SetId) {
        for end in 0..2 {
            let (e, x, y) = terminus_edge(g, s, end);
            let side = orders.sides.0[s.0][end];
            let order = &orders.orders[e];
            let p = order.iter().position(|&t| t == s).expect("line on its edge");
            // lines strictly on the named side of s, travelling toward x
            let (_, hi) = g.edges()[e];
            let toward_left = (side == Side::Left) == (x == hi);
            let outside: &[SetId] = if toward_left { &order[..p] } else { &order[p + 1..] };
            if outside.iter().any(|&t| idx.next(t, y, x).is_some()) {
                return false;
            }
        }
    }
    true
}

//! Station labels: a choice among horizontal and diagonal candidates at the
//! largest font size that leaves no overlaps.
//!
//! Text is measured without font metrics: width `0.6 · size` per character,
//! height `1.2 · size`. The conflict box of a label is the axis-aligned
//! bounding box of its rotated text rectangle.

use serde::{Deserialize, Serialize};

use crate::geometry::{nearest_octilinear, Point, Rect};
use crate::layout::EmbeddedMap;
use crate::lines::LineOrderMap;
use crate::model::ElementId;
use crate::render::{station_radii, StationSizing, LINE_WIDTH};

pub const MIN_FONT_SIZE: u32 = 8;
pub const MAX_FONT_SIZE: u32 = 60;
/// Names longer than this are shortened while searching for a font size.
pub const ABBREVIATE_OVER: usize = 16;
const CLEARANCE: f64 = 2.0;
/// Contact closer than this (pt) counts as touching, not overlapping.
pub const TOUCH: f64 = 1e-9;

fn overlap(a: &Rect, b: &Rect) -> bool {
    a.inflate(-TOUCH).intersects(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Text runs away from the station along its angle.
    Right,
    /// Text ends just before the station.
    Left,
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    angle: f64,
    placement: Placement,
}

const CANDIDATES: [Candidate; 8] = [
    Candidate { angle: 0.0, placement: Placement::Right },
    Candidate { angle: 0.0, placement: Placement::Left },
    Candidate { angle: 45.0, placement: Placement::Right },
    Candidate { angle: 45.0, placement: Placement::Left },
    Candidate { angle: -45.0, placement: Placement::Right },
    Candidate { angle: -45.0, placement: Placement::Left },
    Candidate { angle: 0.0, placement: Placement::Above },
    Candidate { angle: 0.0, placement: Placement::Below },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub vertex: ElementId,
    pub text: String,
    pub full_text: String,
    /// Start of the text baseline axis for `Right`, its end for `Left`, its
    /// centre for `Above`/`Below` (text is vertically centred on it).
    pub anchor: Point,
    pub angle: f64,
    pub placement: Placement,
    pub font_size: f64,
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPlacement {
    pub labels: Vec<Label>,
    pub font_size: f64,
    pub fallback_used: bool,
}

pub fn text_width(text: &str, size: f64) -> f64 {
    0.6 * size * text.chars().count() as f64
}

pub fn text_height(size: f64) -> f64 {
    1.2 * size
}

pub fn abbreviate(name: &str) -> String {
    if name.chars().count() > ABBREVIATE_OVER {
        let mut s: String = name.chars().take(ABBREVIATE_OVER - 1).collect();
        s.push('…');
        s
    } else {
        name.to_string()
    }
}

/// Anchor and box of `text` placed by candidate `c` around a station at `p`
/// with radius `r`.
fn place(p: Point, r: f64, c: Candidate, text: &str, size: f64) -> (Point, Rect) {
    let w = text_width(text, size);
    let h = text_height(size);
    match c.placement {
        Placement::Above | Placement::Below => {
            let dy = r + CLEARANCE + h / 2.0;
            let centre = if c.placement == Placement::Above {
                p + Point::new(0.0, dy)
            } else {
                p - Point::new(0.0, dy)
            };
            let half = Point::new(w / 2.0, h / 2.0);
            (centre, Rect { min: centre - half, max: centre + half })
        }
        Placement::Right | Placement::Left => {
            let u = Point::from_angle_deg(c.angle);
            let n = u.perp();
            // diagonal boxes start far enough out that their bounding box
            // clears the station on both axes
            let gap = if c.angle == 0.0 {
                r + CLEARANCE
            } else {
                std::f64::consts::SQRT_2 * (r + CLEARANCE) + h / 2.0
            };
            let (s0, s1) = if c.placement == Placement::Right {
                (gap, gap + w)
            } else {
                (-gap - w, -gap)
            };
            let corners = [
                p + u * s0 + n * (h / 2.0),
                p + u * s0 - n * (h / 2.0),
                p + u * s1 + n * (h / 2.0),
                p + u * s1 - n * (h / 2.0),
            ];
            let anchor = if c.placement == Placement::Right { p + u * s0 } else { p + u * s1 };
            (anchor, Rect::from_points(&corners))
        }
    }
}

fn has_horizontal_edge(m: &EmbeddedMap, v: ElementId) -> bool {
    m.support.edges().iter().any(|&(a, b)| {
        if a != v && b != v {
            return false;
        }
        let k = nearest_octilinear((m.pos(b) - m.pos(a)).angle_deg());
        k == 0 || k == 4
    })
}

/// Candidate weights (lower is better) for a station.
fn weights(horizontal: bool) -> [u32; 8] {
    if horizontal {
        [3, 3, 0, 2, 0, 2, 4, 4]
    } else {
        [0, 2, 1, 3, 1, 3, 4, 4]
    }
}

/// Fixed obstacles: line corridors and station discs.
pub(crate) struct Obstacles {
    segments: Vec<(Point, Point, f64)>,
    stations: Vec<(ElementId, Point, f64)>,
}

impl Obstacles {
    pub(crate) fn new(m: &EmbeddedMap, orders: &LineOrderMap, radii: &[f64]) -> Self {
        let segments = m
            .support
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| (m.pos(a), m.pos(b), LINE_WIDTH * orders.orders[e].len() as f64 / 2.0))
            .collect();
        let stations = m
            .support
            .vertices()
            .into_iter()
            .map(|v| (v, m.pos(v), radii[v.0]))
            .collect();
        Self { segments, stations }
    }

    /// Whether a label box of station `own` hits a corridor or another station.
    pub(crate) fn blocks(&self, own: ElementId, bbox: &Rect) -> bool {
        self.segments
            .iter()
            .any(|&(a, b, half)| bbox.distance_to_segment(a, b) < half - TOUCH)
            || self
                .stations
                .iter()
                .any(|&(v, c, r)| v != own && bbox.distance_to_point(c) < r - TOUCH)
    }
}

struct Setup<'a> {
    map: &'a EmbeddedMap,
    radii: Vec<f64>,
    obstacles: Obstacles,
    names: Vec<String>,
    horizontal: Vec<bool>,
}

impl Setup<'_> {
    fn label(&self, v: ElementId, ci: usize, text: &str, size: f64) -> Label {
        let c = CANDIDATES[ci];
        let (anchor, bbox) = place(self.map.pos(v), self.radii[v.0], c, text, size);
        Label {
            vertex: v,
            text: text.to_string(),
            full_text: self.names[v.0].clone(),
            anchor,
            angle: c.angle,
            placement: c.placement,
            font_size: size,
            bbox,
        }
    }

    /// Unblocked candidates per station, lightest first.
    fn pools(&self, size: u32) -> Option<Vec<(ElementId, Vec<(Label, usize)>)>> {
        let size = size as f64;
        let mut out = Vec::new();
        for v in self.map.support.vertices() {
            let text = abbreviate(&self.names[v.0]);
            let w = weights(self.horizontal[v.0]);
            let mut order: Vec<usize> = (0..CANDIDATES.len()).collect();
            order.sort_by_key(|&ci| (w[ci], ci));
            let pool: Vec<(Label, usize)> = order
                .into_iter()
                .map(|ci| (self.label(v, ci, &text, size), ci))
                .filter(|(l, _)| !self.obstacles.blocks(v, &l.bbox))
                .collect();
            if pool.is_empty() {
                return None;
            }
            out.push((v, pool));
        }
        Some(out)
    }

    /// A conflict-free choice of one candidate per station: greedy by weight
    /// first, then backtracking with at most `SEARCH_BUDGET` nodes.
    fn select(&self, size: u32) -> Option<Vec<(Label, usize)>> {
        let pools = self.pools(size)?;
        self.greedy(&pools).or_else(|| backtrack(&pools, SEARCH_BUDGET))
    }

    fn greedy(&self, pools: &[(ElementId, Vec<(Label, usize)>)]) -> Option<Vec<(Label, usize)>> {
        let mut all: Vec<(u32, usize, usize)> = Vec::new();
        for (i, (v, pool)) in pools.iter().enumerate() {
            let w = weights(self.horizontal[v.0]);
            for (k, (_, ci)) in pool.iter().enumerate() {
                all.push((w[*ci], i, k));
            }
        }
        all.sort_by_key(|&(w, i, k)| (w, pools[i].0, pools[i].1[k].1));
        let mut chosen: Vec<Option<usize>> = vec![None; pools.len()];
        let mut boxes: Vec<Rect> = Vec::new();
        for (_, i, k) in all {
            let b = &pools[i].1[k].0.bbox;
            if chosen[i].is_some() || boxes.iter().any(|o| overlap(o, b)) {
                continue;
            }
            boxes.push(*b);
            chosen[i] = Some(k);
        }
        chosen
            .iter()
            .enumerate()
            .map(|(i, k)| k.map(|k| pools[i].1[k].clone()))
            .collect()
    }
}

/// Nodes explored by the exact search before a font size is given up.
const SEARCH_BUDGET: usize = 20_000;

/// Depth-first search over candidate choices, stations with the fewest
/// options first.
fn backtrack(pools: &[(ElementId, Vec<(Label, usize)>)], budget: usize) -> Option<Vec<(Label, usize)>> {
    let mut order: Vec<usize> = (0..pools.len()).collect();
    order.sort_by_key(|&i| (pools[i].1.len(), pools[i].0));
    let mut pick = vec![0usize; pools.len()];
    let mut nodes = 0;
    fn go(
        depth: usize,
        order: &[usize],
        pools: &[(ElementId, Vec<(Label, usize)>)],
        pick: &mut [usize],
        nodes: &mut usize,
        budget: usize,
    ) -> Option<bool> {
        if depth == order.len() {
            return Some(true);
        }
        let i = order[depth];
        for k in 0..pools[i].1.len() {
            *nodes += 1;
            if *nodes > budget {
                return None;
            }
            let b = &pools[i].1[k].0.bbox;
            let clash = order[..depth]
                .iter()
                .any(|&j| overlap(&pools[j].1[pick[j]].0.bbox, b));
            if clash {
                continue;
            }
            pick[i] = k;
            if go(depth + 1, order, pools, pick, nodes, budget)? {
                return Some(true);
            }
        }
        Some(false)
    }
    match go(0, &order, pools, &mut pick, &mut nodes, budget) {
        Some(true) => Some((0..pools.len()).map(|i| pools[i].1[pick[i]].clone()).collect()),
        _ => None,
    }
}

/// Largest integer font size in `8..=60` with a complete conflict-free
/// labeling, then full names restored wherever they still fit. Falls back to
/// [`fallback_labeling`] when even size 8 fails.
pub fn label_stations(m: &EmbeddedMap, orders: &LineOrderMap, names: &[String]) -> LabelPlacement {
    let radii = station_radii(m, orders, StationSizing::default());
    label_stations_with(m, orders, names, &radii)
}

pub fn label_stations_with(m: &EmbeddedMap, orders: &LineOrderMap, names: &[String], radii: &[f64]) -> LabelPlacement {
    let setup = Setup {
        map: m,
        radii: radii.to_vec(),
        obstacles: Obstacles::new(m, orders, radii),
        names: names.to_vec(),
        horizontal: (0..m.support.vertex_count())
            .map(|v| has_horizontal_edge(m, ElementId(v)))
            .collect(),
    };
    if m.support.vertices().is_empty() {
        return LabelPlacement {
            labels: Vec::new(),
            font_size: MAX_FONT_SIZE as f64,
            fallback_used: false,
        };
    }
    // validity is not monotone in the size (diagonal boxes move outward as
    // they grow), so sizes are tried from the top down
    let Some((size, best)) = (MIN_FONT_SIZE..=MAX_FONT_SIZE)
        .rev()
        .find_map(|size| setup.select(size).map(|sel| (size, sel)))
    else {
        return fallback_labeling(m, names, radii);
    };
    let fs = size as f64;
    let mut labels: Vec<Label> = best.iter().map(|(l, _)| l.clone()).collect();
    for i in 0..labels.len() {
        if labels[i].text == labels[i].full_text {
            continue;
        }
        let (v, ci) = (labels[i].vertex, best[i].1);
        let full = setup.label(v, ci, &setup.names[v.0], fs);
        let clear = !setup.obstacles.blocks(v, &full.bbox)
            && labels
                .iter()
                .enumerate()
                .all(|(j, o)| j == i || !overlap(&o.bbox, &full.bbox));
        if clear {
            labels[i] = full;
        }
    }
    LabelPlacement {
        labels,
        font_size: fs,
        fallback_used: false,
    }
}

/// Size-8 labels, diagonal at stations with a horizontal edge and
/// horizontal below every other station. Overlaps are allowed.
pub fn fallback_labeling(m: &EmbeddedMap, names: &[String], radii: &[f64]) -> LabelPlacement {
    let fs = MIN_FONT_SIZE as f64;
    let labels = m
        .support
        .vertices()
        .into_iter()
        .map(|v| {
            let ci = if has_horizontal_edge(m, v) { 2 } else { 7 };
            let c = CANDIDATES[ci];
            let text = abbreviate(&names[v.0]);
            let (anchor, bbox) = place(m.pos(v), radii[v.0], c, &text, fs);
            Label {
                vertex: v,
                text,
                full_text: names[v.0].clone(),
                anchor,
                angle: c.angle,
                placement: c.placement,
                font_size: fs,
                bbox,
            }
        })
        .collect();
    LabelPlacement {
        labels,
        font_size: fs,
        fallback_used: true,
    }
}

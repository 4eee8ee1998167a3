//! Scaling, colouring, the layout document and its SVG rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, Rect};
use crate::labels::{LabelPlacement, Placement};
use crate::layout::EmbeddedMap;
use crate::lines::{LineOrderMap, Side};
use crate::metrics::MetricReport;
use crate::model::{SetId, SetSystem};
use crate::support::SupportGraph;

/// Stroke width of one metro line, in pt.
pub const LINE_WIDTH: f64 = 8.0;
/// Mean edge length of a rendered map, in pt.
pub const TARGET_EDGE_LENGTH: f64 = 50.0;
pub const STATION_RADIUS: f64 = 6.0;
pub const MARGIN: f64 = 80.0;
pub const BACKGROUND: &str = "#EEEEEE";
pub const LEGEND_ROW: f64 = 10.0;
pub const SCHEMA_VERSION: u32 = 1;

pub const TABLEAU20: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
    "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

/// How interchange circles grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationSizing {
    /// With the largest number of lines on an incident edge.
    #[default]
    MaxAdjacentLines,
    /// With the number of sets the station belongs to.
    IncidentSets,
}

/// Station radii: 6 pt on a single line, `4 + 4·k` pt at interchanges.
pub fn station_radii(m: &EmbeddedMap, orders: &LineOrderMap, sizing: StationSizing) -> Vec<f64> {
    let g = &m.support;
    let n = g.vertex_count();
    let mut sets = vec![0usize; n];
    for line in g.lines() {
        for v in line {
            sets[v.0] += 1;
        }
    }
    let mut widest = vec![0usize; n];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let k = orders.orders[e].len();
        widest[u.0] = widest[u.0].max(k);
        widest[v.0] = widest[v.0].max(k);
    }
    (0..n)
        .map(|v| {
            if sets[v] <= 1 {
                STATION_RADIUS
            } else {
                let k = match sizing {
                    StationSizing::MaxAdjacentLines => widest[v],
                    StationSizing::IncidentSets => sets[v],
                };
                4.0 + 4.0 * k as f64
            }
        })
        .collect()
}

/// Uniform scaling about the origin to a mean edge length of 50 pt.
pub fn scale_layout(m: &EmbeddedMap) -> EmbeddedMap {
    let mean = m.mean_edge_length();
    if mean <= 0.0 {
        return m.clone();
    }
    let k = TARGET_EDGE_LENGTH / mean;
    EmbeddedMap::new(m.support.clone(), m.positions.iter().map(|&p| p * k).collect())
}

/// CIE L*a*b* (D65) of a `#rrggbb` colour.
pub fn hex_to_lab(hex: &str) -> [f64; 3] {
    let h = hex.trim_start_matches('#');
    let channel = |i: usize| {
        let c = u8::from_str_radix(&h[i..i + 2], 16).unwrap_or(0) as f64 / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    };
    let (r, g, b) = (channel(0), channel(2), channel(4));
    let x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
    let f = |t: f64| {
        let d = 6.0 / 29.0;
        if t > d * d * d {
            t.cbrt()
        } else {
            t / (3.0 * d * d) + 4.0 / 29.0
        }
    };
    let (fx, fy, fz) = (f(x), f(y), f(z));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn cie76(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub colors: Vec<String>,
    /// Palette index of every line.
    pub assignment: Vec<usize>,
}

impl Palette {
    pub fn color(&self, s: SetId) -> &str {
        &self.colors[self.assignment[s.0]]
    }
}

/// Lines sharing at least one edge.
pub fn line_adjacency(g: &SupportGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.lines().len()];
    for lines in g.lines_per_edge() {
        for &a in &lines {
            for &b in &lines {
                if a != b && !adj[a.0].contains(&b.0) {
                    adj[a.0].push(b.0);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Greedy colouring in order of decreasing adjacency degree. Each line takes
/// the colour (unused ones first while any remain) farthest, by its nearest
/// coloured neighbour, from the colours already next to it; ties go to the
/// less used colour, then the lower palette index.
pub fn assign_colors(adjacency: &[Vec<usize>]) -> Palette {
    let labs: Vec<[f64; 3]> = TABLEAU20.iter().map(|h| hex_to_lab(h)).collect();
    let n = adjacency.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| adjacency[b].len().cmp(&adjacency[a].len()).then(a.cmp(&b)));
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut uses = [0usize; 20];
    for s in order {
        let any_unused = uses.contains(&0);
        let mut best: Option<(f64, usize, usize)> = None;
        for c in 0..TABLEAU20.len() {
            if any_unused && uses[c] > 0 {
                continue;
            }
            let score = adjacency[s]
                .iter()
                .filter_map(|&nb| assignment[nb])
                .map(|nc| cie76(labs[c], labs[nc]))
                .fold(f64::INFINITY, f64::min);
            let better = match best {
                None => true,
                Some((bs, bu, _)) => score > bs || (score == bs && uses[c] < bu),
            };
            if better {
                best = Some((score, uses[c], c));
            }
        }
        let (_, _, c) = best.expect("palette is not empty");
        assignment[s] = Some(c);
        uses[c] += 1;
    }
    Palette {
        colors: TABLEAU20.iter().map(|s| s.to_string()).collect(),
        assignment: assignment.into_iter().map(|c| c.unwrap_or(0)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEntry {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub sets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    /// Left to right, travelling from `u` to `v`.
    pub lines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineEntry {
    pub set: usize,
    pub color: String,
    pub stations: Vec<usize>,
    /// Terminus sides at the first and the last station.
    pub sides: [Side; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub vertex: usize,
    pub text: String,
    pub full_text: String,
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    pub placement: Placement,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsEntry {
    pub font_size: f64,
    pub fallback_used: bool,
    pub items: Vec<LabelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub preset: Option<String>,
    pub support: String,
    pub insertion: String,
    pub layout: String,
    pub schematization: String,
    pub seed: u64,
    pub stages: Vec<String>,
}

/// Everything a viewer needs: geometry in pt, line orders, colours,
/// labels, metrics and how the map was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub schema_version: u32,
    pub elements: Vec<NamedEntry>,
    pub sets: Vec<NamedEntry>,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    pub lines: Vec<LineEntry>,
    pub labels: LabelsEntry,
    pub metrics: MetricReport,
    pub provenance: Provenance,
}

pub struct DocumentParts<'a> {
    pub system: &'a SetSystem,
    pub map: &'a EmbeddedMap,
    pub orders: &'a LineOrderMap,
    pub labels: &'a LabelPlacement,
    pub palette: &'a Palette,
    pub radii: &'a [f64],
    pub metrics: MetricReport,
    pub provenance: Provenance,
}

pub fn build_document(p: DocumentParts) -> LayoutDocument {
    let g = &p.map.support;
    let vertices = g
        .vertices()
        .into_iter()
        .map(|v| VertexEntry {
            id: v.0,
            x: p.map.pos(v).x,
            y: p.map.pos(v).y,
            radius: p.radii[v.0],
            sets: p.system.memberships(v).iter().map(|s| s.0).collect(),
        })
        .collect();
    LayoutDocument {
        schema_version: SCHEMA_VERSION,
        elements: p
            .system
            .element_names()
            .iter()
            .enumerate()
            .map(|(id, name)| NamedEntry { id, name: name.clone() })
            .collect(),
        sets: p
            .system
            .set_names()
            .iter()
            .enumerate()
            .map(|(id, name)| NamedEntry { id, name: name.clone() })
            .collect(),
        vertices,
        edges: g
            .edges()
            .iter()
            .zip(&p.orders.orders)
            .map(|(&(u, v), order)| EdgeEntry {
                u: u.0,
                v: v.0,
                lines: order.iter().map(|s| s.0).collect(),
            })
            .collect(),
        lines: g
            .lines()
            .iter()
            .enumerate()
            .map(|(s, line)| LineEntry {
                set: s,
                color: p.palette.color(SetId(s)).to_string(),
                stations: line.iter().map(|v| v.0).collect(),
                sides: p.orders.sides.0[s],
            })
            .collect(),
        labels: LabelsEntry {
            font_size: p.labels.font_size,
            fallback_used: p.labels.fallback_used,
            items: p
                .labels
                .labels
                .iter()
                .map(|l| LabelEntry {
                    vertex: l.vertex.0,
                    text: l.text.clone(),
                    full_text: l.full_text.clone(),
                    x: l.anchor.x,
                    y: l.anchor.y,
                    angle: l.angle,
                    placement: l.placement,
                    size: l.font_size,
                })
                .collect(),
        },
        metrics: p.metrics,
        provenance: p.provenance,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DocumentError {
    #[error("invalid JSON at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: String, expected: u32 },
    #[error("document shape: {0}")]
    Shape(String),
    #[error("dangling reference: {0}")]
    Dangling(String),
}

pub fn write_document(doc: &LayoutDocument) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("document serializes");
    out.push(b'\n');
    out
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in bytes.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}

pub fn read_document(bytes: &[u8]) -> Result<LayoutDocument, DocumentError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| DocumentError::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match value.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => {
            return Err(DocumentError::SchemaVersion {
                found: v.to_string(),
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(DocumentError::Shape("missing schema_version".into())),
    }
    let doc: LayoutDocument = serde_json::from_value(value).map_err(|e| DocumentError::Shape(e.to_string()))?;
    check_references(&doc)?;
    Ok(doc)
}

fn check_references(doc: &LayoutDocument) -> Result<(), DocumentError> {
    let elements = doc.elements.len();
    let sets = doc.sets.len();
    let mut is_vertex = vec![false; elements];
    for v in &doc.vertices {
        if v.id >= elements {
            return Err(DocumentError::Dangling(format!("vertex {} has no element", v.id)));
        }
        is_vertex[v.id] = true;
        if let Some(s) = v.sets.iter().find(|&&s| s >= sets) {
            return Err(DocumentError::Dangling(format!("vertex {} lists unknown set {s}", v.id)));
        }
    }
    let vertex = |id: usize| id < elements && is_vertex[id];
    for e in &doc.edges {
        if !vertex(e.u) || !vertex(e.v) {
            return Err(DocumentError::Dangling(format!("edge {}-{} names an unknown vertex", e.u, e.v)));
        }
        if let Some(s) = e.lines.iter().find(|&&s| s >= sets) {
            return Err(DocumentError::Dangling(format!("edge {}-{} carries unknown set {s}", e.u, e.v)));
        }
    }
    for l in &doc.lines {
        if l.set >= sets {
            return Err(DocumentError::Dangling(format!("line for unknown set {}", l.set)));
        }
        if let Some(v) = l.stations.iter().find(|&&v| !vertex(v)) {
            return Err(DocumentError::Dangling(format!("line {} stops at unknown vertex {v}", l.set)));
        }
    }
    if let Some(l) = doc.labels.items.iter().find(|l| !vertex(l.vertex)) {
        return Err(DocumentError::Dangling(format!("label for unknown vertex {}", l.vertex)));
    }
    Ok(())
}

/// Formats a coordinate with two decimals, without a negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Lane order of every edge at its `u` end and its `v` end. At a vertex, an
/// edge takes over the arrangement of lines arriving from any neighbouring
/// edge with a smaller index, so each order change shows up in the middle of
/// exactly one edge.
pub fn end_orders(doc: &LayoutDocument) -> Vec<[Vec<usize>; 2]> {
    let index: std::collections::HashMap<(usize, usize), usize> = doc
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.u.min(e.v), e.u.max(e.v)), i))
        .collect();
    let edge_of = |a: usize, b: usize| index.get(&(a.min(b), a.max(b))).copied();
    // neighbour of line s beyond x when arriving from y
    let beyond = |s: usize, y: usize, x: usize| -> Option<usize> {
        let st = &doc.lines.iter().find(|l| l.set == s)?.stations;
        let i = st.iter().position(|&v| v == x)?;
        let j = st.iter().position(|&v| v == y)?;
        if j + 1 == i {
            st.get(i + 1).copied()
        } else {
            i.checked_sub(1).map(|k| st[k])
        }
    };
    doc.edges
        .iter()
        .enumerate()
        .map(|(f, edge)| {
            let mut ends: [Vec<usize>; 2] = [edge.lines.clone(), edge.lines.clone()];
            for (end, (x, y)) in [(edge.u, edge.v), (edge.v, edge.u)].into_iter().enumerate() {
                let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
                for &s in &edge.lines {
                    if let Some(w) = beyond(s, y, x) {
                        if let Some(e) = edge_of(x, w) {
                            if e < f {
                                groups.entry(e).or_default().push(s);
                            }
                        }
                    }
                }
                for (e, members) in groups {
                    if members.len() < 2 {
                        continue;
                    }
                    let other = &doc.edges[e];
                    // order on the neighbour, as travelled toward x
                    let mut seq: Vec<usize> = other.lines.iter().copied().filter(|s| members.contains(s)).collect();
                    if x != other.v {
                        seq.reverse();
                    }
                    // continuing away from x along this edge
                    if x != edge.u {
                        seq.reverse();
                    }
                    let mut slots: Vec<usize> = ends[end]
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| members.contains(s))
                        .map(|(i, _)| i)
                        .collect();
                    slots.sort_unstable();
                    for (slot, s) in slots.into_iter().zip(seq) {
                        ends[end][slot] = s;
                    }
                }
            }
            ends
        })
        .collect()
}

/// Bounding box of stations and label boxes, in layout coordinates.
fn content_bounds(doc: &LayoutDocument) -> Rect {
    let mut pts: Vec<Point> = Vec::new();
    for v in &doc.vertices {
        pts.push(Point::new(v.x - v.radius, v.y - v.radius));
        pts.push(Point::new(v.x + v.radius, v.y + v.radius));
    }
    for l in &doc.labels.items {
        let w = crate::labels::text_width(&l.text, l.size);
        let h = crate::labels::text_height(l.size);
        let a = Point::new(l.x, l.y);
        let u = Point::from_angle_deg(l.angle);
        let n = u.perp() * (h / 2.0);
        let (s0, s1) = match l.placement {
            Placement::Right => (0.0, w),
            Placement::Left => (-w, 0.0),
            Placement::Above | Placement::Below => (-w / 2.0, w / 2.0),
        };
        for s in [s0, s1] {
            pts.push(a + u * s + n);
            pts.push(a + u * s - n);
        }
    }
    if pts.is_empty() {
        pts.push(Point::ZERO);
    }
    Rect::from_points(&pts)
}

/// Static SVG of a document: background, line lanes, stations, labels and
/// a legend in the bottom-right corner. Layout y points up; SVG y points
/// down.
pub fn render_svg(doc: &LayoutDocument) -> Vec<u8> {
    let pos: std::collections::HashMap<usize, Point> =
        doc.vertices.iter().map(|v| (v.id, Point::new(v.x, v.y))).collect();
    let bounds = content_bounds(doc).inflate(MARGIN);
    let legend_names: Vec<&str> = doc.lines.iter().map(|l| doc.sets[l.set].name.as_str()).collect();
    let legend_w = 30.0
        + legend_names
            .iter()
            .map(|n| crate::labels::text_width(n, 8.0))
            .fold(0.0, f64::max);
    let legend_h = LEGEND_ROW * doc.lines.len() as f64;
    // svg frame: x as is, y negated
    let (x0, x1) = (bounds.min.x, bounds.max.x.max(bounds.min.x + legend_w + 20.0));
    let (y0, y1) = (-bounds.max.y, -bounds.min.y + legend_h + 10.0);
    let (w, h) = (x1 - x0, y1 - y0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        num(x0),
        num(y0),
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{BACKGROUND}"/>"#,
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    let colour = |set: usize| {
        doc.lines
            .iter()
            .find(|l| l.set == set)
            .map_or("#000000", |l| l.color.as_str())
    };
    let flip = |p: Point| format!("{} {}", num(p.x), num(-p.y));
    let _ = writeln!(s, r#"<g id="lines" fill="none" stroke-width="{}" stroke-linecap="butt">"#, num(LINE_WIDTH));
    let ends = end_orders(doc);
    for (edge, [at_u, at_v]) in doc.edges.iter().zip(&ends) {
        let (pu, pv) = (pos[&edge.u], pos[&edge.v]);
        let d = pv - pu;
        let n = d.normalized().perp();
        let k = edge.lines.len();
        let lane = |order: &[usize], set: usize| {
            let i = order.iter().position(|&x| x == set).unwrap_or(0);
            (i as f64 - (k as f64 - 1.0) / 2.0) * LINE_WIDTH
        };
        // leftmost lane is farthest along the left normal
        for &set in &edge.lines {
            let (ou, ov) = (-lane(at_u, set), -lane(at_v, set));
            let p0 = pu + n * ou;
            let p1 = pv + n * ov;
            let path = if (ou - ov).abs() < 1e-9 {
                format!("M {} L {}", flip(p0), flip(p1))
            } else {
                let a = pu + d * 0.35 + n * ou;
                let c1 = pu + d * 0.5 + n * ou;
                let c2 = pu + d * 0.5 + n * ov;
                let b = pu + d * 0.65 + n * ov;
                format!(
                    "M {} L {} C {} {} {} L {}",
                    flip(p0),
                    flip(a),
                    flip(c1),
                    flip(c2),
                    flip(b),
                    flip(p1)
                )
            };
            let _ = writeln!(s, r#"<path d="{path}" stroke="{}" data-set="{set}"/>"#, colour(set));
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="stations" stroke-width="2">"#);
    for v in &doc.vertices {
        let stroke = if v.sets.len() > 1 { "#333333" } else { colour(v.sets[0]) };
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#FFFFFF" stroke="{stroke}" data-vertex="{}"/>"##,
            num(v.x),
            num(-v.y),
            num(v.radius),
            v.id
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="labels" font-family="sans-serif" fill="#222222">"##);
    for l in &doc.labels.items {
        let anchor = match l.placement {
            Placement::Right => "start",
            Placement::Left => "end",
            Placement::Above | Placement::Below => "middle",
        };
        let rotate = if l.angle == 0.0 {
            String::new()
        } else {
            format!(r#" transform="rotate({} {} {})""#, num(-l.angle), num(l.x), num(-l.y))
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{anchor}" dominant-baseline="central"{rotate} data-vertex="{}">{}</text>"#,
            num(l.x),
            num(-l.y),
            num(l.size),
            l.vertex,
            escape(&l.text)
        );
    }
    let _ = writeln!(s, "</g>");
    let lx = x1 - legend_w - 10.0;
    let ly = y1 - legend_h - 5.0;
    let _ = writeln!(s, r#"<g id="legend" font-family="sans-serif" font-size="8">"#);
    for (i, (line, name)) in doc.lines.iter().zip(&legend_names).enumerate() {
        let y = ly + LEGEND_ROW * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="20.00" height="6.00" fill="{}"/><text x="{}" y="{}" dominant-baseline="central">{}</text>"#,
            num(lx),
            num(y + 2.0),
            line.color,
            num(lx + 26.0),
            num(y + 5.0),
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s.into_bytes()
}

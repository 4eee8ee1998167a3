//! Small 2-D geometry kit shared by the layout, schematization, labeling and
//! metric code. Coordinates are y-up; the SVG writer flips the axis.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `deg` degrees counter-clockwise from the positive x axis.
    pub fn from_angle_deg(deg: f64) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Perpendicular vector, rotated +90°.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            Point::ZERO
        }
    }

    /// Direction angle in degrees, in `[0, 360)`.
    pub fn angle_deg(self) -> f64 {
        normalize_deg(self.y.atan2(self.x).to_degrees())
    }

    pub fn rotate_deg(self, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Point {
    fn sub_assign(&mut self, o: Point) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, k: f64) -> Point {
        Point::new(self.x / k, self.y / k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Maps any angle to `[0, 360)`.
pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped into `(-180, 180]`.
pub fn wrap_deg(a: f64) -> f64 {
    let mut r = a.rem_euclid(360.0);
    if r > 180.0 {
        r -= 360.0;
    }
    r
}

/// Absolute deviation of a direction from the nearest multiple of 45°, in `[0, 22.5]`.
pub fn octilinear_deviation_deg(angle: f64) -> f64 {
    let r = angle.rem_euclid(45.0);
    r.min(45.0 - r)
}

/// Nearest octilinear direction index (0..8, direction `45·k` degrees).
pub fn nearest_octilinear(angle: f64) -> u8 {
    ((normalize_deg(angle) / 45.0).round() as i64).rem_euclid(8) as u8
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// True when the open segments `ab` and `cd` cross at a single interior point.
/// Touching, collinear overlap and shared endpoints do not count.
pub fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn from_points(points: &[Point]) -> Rect {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    /// Closed-interior overlap with positive area.
    pub fn intersects(&self, o: &Rect) -> bool {
        self.min.x < o.max.x && o.min.x < self.max.x && self.min.y < o.max.y && o.min.y < self.max.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Whether the segment `ab` passes through the interior of the rectangle.
    pub fn intersects_segment(&self, a: Point, b: Point) -> bool {
        // Liang–Barsky clipping against the open rectangle.
        let d = b - a;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        let checks = [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q <= 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        t0 < t1
    }

    /// Euclidean distance from a point to the closed rectangle.
    pub fn distance_to_point(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// Euclidean distance from the segment `ab` to the closed rectangle;
    /// zero when they meet.
    pub fn distance_to_segment(&self, a: Point, b: Point) -> f64 {
        // clip against the closed rectangle first
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let mut meets = true;
        for (p, q) in [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    meets = false;
                }
            } else if p < 0.0 {
                t0 = t0.max(q / p);
            } else {
                t1 = t1.min(q / p);
            }
        }
        if meets && t0 <= t1 {
            return 0.0;
        }
        let corners = [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ];
        let seg = |c: Point| {
            let len2 = d.norm_sq();
            let t = if len2 == 0.0 { 0.0 } else { ((c - a).dot(d) / len2).clamp(0.0, 1.0) };
            c.dist(a + d * t)
        };
        corners
            .into_iter()
            .map(seg)
            .chain([self.distance_to_point(a), self.distance_to_point(b)])
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether a disc of radius `r` around `c` overlaps the rectangle.
    pub fn intersects_circle(&self, c: Point, r: f64) -> bool {
        let qx = c.x.clamp(self.min.x, self.max.x);
        let qy = c.y.clamp(self.min.y, self.max.y);
        (Point::new(qx, qy) - c).norm_sq() < r * r
    }
}

/// Mean Euclidean length over a list of edges.
pub fn mean_edge_length(positions: &[Point], edges: &[(usize, usize)]) -> f64 {
    if edges.is_empty() {
        return 0.0;
    }
    edges
        .iter()
        .map(|&(u, v)| positions[u].dist(positions[v]))
        .sum::<f64>()
        / edges.len() as f64
}

//! 2D geometry: vectors, poses, oriented rectangles and polylines.
//!
//! Everything here is plain `f64` arithmetic with no hidden state, so results
//! are bit-reproducible across runs and thread counts.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A 2D vector / point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    /// Unit vector in the same direction; zero vector stays zero.
    pub fn normalized(self) -> Vec2 {
        let len = self.length();
        if len > 0.0 {
            Vec2::new(self.x / len, self.y / len)
        } else {
            Vec2::ZERO
        }
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position plus heading (radians, counter-clockwise from +x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose { x, y, heading }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }
}

/// Smallest signed angle from `from` to `to`, in `[-pi, pi]`.
pub fn angle_diff(from: f64, to: f64) -> f64 {
    let mut d = (to - from) % std::f64::consts::TAU;
    if d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    } else if d < -std::f64::consts::PI {
        d += std::f64::consts::TAU;
    }
    d
}

/// Distance from point `p` to segment `ab`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.length_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn segments_intersect(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let d = |p: Vec2, q: Vec2, r: Vec2| (q - p).x * (r - p).y - (q - p).y * (r - p).x;
    let d1 = d(b1, b2, a1);
    let d2 = d(b1, b2, a2);
    let d3 = d(a1, a2, b1);
    let d4 = d(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        d(p, q, r) == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(b1, b2, a1) || on(b1, b2, a2) || on(a1, a2, b1) || on(a1, a2, b2)
}

/// Minimum distance between two segments (0 when they intersect).
pub fn segment_segment_distance(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> f64 {
    if segments_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

/// An oriented rectangle: a footprint placed at a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec2,
    pub heading: f64,
    /// Half extent along the heading axis.
    pub half_length: f64,
    /// Half extent across the heading axis.
    pub half_width: f64,
}

impl Obb {
    pub fn new(center: Vec2, heading: f64, half_length: f64, half_width: f64) -> Self {
        Obb {
            center,
            heading,
            half_length,
            half_width,
        }
    }

    /// Local axes: (forward, left).
    pub fn axes(&self) -> (Vec2, Vec2) {
        let fwd = Vec2::from_angle(self.heading);
        (fwd, fwd.perp())
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let (fwd, left) = self.axes();
        let l = fwd * self.half_length;
        let w = left * self.half_width;
        [
            self.center + l + w,
            self.center + l - w,
            self.center - l - w,
            self.center - l + w,
        ]
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        let (fwd, left) = self.axes();
        let rel = p - self.center;
        rel.dot(fwd).abs() <= self.half_length && rel.dot(left).abs() <= self.half_width
    }

    /// Closed-set overlap test via the separating axis theorem. Boundary
    /// contact counts as overlap. For 2D convex polygons the edge normals of
    /// both boxes are a complete axis set.
    pub fn overlaps(&self, other: &Obb) -> bool {
        self.separation(other) <= 0.0
    }

    /// Signed separation: positive gap when disjoint, negative penetration
    /// depth when overlapping, zero at boundary contact.
    ///
    /// The overlap branch is exact (max over the four SAT axes). The disjoint
    /// branch is the exact Euclidean gap (min over edge pairs).
    pub fn separation(&self, other: &Obb) -> f64 {
        let mut max_axis_gap = f64::NEG_INFINITY;
        let corners_a = self.corners();
        let corners_b = other.corners();
        let (fa, la) = self.axes();
        let (fb, lb) = other.axes();
        for axis in [fa, la, fb, lb] {
            let (min_a, max_a) = project(&corners_a, axis);
            let (min_b, max_b) = project(&corners_b, axis);
            let gap = (min_b - max_a).max(min_a - max_b);
            max_axis_gap = max_axis_gap.max(gap);
        }
        if max_axis_gap > 0.0 {
            // Disjoint: the axis gap underestimates corner-to-corner
            // distances, so compute the true gap from the edges.
            let mut best = f64::INFINITY;
            for i in 0..4 {
                for j in 0..4 {
                    let d = segment_segment_distance(
                        corners_a[i],
                        corners_a[(i + 1) % 4],
                        corners_b[j],
                        corners_b[(j + 1) % 4],
                    );
                    best = best.min(d);
                }
            }
            best
        } else {
            max_axis_gap
        }
    }

    /// Minimum distance from this box to a segment (0 on contact/overlap).
    pub fn distance_to_segment(&self, a: Vec2, b: Vec2) -> f64 {
        if self.contains_point(a) || self.contains_point(b) {
            return 0.0;
        }
        let corners = self.corners();
        let mut best = f64::INFINITY;
        for i in 0..4 {
            let d = segment_segment_distance(corners[i], corners[(i + 1) % 4], a, b);
            best = best.min(d);
        }
        best
    }
}

fn project(corners: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for c in corners {
        let p = c.dot(axis);
        min = min.min(p);
        max = max.max(p);
    }
    (min, max)
}

/// A piecewise-linear path with cumulative arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Builds a polyline, dropping zero-length segments.
    pub fn new(points: Vec<Vec2>) -> Self {
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last().map_or(true, |&q| q.distance(p) > 0.0) {
                pts.push(p);
            }
        }
        let mut cumulative = Vec::with_capacity(pts.len());
        let mut s = 0.0;
        cumulative.push(0.0);
        for w in pts.windows(2) {
            s += w[0].distance(w[1]);
            cumulative.push(s);
        }
        Polyline {
            points: pts,
            cumulative,
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().expect("polyline has at least one point")
    }

    /// Index of the segment containing arc length `s` (clamped).
    fn segment_index(&self, s: f64) -> usize {
        if self.points.len() < 2 {
            return 0;
        }
        match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).expect("finite arc length"))
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        }
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Vec2 {
        if self.points.len() < 2 {
            return self.points[0];
        }
        let s = s.clamp(0.0, self.length());
        let i = self.segment_index(s);
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let t = if seg_len > 0.0 {
            (s - self.cumulative[i]) / seg_len
        } else {
            0.0
        };
        self.points[i] + (self.points[i + 1] - self.points[i]) * t
    }

    /// Unit tangent of the segment containing `s`.
    pub fn direction_at(&self, s: f64) -> Vec2 {
        if self.points.len() < 2 {
            return Vec2::new(1.0, 0.0);
        }
        let i = self.segment_index(s.clamp(0.0, self.length()));
        (self.points[i + 1] - self.points[i]).normalized()
    }

    /// Number of whole vertices passed at arc length `s`; doubles as the
    /// index of the waypoint currently being approached.
    pub fn next_vertex_index(&self, s: f64) -> usize {
        if self.points.len() < 2 || s >= self.length() {
            return self.points.len().saturating_sub(1);
        }
        self.segment_index(s) + 1
    }

    /// Visits the sub-segments of the path from arc length `from` to the end.
    pub fn for_each_remaining_segment(&self, from: f64, mut f: impl FnMut(Vec2, Vec2) -> bool) {
        if self.points.len() < 2 {
            return;
        }
        let from = from.clamp(0.0, self.length());
        if from >= self.length() {
            return;
        }
        let first = self.segment_index(from);
        let mut a = self.point_at(from);
        for i in first..self.points.len() - 1 {
            let b = self.points[i + 1];
            if !f(a, b) {
                return;
            }
            a = b;
        }
    }

    /// Minimum distance from `p` to the part of the path at arc length >= `from`.
    pub fn distance_from_point(&self, p: Vec2, from: f64) -> f64 {
        if self.points.len() < 2 {
            return p.distance(self.points[0]);
        }
        let mut best = f64::INFINITY;
        self.for_each_remaining_segment(from, |a, b| {
            best = best.min(point_segment_distance(p, a, b));
            true
        });
        if best.is_infinite() {
            best = p.distance(self.end());
        }
        best
    }
}

//! Planar primitives for the reward landscape: convex hulls, containment and
//! distance to polygon boundaries.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// z-component of (a - o) x (b - o); positive when o->a->b turns left.
pub fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((ap.x * ab.x + ap.y * ab.y) / len2).clamp(0.0, 1.0);
    p.distance(Point2::new(a.x + t * ab.x, a.y + t * ab.y))
}

/// Convex polygon with counter-clockwise vertices and no collinear runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Wraps vertices that are already a CCW convex ring. Returns `None` for
    /// fewer than three vertices or a ring that is not strictly convex.
    pub fn from_ccw(vertices: Vec<Point2>) -> Option<Self> {
        let n = vertices.len();
        if n < 3 {
            return None;
        }
        let convex = (0..n).all(|i| {
            cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) > 0.0
        });
        convex.then_some(Self { vertices })
    }

    /// Convex hull by Andrew's monotone chain. `None` when the input has
    /// fewer than three non-collinear points.
    pub fn hull(points: &[Point2]) -> Option<Self> {
        let mut pts: Vec<Point2> = points
            .iter()
            .copied()
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .collect();
        pts.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then_with(|| a.y.total_cmp(&b.y))
        });
        pts.dedup();
        if pts.len() < 3 {
            return None;
        }

        let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            return None;
        }
        Some(Self { vertices: lower })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Inside-or-on test. Points within a relative 1e-12 of an edge line
    /// count as on the edge.
    pub fn contains(&self, p: Point2) -> bool {
        self.edges().all(|(a, b)| {
            let c = cross(a, b, p);
            c >= 0.0 || {
                let scale = a.distance(b) * (1.0 + a.distance(p));
                c >= -1e-12 * scale
            }
        })
    }

    /// Distance from `p` to the nearest polygon edge.
    pub fn edge_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .unwrap_or(f64::INFINITY)
    }

    pub fn area(&self) -> f64 {
        let s: f64 = self
            .edges()
            .map(|(a, b)| a.x * b.y - b.x * a.y)
            .sum();
        0.5 * s.abs()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for (a, b) in self.edges() {
            let (a, b) = (a.sub(o), b.sub(o));
            let w = a.x * b.y - b.x * a.y;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
            a2 += w;
        }
        Point2::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }
}

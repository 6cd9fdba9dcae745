use serde::{Deserialize, Serialize};

use super::{CommittedHalfspace, Point};
use crate::tol::tol;

/// Counterclockwise convex polygon in the plane. An empty vertex list is the
/// empty set; fewer than three vertices is a degenerate (segment/point) piece.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point>,
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x())
}

impl ConvexPolygon {
    /// Wraps vertices already in counterclockwise convex order, dropping
    /// repeated and collinear vertices.
    pub fn new(vertices: Vec<Point>) -> ConvexPolygon {
        let mut p = ConvexPolygon { vertices };
        p.normalize();
        p
    }

    pub fn empty() -> ConvexPolygon {
        ConvexPolygon { vertices: Vec::new() }
    }

    /// The axis-aligned square `[-m, m]^2`.
    pub fn square(m: f64) -> ConvexPolygon {
        ConvexPolygon::rect(-m, -m, m, m)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexPolygon {
        ConvexPolygon {
            vertices: vec![Point::p2(x0, y0), Point::p2(x1, y0), Point::p2(x1, y1), Point::p2(x0, y1)],
        }
    }

    /// The default bounding box `B`.
    pub fn bounding_box() -> ConvexPolygon {
        ConvexPolygon::square(tol().box_m)
    }

    pub fn triangle(a: Point, b: Point, c: Point) -> ConvexPolygon {
        if cross(&a, &b, &c) >= 0.0 {
            ConvexPolygon::new(vec![a, b, c])
        } else {
            ConvexPolygon::new(vec![a, c, b])
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Fewer than three vertices or (numerically) zero area.
    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3 || self.area() <= tol().dedup * tol().dedup
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            s += a.x() * b.y() - a.y() * b.x();
        }
        0.5 * s
    }

    /// Area centroid; falls back to the vertex average for degenerate pieces.
    pub fn centroid(&self) -> Option<Point> {
        let n = self.vertices.len();
        if n == 0 {
            return None;
        }
        let avg = Point::centroid(&self.vertices);
        if n < 3 {
            return Some(avg);
        }
        // Shift to the vertex average for precision on far-away polygons.
        let mut a = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i].sub(&avg);
            let q = self.vertices[(i + 1) % n].sub(&avg);
            let w = p.x() * q.y() - q.x() * p.y();
            a += w;
            cx += (p.x() + q.x()) * w;
            cy += (p.y() + q.y()) * w;
        }
        if a.abs() <= f64::EPSILON * self.scale().powi(2) {
            return Some(avg);
        }
        Some(Point::p2(avg.x() + cx / (3.0 * a), avg.y() + cy / (3.0 * a)))
    }

    fn scale(&self) -> f64 {
        self.vertices.iter().fold(1.0f64, |m, v| m.max(v.x().abs()).max(v.y().abs()))
    }

    /// Boundary-inclusive containment within the side tolerance.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let len = a.dist(b);
            if len == 0.0 {
                continue;
            }
            if cross(a, b, p) / len < -tol().side {
                return false;
            }
        }
        true
    }

    /// The supporting halfplanes of the edges, each containing the polygon.
    pub fn edge_halfspaces(&self) -> Vec<CommittedHalfspace> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            if let Ok(h) = super::Hyperplane::through(a, b) {
                out.push(CommittedHalfspace { plane: h, side: 1 });
            }
        }
        out
    }

    /// Drops repeated vertices and vertices collinear with their neighbours.
    pub fn normalize(&mut self) {
        // Absolute side tolerance, widened only by the rounding error of
        // far-away coordinates.
        let eps = |q: &Point| tol().side.max(8.0 * f64::EPSILON * q.norm());
        let mut v: Vec<Point> = Vec::with_capacity(self.vertices.len());
        for p in self.vertices.drain(..) {
            if v.last().is_some_and(|q| q.dist(&p) <= eps(q)) {
                continue;
            }
            v.push(p);
        }
        while v.len() > 1 && v[0].dist(v.last().unwrap()) <= eps(&v[0]) {
            v.pop();
        }
        loop {
            let n = v.len();
            if n < 3 {
                break;
            }
            let mut removed = false;
            for i in 0..n {
                let a = &v[(i + n - 1) % n];
                let b = &v[i];
                let c = &v[(i + 1) % n];
                let base = a.dist(c);
                if base == 0.0 || cross(a, b, c) / base <= eps(b) {
                    v.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        self.vertices = v;
    }
}

/// Intersection of a convex polygon with a closed halfplane.
pub fn clip_polygon(poly: &ConvexPolygon, h: &CommittedHalfspace) -> ConvexPolygon {
    let n = poly.vertices.len();
    if n == 0 {
        return ConvexPolygon::empty();
    }
    let band = tol().side;
    let vals: Vec<f64> = poly.vertices.iter().map(|p| h.value(p)).collect();
    if vals.iter().all(|&v| v >= -band) {
        return poly.clone();
    }
    if vals.iter().all(|&v| v <= band) {
        return ConvexPolygon::empty();
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (&poly.vertices[i], &poly.vertices[j]);
        let (va, vb) = (vals[i], vals[j]);
        if va >= -band {
            out.push(*a);
        }
        // Endpoints inside the band are kept as they are, so only a strict
        // sign change produces a new vertex.
        if (va > band && vb < -band) || (va < -band && vb > band) {
            let t = va / (va - vb);
            out.push(a.add(&b.sub(a).scale(t)));
        }
    }
    ConvexPolygon::new(out)
}

use serde::{Deserialize, Serialize};

use super::{ConvexPolygon, Point};
use crate::tol::tol;

/// A planar triangle. Zero-area triangles act as point or segment probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle2 {
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x())
}

fn seg_dist(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b.sub(a);
    let l2 = ab.dot(&ab);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(&ab) / l2).clamp(0.0, 1.0);
    p.dist(&a.add(&ab.scale(t)))
}

impl Triangle2 {
    pub fn new(a: Point, b: Point, c: Point) -> Triangle2 {
        Triangle2 { a, b, c }
    }

    /// Tiny axis-aligned probe triangle of side `tol().dedup` centered at `p`.
    pub fn probe(p: &Point) -> Triangle2 {
        let s = tol().dedup;
        let h = s / 2.0;
        Triangle2 {
            a: Point::p2(p.x() - h, p.y() - h / 2.0),
            b: Point::p2(p.x() + h, p.y() - h / 2.0),
            c: Point::p2(p.x() - h, p.y() + h * 1.5),
        }
    }

    pub fn vertices(&self) -> [Point; 3] {
        [self.a, self.b, self.c]
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * cross(&self.a, &self.b, &self.c)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area below the square of the dedup tolerance.
    pub fn is_degenerate(&self) -> bool {
        let t = tol().dedup;
        self.area() <= t * t * 1e-3
    }

    /// Closed containment, within the side tolerance of every edge.
    pub fn contains(&self, p: &Point) -> bool {
        if self.is_degenerate() {
            let d = seg_dist(p, &self.a, &self.b)
                .min(seg_dist(p, &self.b, &self.c))
                .min(seg_dist(p, &self.c, &self.a));
            return d <= tol().side;
        }
        let (a, b, c) = if self.signed_area() > 0.0 { (self.a, self.b, self.c) } else { (self.a, self.c, self.b) };
        let band = tol().side;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let len = u.dist(&v);
            if cross(&u, &v, p) / len < -band {
                return false;
            }
        }
        true
    }

    pub fn centroid(&self) -> Point {
        Point::centroid(&[self.a, self.b, self.c])
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon::triangle(self.a, self.b, self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containment_is_closed_and_orientation_free() {
        let t = Triangle2::new(Point::p2(0.0, 0.0), Point::p2(0.0, 1.0), Point::p2(1.0, 0.0));
        assert!(t.contains(&Point::p2(0.25, 0.25)));
        assert!(t.contains(&Point::p2(0.5, 0.5)));
        assert!(t.contains(&Point::p2(0.0, 0.0)));
        assert!(!t.contains(&Point::p2(0.6, 0.6)));
    }

    #[test]
    fn probe_contains_only_its_point() {
        let p = Point::p2(0.3, 0.7);
        let t = Triangle2::probe(&p);
        assert!(!t.is_degenerate());
        assert!(t.contains(&p));
        assert!(!t.contains(&Point::p2(0.3 + 1e-6, 0.7)));
    }

    #[test]
    fn segment_probe() {
        let t = Triangle2::new(Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(2.0, 0.0));
        assert!(t.is_degenerate());
        assert!(t.contains(&Point::p2(1.5, 0.0)));
        assert!(!t.contains(&Point::p2(3.0, 0.0)));
        assert!(!t.contains(&Point::p2(1.0, 0.1)));
    }
}

use serde::{Deserialize, Serialize};

use super::{ConvexPolygon, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullKind {
    Empty,
    Point,
    Segment,
    Polygon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub polygon: ConvexPolygon,
    pub kind: HullKind,
}

impl Hull {
    pub fn is_degenerate(&self) -> bool {
        self.kind != HullKind::Polygon
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x())
}

/// Counterclockwise hull by the monotone chain; collinear boundary points are
/// dropped. Degenerate inputs report the segment endpoints or the point.
pub fn convex_hull_2d(points: &[Point]) -> Hull {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x().total_cmp(&b.x()).then(a.y().total_cmp(&b.y())));
    pts.dedup_by(|a, b| a.x() == b.x() && a.y() == b.y());
    match pts.len() {
        0 => return Hull { polygon: ConvexPolygon::empty(), kind: HullKind::Empty },
        1 => return Hull { polygon: ConvexPolygon { vertices: pts }, kind: HullKind::Point },
        _ => {}
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        let a = pts[0];
        let b = *pts.last().unwrap();
        return Hull { polygon: ConvexPolygon { vertices: vec![a, b] }, kind: HullKind::Segment };
    }
    Hull { polygon: ConvexPolygon { vertices: lower }, kind: HullKind::Polygon }
}

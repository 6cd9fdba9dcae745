use super::{Hyperplane, Point};
use crate::tol::tol;

/// Sine of the angle below which two unit-normal lines count as parallel.
pub(crate) const PARALLEL_EPS: f64 = 1e-12;

/// Intersection of two planar lines, `None` when (near) parallel.
#[inline]
pub(crate) fn intersect_lines(a: &Hyperplane, b: &Hyperplane) -> Option<[f64; 2]> {
    let (ax, ay) = (a.normal.x(), a.normal.y());
    let (bx, by) = (b.normal.x(), b.normal.y());
    let det = ax * by - ay * bx;
    if det.abs() < PARALLEL_EPS {
        return None;
    }
    Some([(a.offset * by - b.offset * ay) / det, (ax * b.offset - bx * a.offset) / det])
}

/// Removes points that lie within `eps` (max-norm) of an earlier kept point.
/// Output is sorted by the first coordinate.
pub fn dedup_points<const D: usize>(mut pts: Vec<[f64; D]>, eps: f64) -> Vec<[f64; D]> {
    pts.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]));
    let mut kept: Vec<[f64; D]> = Vec::with_capacity(pts.len());
    for p in pts {
        let mut dup = false;
        for q in kept.iter().rev() {
            if q[0] < p[0] - eps {
                break;
            }
            if (0..D).all(|i| (q[i] - p[i]).abs() <= eps) {
                dup = true;
                break;
            }
        }
        if !dup {
            kept.push(p);
        }
    }
    kept
}

/// Raw pairwise vertices of a planar line arrangement, deduplicated.
pub(crate) fn arrangement_vertices_raw(lines: &[Hyperplane]) -> Vec<[f64; 2]> {
    let n = lines.len();
    let mut out = Vec::with_capacity(n.saturating_mul(n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            if let Some(v) = intersect_lines(&lines[i], &lines[j]) {
                out.push(v);
            }
        }
    }
    dedup_points(out, tol().dedup)
}

/// All pairwise intersection points of planar lines, with concurrent
/// crossings merged.
pub fn arrangement_vertices_2d(lines: &[Hyperplane]) -> Vec<Point> {
    debug_assert!(lines.iter().all(|l| l.dim() == 2));
    arrangement_vertices_raw(lines)
        .into_iter()
        .map(|[x, y]| Point::p2(x, y))
        .collect()
}

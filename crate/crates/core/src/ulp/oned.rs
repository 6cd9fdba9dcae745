//! Binary search for an undecided LP on a line.

use crate::geom::{CommittedHalfspace, Point};
use crate::oracle::{Separation, SeparationOracle};
use crate::tol::tol;

use super::{Session, UlpResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome1d {
    Feasible(f64),
    Infeasible,
}

/// Separation oracle restricted to a line parametrized by `t`. A violated
/// answer is the constraint `a t + b >= 0` it revealed.
pub trait LineQuery {
    fn query(&mut self, t: f64) -> Option<(f64, f64)>;
}

impl<F: FnMut(f64) -> Option<(f64, f64)>> LineQuery for F {
    fn query(&mut self, t: f64) -> Option<(f64, f64)> {
        self(t)
    }
}

fn budget(n: usize) -> usize {
    if n <= 1 {
        2
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize + 2
    }
}

fn slack(c: f64) -> f64 {
    1e-12 * c.abs().max(1.0)
}

/// Core search over `[lo, hi]` with the sorted crossing parameters `cuts`.
/// Each failed query removes the probed atomic interval together with every
/// interval on one side of it.
fn search<Q: LineQuery>(cuts: &[f64], mut lo: f64, mut hi: f64, q: &mut Q, max_queries: usize) -> (Outcome1d, usize) {
    let mut used = 0usize;
    while lo <= hi {
        // A range shrunk to a single point costs one probe, and only while
        // the query budget lasts.
        if hi - lo <= slack(lo) && used >= max_queries {
            break;
        }
        let ia = cuts.partition_point(|&c| c <= lo + slack(lo));
        let ib = cuts.partition_point(|&c| c < hi - slack(hi)).max(ia);
        let inner = &cuts[ia..ib];
        let m = inner.len();
        let mid = m / 2;
        let left = if mid == 0 { lo } else { inner[mid - 1] };
        let right = if mid == m { hi } else { inner[mid] };
        let t = 0.5 * (left + right);
        used += 1;
        let Some((ca, cb)) = q.query(t) else {
            return (Outcome1d::Feasible(t), used);
        };
        if ca.abs() <= 1e-300 {
            break;
        }
        let root = -cb / ca;
        if ca > 0.0 {
            lo = lo.max(root).max(t.next_up());
        } else {
            hi = hi.min(root).min(t.next_down());
        }
    }
    (Outcome1d::Infeasible, used)
}

/// One-dimensional undecided LP over crossing parameters `boundaries`,
/// restricted to `[lo, hi]`. Uses at most `ceil(log2 n) + 2` queries.
pub fn solve_ulp_1d_with<Q: LineQuery>(boundaries: &[f64], lo: f64, hi: f64, q: &mut Q) -> (Outcome1d, usize) {
    let mut cuts: Vec<f64> = boundaries.iter().copied().filter(|c| c.is_finite()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    search(&cuts, lo, hi, q, budget(boundaries.len()))
}

/// One-dimensional undecided LP against a 1D separation oracle, searching
/// the box `[-M, M]`.
pub fn solve_ulp_1d(boundaries: &[f64], oracle: &dyn SeparationOracle) -> UlpResult {
    let mut s = Session::new(oracle);
    let m = tol().box_m;
    let r = {
        let mut q = |t: f64| match s.separate(&Point::new(&[t])) {
            Separation::Feasible => None,
            Separation::Violated(v) => {
                let (g, h) = v.halfspace.as_geq();
                Some((g[0], -h))
            }
        };
        solve_ulp_1d_with(boundaries, -m, m, &mut q).0
    };
    match r {
        Outcome1d::Feasible(t) => s.feasible(Point::new(&[t])),
        Outcome1d::Infeasible => s.infeasible(),
    }
}

/// Parameter range of the segment `p0 + t (p1 - p0)`, `t in [0, 1]`, that
/// satisfies every committed halfspace; `None` when it is empty.
pub(crate) fn committed_range(p0: &Point, p1: &Point, committed: &[CommittedHalfspace]) -> Option<(f64, f64)> {
    let d = p1.sub(p0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for h in committed {
        let (g, rhs) = h.as_geq();
        let a = g.dot(&d);
        let b = g.dot(p0) - rhs;
        if a.abs() <= 1e-15 * (1.0 + g.norm() * d.norm()) {
            if b < -tol().side {
                return None;
            }
            continue;
        }
        let root = -b / a;
        if a > 0.0 {
            lo = lo.max(root);
        } else {
            hi = hi.min(root);
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// 1D solve along a segment against the ambient oracle. Returns a feasible
/// point if one was found. `boundaries` is only evaluated when the committed
/// constraints leave part of the segment open.
pub(crate) fn solve_on_segment<B: FnOnce() -> Vec<f64>>(s: &mut Session, p0: &Point, p1: &Point, boundaries: B) -> Option<Point> {
    let committed = s.committed_halfspaces();
    let (lo, hi) = committed_range(p0, p1, &committed)?;
    let boundaries = boundaries();
    let d = p1.sub(p0);
    let mut q = |t: f64| match s.separate(&p0.add(&d.scale(t))) {
        Separation::Feasible => None,
        Separation::Violated(v) => {
            let (g, h) = v.halfspace.as_geq();
            Some((g.dot(&d), g.dot(p0) - h))
        }
    };
    match solve_ulp_1d_with(&boundaries, lo, hi, &mut q).0 {
        Outcome1d::Feasible(t) => Some(p0.add(&d.scale(t))),
        Outcome1d::Infeasible => None,
    }
}

//! Canonical disk sets: every subset of a sample cut out by a disk.
//!
//! A subset realizable by a closed disk is also realized by a small
//! perturbation of a circle through three sample points: the points strictly
//! inside that circle plus a contiguous arc of the points on it. Enumerating
//! those arcs for every circumcircle, together with collinear intervals,
//! gives the complete family.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::geom::vec::solve;
use crate::geom::Point;
use crate::lift::{unlift, Ball, Unlifted};
use crate::oracle::Color;
use crate::tol::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDiskSet {
    pub disk: Ball,
    /// Sorted indices of the sample points inside `disk` (boundary included).
    pub subset: Vec<usize>,
    /// Common color of the subset when it is nonempty and monochromatic.
    pub mono: Option<Color>,
}

/// Fixed-width bitset over sample indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub fn new(m: usize) -> Bits {
        Bits(vec![0; m.div_ceil(64).max(1)])
    }

    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).any(|(a, b)| a & b != 0)
    }

    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, &w) in self.0.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(64 * k + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }
}

/// `r^2 - |p - c|^2` for the lifted disk `w`.
fn slack(p: &Point, w: &[f64; 3]) -> f64 {
    w[2] - p.x() * p.x() - p.y() * p.y() + p.x() * w[0] + p.y() * w[1]
}

fn contained(sample: &[Point], b: &Ball) -> Bits {
    let mut bits = Bits::new(sample.len());
    for (i, p) in sample.iter().enumerate() {
        if b.contains(p) {
            bits.set(i);
        }
    }
    bits
}

/// Visits candidate disks; the realized subset is always recomputed from the
/// disk itself.
pub(crate) fn enumerate(sample: &[Point], mut visit: impl FnMut(Ball, Bits)) {
    let m = sample.len();
    let mut emit = |b: Ball| {
        let bits = contained(sample, &b);
        visit(b, bits);
    };
    let emit = &mut emit;
    // Empty set: a point disk away from the sample.
    let far = sample.iter().fold(1.0f64, |a, p| a.max(p.x().abs()).max(p.y().abs()));
    emit(Ball { center: Point::p2(2.0 * far + 1.0, 2.0 * far + 1.0), radius: 0.0 });
    for p in sample {
        emit(Ball { center: *p, radius: 0.0 });
    }
    if m < 2 {
        return;
    }
    let gamma = tol().dedup;
    for i in 0..m {
        for j in i + 1..m {
            let c = sample[i].add(&sample[j]).scale(0.5);
            let r = sample[i].dist(&sample[j]) / 2.0;
            emit(Ball { center: c, radius: r * (1.0 + 1e-12) + 1e-15 });
            emit(Ball { center: c, radius: ((r * r - gamma).max(0.0)).sqrt() });
        }
    }
    if collinear(sample) {
        intervals(sample, emit);
        return;
    }
    let mut slacks = vec![0.0; m];
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                circle_variants(sample, [i, j, k], &mut slacks, &mut visit);
            }
        }
    }
}

fn collinear(sample: &[Point]) -> bool {
    let a = sample[0];
    let Some(b) = sample.iter().max_by(|p, q| p.dist2(&a).total_cmp(&q.dist2(&a))) else { return true };
    let d = b.sub(&a);
    let len = d.norm();
    if len == 0.0 {
        return true;
    }
    sample.iter().all(|p| {
        let v = p.sub(&a);
        (d.x() * v.y() - d.y() * v.x()).abs() / len <= tol().side
    })
}

/// Contiguous runs along the common line, each cut out by the diametral
/// disk of its end points.
fn intervals(sample: &[Point], emit: &mut impl FnMut(Ball)) {
    let a = sample[0];
    let b = sample.iter().max_by(|p, q| p.dist2(&a).total_cmp(&q.dist2(&a))).unwrap();
    let d = b.sub(&a);
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&x, &y| sample[x].sub(&a).dot(&d).total_cmp(&sample[y].sub(&a).dot(&d)));
    for s in 0..order.len() {
        for e in s + 1..order.len() {
            let (p, q) = (sample[order[s]], sample[order[e]]);
            let r = p.dist(&q) / 2.0;
            emit(Ball { center: p.add(&q).scale(0.5), radius: r * (1.0 + 1e-12) + 1e-15 });
        }
    }
}

/// All arc-subset perturbations of the circle through three sample points.
/// Subsets come from the slack signs, which the perturbation keeps at least
/// a quarter of the smallest off-circle slack away from zero.
fn circle_variants(sample: &[Point], t: [usize; 3], slacks: &mut [f64], visit: &mut impl FnMut(Ball, Bits)) {
    let rows = t.map(|i| [sample[i].x(), sample[i].y(), 1.0]);
    let rhs = t.map(|i| sample[i].x() * sample[i].x() + sample[i].y() * sample[i].y());
    let Some(w) = solve::<3>(rows, rhs, 1e-12) else { return };
    if !w.iter().all(|v| v.is_finite()) {
        return;
    }
    let scale = 1.0 + w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let on_tol = 1e-10 * scale;
    let mut on = Vec::new();
    let mut gap = f64::INFINITY;
    let mut base = Bits::new(sample.len());
    for (i, p) in sample.iter().enumerate() {
        let s = slack(p, &w);
        slacks[i] = s;
        if s.abs() <= on_tol || t.contains(&i) {
            on.push(i);
        } else {
            gap = gap.min(s.abs());
            if s > 0.0 {
                base.set(i);
            }
        }
    }
    let c = Point::p2(w[0] / 2.0, w[1] / 2.0);
    on.sort_by(|&a, &b| {
        let (pa, pb) = (sample[a].sub(&c), sample[b].sub(&c));
        pa.y().atan2(pa.x()).total_cmp(&pb.y().atan2(pb.x()))
    });
    let b = on.len();
    let extent = sample.iter().fold(1.0f64, |a, p| a.max(p.norm()));
    // Perturb the lifted disk by delta * l(p), |l| <= 1 on the sample, so
    // that no off-circle point changes side. The move at the circle points
    // has to dominate the rounding left in their slacks.
    let delta = if gap.is_finite() { gap / 4.0 } else { 1.0 };
    let noise = on.iter().fold(1e-14 * scale, |a, &i| a.max(slacks[i].abs()));
    let mut try_affine = |n: Point, beta: f64, members: &[usize]| {
        let norm = n.norm() * extent + beta.abs();
        if !(norm > 0.0) {
            return;
        }
        let (n, beta) = (n.scale(1.0 / norm), beta / norm);
        let l = |p: &Point| n.dot(p) - beta;
        let weakest = on.iter().map(|&i| l(&sample[i]).abs()).fold(f64::INFINITY, f64::min);
        let ok = on.iter().all(|&i| (l(&sample[i]) > 0.0) == members.contains(&i));
        if !ok || delta * weakest <= 8.0 * noise {
            return;
        }
        let lifted = Point::p3(w[0] + delta * n.x(), w[1] + delta * n.y(), w[2] - delta * beta);
        if let Ok(Unlifted::Ball(ball)) = unlift(&lifted) {
            let mut bits = base.clone();
            for &i in members {
                bits.set(i);
            }
            if contained(sample, &ball) == bits {
                visit(ball, bits);
            }
        }
    };
    // Whole circle and nothing of it.
    try_affine(Point::p2(0.0, 0.0), -1.0, &on);
    try_affine(Point::p2(0.0, 0.0), 1.0, &[]);
    for s in 0..b {
        for len in 1..b {
            let members: Vec<usize> = (0..len).map(|k| on[(s + k) % b]).collect();
            let (prev, first) = (sample[on[(s + b - 1) % b]], sample[on[s]]);
            let (last, next) = (sample[on[(s + len - 1) % b]], sample[on[(s + len) % b]]);
            let m1 = prev.add(&first).scale(0.5);
            let m2 = last.add(&next).scale(0.5);
            let d = m2.sub(&m1);
            let n = if d.norm() <= 1e-12 * extent { first.sub(&next) } else { Point::p2(-d.y(), d.x()) };
            let n = if n.dot(&first.sub(&m1)) > 0.0 { n } else { n.scale(-1.0) };
            try_affine(n, n.dot(&m1), &members);
        }
    }
}

fn dedup(sample: &[Point], colors: Option<&[Color]>) -> Vec<CanonicalDiskSet> {
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut out = Vec::new();
    enumerate(sample, |disk, bits| {
        if seen.contains(&bits) {
            return;
        }
        let subset = bits.indices();
        let mono = colors.and_then(|c| {
            let first = *c.get(*subset.first()?)?;
            subset.iter().all(|&i| c[i] == first).then_some(first)
        });
        seen.insert(bits);
        out.push(CanonicalDiskSet { disk, subset, mono });
    });
    out
}

/// Every distinct subset of `sample` realizable by a disk, each with a disk
/// that realizes it.
pub fn canonical_disk_sets(sample: &[Point]) -> Vec<CanonicalDiskSet> {
    dedup(sample, None)
}

/// Same family, with `mono` filled in from the sample colors.
pub fn canonical_disk_sets_colored(sample: &[Point], colors: &[Color]) -> Vec<CanonicalDiskSet> {
    dedup(sample, Some(colors))
}

//! Centerpoint-filter solver over explicit arrangement vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::centerpoint::approx_centerpoint_d;
use crate::geom::vec::dot;
use crate::geom::{CenterpointParams, CommittedHalfspace, Hyperplane, Point};
use crate::oracle::{Separation, SeparationOracle};
use crate::tol::tol;

use super::naive::settle;
use super::{geq_arrays, plane_arrays, Session, UlpResult};

#[derive(Clone, Debug, PartialEq)]
pub struct CenterpointSolverParams {
    /// Largest number of stored arrangement vertices.
    pub vertex_cap: usize,
    /// The loop stops at `c_small * d^2 * log2 n` survivors and then
    /// probes each of them.
    pub c_small: f64,
    pub seed: u64,
    pub centerpoint: CenterpointParams,
    /// Half-width of the search box; the tolerance record's `M` when unset.
    pub box_m: Option<f64>,
}

impl Default for CenterpointSolverParams {
    fn default() -> Self {
        CenterpointSolverParams { vertex_cap: 2_000_000, c_small: 1.0, seed: 0, centerpoint: CenterpointParams::default(), box_m: None }
    }
}

fn capacity(count: usize, cap: usize) -> Error {
    Error::Capacity {
        count,
        cap,
        hint: "use the cutting solver (2D) or a smaller n".into(),
    }
}

fn box_planes(d: usize, m: f64) -> Vec<Hyperplane> {
    (0..d)
        .flat_map(|i| {
            let e = Point::unit(d, i);
            [Hyperplane { normal: e, offset: -m }, Hyperplane { normal: e, offset: m }]
        })
        .collect()
}

/// Clips the line `x0 + t u` (unit `u`) to the box and the prefilter.
fn clip_line<const D: usize>(x0: &[f64; D], u: &[f64; D], pre: &[([f64; D], f64)], m: f64) -> Option<(f64, f64)> {
    let band = tol().side;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut bound = |a: f64, b: f64| -> bool {
        // a t >= b
        if a.abs() < 1e-15 {
            return b <= band;
        }
        let r = b / a;
        if a > 0.0 {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
        lo <= hi + 1e-9
    };
    for k in 0..D {
        if !bound(u[k], -m - band - x0[k]) || !bound(-u[k], -m - band + x0[k]) {
            return None;
        }
    }
    for (a, b) in pre {
        if !bound(dot(a, u), b - band - dot(a, x0)) {
            return None;
        }
    }
    Some((lo, hi))
}

/// Vertices of the arrangement of `planes` plus the box planes, restricted
/// to the box and to the prefilter halfspaces. `D` is 2 or 3.
pub(crate) fn box_vertices<const D: usize>(
    planes: &[Hyperplane],
    pre: &[CommittedHalfspace],
    cap: usize,
    m: f64,
) -> Result<Vec<[f64; D]>> {
    let mut all: Vec<([f64; D], f64)> = planes.iter().map(plane_arrays::<D>).collect();
    all.extend(box_planes(D, m).iter().map(plane_arrays::<D>));
    let pre: Vec<([f64; D], f64)> = pre.iter().map(geq_arrays::<D>).collect();
    let mut out = Vec::new();
    let n = all.len();
    let push = |out: &mut Vec<[f64; D]>, v: [f64; D]| -> Result<()> {
        if out.len() >= cap {
            return Err(capacity(out.len() + 1, cap));
        }
        out.push(v);
        Ok(())
    };
    match D {
        2 => {
            for i in 0..n {
                let (ni, oi) = all[i];
                let u = {
                    let mut u = [0.0; D];
                    u[0] = -ni[1];
                    u[1] = ni[0];
                    u
                };
                let x0 = ni.map(|c| c * oi);
                let Some((t0, t1)) = clip_line(&x0, &u, &pre, m) else { continue };
                for (nj, oj) in &all[i + 1..] {
                    let den = dot(nj, &u);
                    if den.abs() < 1e-12 {
                        continue;
                    }
                    let t = (oj - dot(nj, &x0)) / den;
                    if t >= t0 - 1e-9 && t <= t1 + 1e-9 {
                        let mut v = x0;
                        for k in 0..D {
                            v[k] += t * u[k];
                        }
                        push(&mut out, v)?;
                    }
                }
            }
        }
        3 => {
            for i in 0..n {
                for j in i + 1..n {
                    let (a, oa) = all[i];
                    let (b, ob) = all[j];
                    let mut u = [0.0; D];
                    u[0] = a[1] * b[2] - a[2] * b[1];
                    u[1] = a[2] * b[0] - a[0] * b[2];
                    u[2] = a[0] * b[1] - a[1] * b[0];
                    let uu = dot(&u, &u);
                    if uu < 1e-20 {
                        continue;
                    }
                    // x0 = (oa (b x u) + ob (u x a)) / |u|^2 lies on both planes.
                    let mut x0 = [0.0; D];
                    let bxu = [b[1] * u[2] - b[2] * u[1], b[2] * u[0] - b[0] * u[2], b[0] * u[1] - b[1] * u[0]];
                    let uxa = [u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2], u[0] * a[1] - u[1] * a[0]];
                    for k in 0..3 {
                        x0[k] = (oa * bxu[k] + ob * uxa[k]) / uu;
                    }
                    let inv = 1.0 / uu.sqrt();
                    for c in u.iter_mut() {
                        *c *= inv;
                    }
                    let Some((t0, t1)) = clip_line(&x0, &u, &pre, m) else { continue };
                    for (nk, ok) in &all[j + 1..] {
                        let den = dot(nk, &u);
                        if den.abs() < 1e-12 {
                            continue;
                        }
                        let t = (ok - dot(nk, &x0)) / den;
                        if t >= t0 - 1e-9 && t <= t1 + 1e-9 {
                            let mut v = x0;
                            for k in 0..D {
                                v[k] += t * u[k];
                            }
                            push(&mut out, v)?;
                        }
                    }
                }
            }
        }
        _ => return Err(Error::UnsupportedDimension(D)),
    }
    Ok(out)
}

/// Vertices of a 3D plane arrangement (triples meeting in a point), without
/// box planes or clipping; duplicates are merged.
pub fn arrangement_vertices_3d(planes: &[Hyperplane]) -> Result<Vec<Point>> {
    if let Some(h) = planes.iter().find(|h| h.dim() != 3) {
        return Err(Error::DimensionMismatch { expected: 3, got: h.dim() });
    }
    let mut out = Vec::new();
    let n = planes.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = [planes[i].normal.to_array::<3>(), planes[j].normal.to_array(), planes[k].normal.to_array()];
                let b = [planes[i].offset, planes[j].offset, planes[k].offset];
                if let Some(x) = crate::geom::vec::solve::<3>(a, b, 1e-12) {
                    out.push(x);
                }
            }
        }
    }
    Ok(crate::geom::dedup_points(out, tol().dedup).into_iter().map(Point::from_array).collect())
}

/// How a filter loop ended.
pub(crate) enum FilterEnd {
    Feasible(Point),
    Exhausted,
}

/// Centerpoint query, drop the vertices the answer strictly rules out,
/// repeat; the last few survivors are probed one by one.
pub(crate) fn filter_loop<const D: usize>(
    s: &mut Session,
    mut verts: Vec<[f64; D]>,
    n_planes: usize,
    params: &CenterpointSolverParams,
    rng: &mut ChaCha8Rng,
) -> FilterEnd {
    let band = tol().side;
    let ln = (n_planes.max(2) as f64).log2();
    let small = ((params.c_small * (D * D) as f64 * ln).ceil() as usize).max(1);
    let mut stuck = false;
    let cut = |verts: &mut Vec<[f64; D]>, h: &CommittedHalfspace| -> usize {
        let (a, b) = geq_arrays::<D>(h);
        let before = verts.len();
        verts.retain(|x| dot(&a, x) - b >= -band);
        before - verts.len()
    };
    while verts.len() > small {
        let q = if stuck {
            verts[rng.random_range(0..verts.len())]
        } else {
            approx_centerpoint_d(&verts, rng, &params.centerpoint)
        };
        match s.separate(&Point::from_array(q)) {
            Separation::Feasible => return FilterEnd::Feasible(Point::from_array(q)),
            Separation::Violated(v) => stuck = cut(&mut verts, &v.halfspace) == 0,
        }
    }
    while let Some(&q) = verts.first() {
        match s.separate(&Point::from_array(q)) {
            Separation::Feasible => return FilterEnd::Feasible(Point::from_array(q)),
            Separation::Violated(v) => {
                if cut(&mut verts, &v.halfspace) == 0 {
                    // The oracle's tolerance band can accept a vertex the
                    // strict filter keeps; drop it explicitly.
                    verts.remove(0);
                }
            }
        }
    }
    FilterEnd::Exhausted
}

/// Centerpoint-based solver with default parameters.
pub fn solve_ulp_centerpoint(
    planes: &[Hyperplane],
    oracle: &dyn SeparationOracle,
    dim: usize,
    vertex_cap: usize,
) -> Result<UlpResult> {
    let params = CenterpointSolverParams { vertex_cap, ..Default::default() };
    solve_ulp_centerpoint_with(planes, oracle, dim, &params, &[])
}

/// Centerpoint-based solver. `pre` holds halfspaces whose sides are known in
/// advance; vertices outside them are never stored.
pub fn solve_ulp_centerpoint_with(
    planes: &[Hyperplane],
    oracle: &dyn SeparationOracle,
    dim: usize,
    params: &CenterpointSolverParams,
    pre: &[CommittedHalfspace],
) -> Result<UlpResult> {
    if oracle.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: oracle.dim() });
    }
    if let Some(h) = planes.iter().find(|h| h.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: h.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = params.box_m.unwrap_or(tol().box_m);
    let mut s = Session::new(oracle).with_box(m);
    s.rounds.push(planes.len());
    let end = match dim {
        2 => {
            let v = box_vertices::<2>(planes, pre, params.vertex_cap, m)?;
            filter_loop(&mut s, v, planes.len(), params, &mut rng)
        }
        3 => {
            let v = box_vertices::<3>(planes, pre, params.vertex_cap, m)?;
            filter_loop(&mut s, v, planes.len(), params, &mut rng)
        }
        d => return Err(Error::UnsupportedDimension(d)),
    };
    match end {
        FilterEnd::Feasible(p) => Ok(s.feasible(p)),
        // Every vertex is ruled out. For a true ULP that means infeasible and
        // the committed LP confirms it without a query; with shifted
        // (strict) committed constraints an open cell may remain.
        FilterEnd::Exhausted => settle(s, 64, params.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{QueryLedger, UlpGroundTruth, UlpOracle};
    use crate::ulp::testutil::{infeasible_2d, planted_2d};
    use crate::ulp::UlpOutcome;

    #[test]
    fn box_instance_is_feasible() {
        let lines = vec![
            Hyperplane::line(1.0, 0.0, 0.0).unwrap(),
            Hyperplane::line(1.0, 0.0, 1.0).unwrap(),
            Hyperplane::line(0.0, 1.0, 0.0).unwrap(),
            Hyperplane::line(0.0, 1.0, 1.0).unwrap(),
        ];
        let gt = UlpGroundTruth::new(lines.clone(), vec![1, -1, 1, -1], None).unwrap();
        let o = UlpOracle::new(gt, QueryLedger::shared());
        let r = solve_ulp_centerpoint(&lines, &o, 2, 1000).unwrap();
        let w = r.witness().unwrap();
        for c in &r.committed {
            assert!(c.halfspace.contains(&w));
        }
        assert!(w.x() > -1e-9 && w.x() < 1.0 + 1e-9 && w.y() > -1e-9 && w.y() < 1.0 + 1e-9);
    }

    #[test]
    fn planted_query_envelope() {
        let n = 100;
        for seed in 0..100 {
            let (o, _) = planted_2d(n, seed);
            let lines = o.constraints().to_vec();
            let r = solve_ulp_centerpoint(&lines, &o, 2, 2_000_000).unwrap();
            let w = r.witness().expect("planted instance is feasible");
            assert_eq!(o.separation_query(&w).unwrap(), Separation::Feasible);
            let bound = 40.0 * ((n * n) as f64).log2();
            assert!((r.ledger.separation as f64) <= bound);
        }
    }

    #[test]
    fn infeasible_core_is_certified() {
        for seed in 0..20 {
            let o = infeasible_2d(60, seed);
            let lines = o.constraints().to_vec();
            let r = solve_ulp_centerpoint(&lines, &o, 2, 2_000_000).unwrap();
            assert_eq!(r.outcome, UlpOutcome::Infeasible);
            assert!(r.certifies_infeasible(2).unwrap());
        }
    }

    #[test]
    fn octant_in_three_dimensions() {
        let planes: Vec<Hyperplane> = (0..3)
            .map(|i| {
                Hyperplane::new(Point::unit(3, i), 0.0).unwrap()
            })
            .collect();
        // Brute force over all 8 sign patterns.
        for mask in 0..8u32 {
            let sides: Vec<i8> = (0..3).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            let gt = UlpGroundTruth::new(planes.clone(), sides.clone(), None).unwrap();
            let o = UlpOracle::new(gt, QueryLedger::shared());
            let r = solve_ulp_centerpoint(&planes, &o, 3, 10_000).unwrap();
            let w = r.witness().unwrap();
            for i in 0..3 {
                assert!(sides[i] as f64 * w[i] >= -1e-9);
            }
        }
    }

    #[test]
    fn capacity_error() {
        let (o, _) = planted_2d(100, 1);
        let e = solve_ulp_centerpoint(o.constraints(), &o, 2, 50).unwrap_err();
        assert!(matches!(e, Error::Capacity { .. }));
    }

    #[test]
    fn box_vertices_match_brute_force() {
        let (o, _) = planted_2d(30, 3);
        let lines = o.constraints();
        let fast = box_vertices::<2>(lines, &[], usize::MAX, tol().box_m).unwrap();
        let mut all = lines.to_vec();
        all.extend(box_planes(2, tol().box_m));
        let mut brute = 0;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if let Some(p) = crate::geom::arrangement::intersect_lines(&all[i], &all[j]) {
                    if p.iter().all(|c| c.abs() <= tol().box_m + 1e-6) {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(fast.len(), brute);

        let planes: Vec<Hyperplane> = (0..8)
            .map(|i| {
                let a = i as f64;
                Hyperplane::new(Point::p3(a.cos(), a.sin(), 0.5 + 0.1 * a), 0.1 * a).unwrap()
            })
            .collect();
        let fast = box_vertices::<3>(&planes, &[], usize::MAX, tol().box_m).unwrap();
        let mut all = planes.clone();
        all.extend(box_planes(3, tol().box_m));
        let mut brute = 0;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                for k in j + 1..all.len() {
                    let a = [all[i].normal.to_array::<3>(), all[j].normal.to_array(), all[k].normal.to_array()];
                    if let Some(x) = crate::geom::vec::solve::<3>(a, [all[i].offset, all[j].offset, all[k].offset], 1e-12) {
                        if x.iter().all(|c| c.abs() <= tol().box_m * (1.0 + 1e-9)) {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(fast.len(), brute);
    }
}

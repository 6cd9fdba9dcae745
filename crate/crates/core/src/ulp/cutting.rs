//! 1/r-cuttings of line sets and the recursive cutting-based solver.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{clip_polygon, CommittedHalfspace, ConvexPolygon, Hyperplane, Point};
use crate::oracle::{Separation, SeparationOracle};
use crate::tol::tol;

use super::naive::settle;
use super::oned::solve_on_segment;
use super::{Session, UlpResult};

/// A triangle of a cutting with the lines meeting it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuttingCell {
    pub simplex: ConvexPolygon,
    /// Lines crossing the open triangle.
    pub conflict: Vec<usize>,
    /// Lines containing one of its edges.
    pub boundary: Vec<usize>,
}

impl CuttingCell {
    /// Every line the recursion into this cell has to carry.
    pub fn active(&self) -> Vec<usize> {
        let mut v = self.conflict.clone();
        v.extend_from_slice(&self.boundary);
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuttingParams {
    pub r: usize,
    pub base_size: usize,
    /// Sample size factor: `c_cut * r * ln r` lines per attempt.
    pub c_cut: f64,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for CuttingParams {
    fn default() -> Self {
        CuttingParams { r: 4, base_size: 8, c_cut: 8.0, max_attempts: 20, seed: 0 }
    }
}

/// Splits every face by the line, dropping slivers.
fn split_faces(faces: Vec<ConvexPolygon>, h: &Hyperplane) -> Vec<ConvexPolygon> {
    let mut out = Vec::with_capacity(faces.len() + 4);
    for f in faces {
        for side in [1i8, -1] {
            let part = clip_polygon(&f, &CommittedHalfspace { plane: *h, side });
            if !part.is_degenerate() {
                out.push(part);
            }
        }
    }
    out
}

/// Fan from the lowest vertex.
fn bottom_fan(face: &ConvexPolygon) -> Vec<ConvexPolygon> {
    let v = &face.vertices;
    let n = v.len();
    let b = (0..n).min_by(|&i, &j| v[i].y().total_cmp(&v[j].y()).then(v[i].x().total_cmp(&v[j].x()))).unwrap();
    (1..n - 1)
        .map(|k| ConvexPolygon::triangle(v[b], v[(b + k) % n], v[(b + k + 1) % n]))
        .filter(|t| !t.is_degenerate())
        .collect()
}

/// Triangles of a fan tiling with shared vertex indices, so each line is
/// evaluated once per vertex rather than once per corner.
struct Tiling {
    verts: Vec<Point>,
    tris: Vec<[usize; 3]>,
}

impl Tiling {
    fn new(faces: &[ConvexPolygon]) -> Tiling {
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        for t in faces.iter().flat_map(bottom_fan) {
            let mut ids = [0usize; 3];
            for (k, v) in t.vertices.iter().enumerate() {
                ids[k] = *index.entry((v.x().to_bits(), v.y().to_bits())).or_insert_with(|| {
                    verts.push(*v);
                    verts.len() - 1
                });
            }
            tris.push(ids);
        }
        Tiling { verts, tris }
    }

    /// Conflict and boundary lists; `None` as soon as a conflict list
    /// exceeds `limit`.
    fn classify(&self, lines: &[Hyperplane], active: &[usize], limit: f64) -> Option<Vec<CuttingCell>> {
        let band = tol().side;
        let mut conflict = vec![Vec::new(); self.tris.len()];
        let mut boundary = vec![Vec::new(); self.tris.len()];
        let mut sign = vec![0i8; self.verts.len()];
        for &i in active {
            for (s, v) in sign.iter_mut().zip(&self.verts) {
                let e = lines[i].eval(v);
                *s = if e > band {
                    1
                } else if e < -band {
                    -1
                } else {
                    0
                };
            }
            for (t, ids) in self.tris.iter().enumerate() {
                let (mut pos, mut neg, mut on) = (false, false, 0);
                for &v in ids {
                    match sign[v] {
                        1 => pos = true,
                        -1 => neg = true,
                        _ => on += 1,
                    }
                }
                if pos && neg {
                    conflict[t].push(i);
                    if conflict[t].len() as f64 > limit {
                        return None;
                    }
                } else if on >= 2 {
                    boundary[t].push(i);
                }
            }
        }
        Some(
            self.tris
                .iter()
                .zip(conflict.into_iter().zip(boundary))
                .map(|(ids, (conflict, boundary))| CuttingCell {
                    simplex: ConvexPolygon::triangle(self.verts[ids[0]], self.verts[ids[1]], self.verts[ids[2]]),
                    conflict,
                    boundary,
                })
                .collect(),
        )
    }
}

fn sample_size(n: usize, r: usize, c_cut: f64) -> usize {
    let r = r as f64;
    ((c_cut * r * r.ln()).ceil() as usize).clamp(1, n.max(1))
}

/// Cutting of `region` for the lines `active`: triangles tiling the region,
/// each crossed by at most `|active| / r` of them.
pub(crate) fn cutting_in(
    lines: &[Hyperplane],
    active: &[usize],
    region: &ConvexPolygon,
    params: &CuttingParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CuttingCell>> {
    if params.r < 2 {
        return Err(Error::Contract("cutting parameter r must be at least 2".into()));
    }
    let n = active.len();
    let limit = n as f64 / params.r as f64;
    let s = sample_size(n, params.r, params.c_cut);
    for _ in 0..params.max_attempts {
        let picks: Vec<usize> = if s >= n { active.to_vec() } else { sample(rng, n, s).into_iter().map(|k| active[k]).collect() };
        let mut faces = vec![region.clone()];
        for &i in &picks {
            faces = split_faces(faces, &lines[i]);
        }
        if let Some(cells) = Tiling::new(&faces).classify(lines, active, limit) {
            return Ok(cells);
        }
    }
    Err(Error::Construction { attempts: params.max_attempts })
}

/// A 1/r-cutting of the bounding box for `lines`.
pub fn build_cutting_2d(lines: &[Hyperplane], r: usize, rng_seed: u64) -> Result<Vec<CuttingCell>> {
    if let Some(h) = lines.iter().find(|h| h.dim() != 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: h.dim() });
    }
    let params = CuttingParams { r, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let active: Vec<usize> = (0..lines.len()).collect();
    cutting_in(lines, &active, &ConvexPolygon::bounding_box(), &params, &mut rng)
}

/// Crossing parameters of the active lines along `p0 -> p1`.
fn crossings(lines: &[Hyperplane], active: &[usize], p0: &Point, p1: &Point) -> Vec<f64> {
    let mut out = Vec::new();
    for &i in active {
        let e0 = lines[i].eval(p0);
        let e1 = lines[i].eval(p1);
        if (e0 > 0.0) != (e1 > 0.0) && e0 != e1 {
            out.push(e0 / (e0 - e1));
        }
    }
    out
}

/// The committed region inside the box.
fn committed_region(s: &Session) -> ConvexPolygon {
    let mut poly = ConvexPolygon::bounding_box();
    for h in s.committed_halfspaces() {
        poly = clip_polygon(&poly, &h);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Probes one interior point of every face of the arrangement of `active`
/// inside `region` that the committed constraints have not ruled out.
fn base_case(s: &mut Session, lines: &[Hyperplane], active: &[usize], region: &ConvexPolygon) -> Option<Point> {
    let mut faces = vec![region.clone()];
    for &i in active {
        faces = split_faces(faces, &lines[i]);
    }
    for f in faces {
        let mut g = f;
        for h in s.committed_halfspaces() {
            g = clip_polygon(&g, &h);
            if g.is_degenerate() {
                break;
            }
        }
        if g.is_degenerate() {
            continue;
        }
        let c = g.centroid().unwrap();
        if let Separation::Feasible = s.separate(&c) {
            return Some(c);
        }
    }
    None
}

/// Recursive cutting solver. Works unchanged when `lines` is a superset of
/// the constraints the oracle actually enforces.
pub fn solve_ulp_cutting_2d(lines: &[Hyperplane], oracle: &dyn SeparationOracle, params: &CuttingParams) -> Result<UlpResult> {
    if oracle.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: oracle.dim() });
    }
    if let Some(h) = lines.iter().find(|h| h.dim() != 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: h.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut s = Session::new(oracle);
    let mut region = ConvexPolygon::bounding_box();
    let mut active: Vec<usize> = (0..lines.len()).collect();
    loop {
        s.rounds.push(active.len());
        if active.len() <= params.base_size {
            if let Some(p) = base_case(&mut s, lines, &active, &region) {
                return Ok(s.feasible(p));
            }
            return settle(s, 64, params.seed);
        }
        let cells = cutting_in(lines, &active, &region, params, &mut rng)?;
        let mut edges: Vec<(Point, Point)> = Vec::with_capacity(3 * cells.len());
        for c in &cells {
            let v = &c.simplex.vertices;
            for k in 0..v.len() {
                let (a, b) = (v[k], v[(k + 1) % v.len()]);
                let key = if (a.x(), a.y()) <= (b.x(), b.y()) { (a, b) } else { (b, a) };
                edges.push(key);
            }
        }
        edges.sort_by(|x, y| {
            x.0.coords().partial_cmp(y.0.coords()).unwrap().then(x.1.coords().partial_cmp(y.1.coords()).unwrap())
        });
        edges.dedup();
        for (p0, p1) in &edges {
            if let Some(p) = solve_on_segment(&mut s, p0, p1, || crossings(lines, &active, p0, p1)) {
                return Ok(s.feasible(p));
            }
        }
        // No edge meets the committed region, so it sits inside one cell.
        let rem = committed_region(&s);
        if rem.is_degenerate() {
            return settle(s, 64, params.seed);
        }
        let c = rem.centroid().unwrap();
        let Some(cell) = cells.iter().find(|cell| cell.simplex.contains(&c)) else {
            return Err(Error::Diagnostic(format!(
                "committed region centroid {c:?} lies in no cell; region {:?}, {} cells, {} committed",
                rem.vertices,
                cells.len(),
                s.committed.len()
            )));
        };
        region = cell.simplex.clone();
        active = cell.active();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{QueryLedger, UlpGroundTruth, UlpOracle};
    use crate::ulp::testutil::{infeasible_2d, planted_2d};
    use crate::ulp::UlpOutcome;
    use rand::Rng;

    fn check_cutting(lines: &[Hyperplane], cells: &[CuttingCell], r: usize) {
        let n = lines.len();
        let area: f64 = cells.iter().map(|c| c.simplex.area()).sum();
        let b = ConvexPolygon::bounding_box().area();
        assert!((area - b).abs() <= 1e-9 * b, "cells do not tile the box");
        for c in cells {
            // Direct recount against every line.
            let cross = lines
                .iter()
                .filter(|h| {
                    let e: Vec<f64> = c.simplex.vertices.iter().map(|v| h.eval(v)).collect();
                    e.iter().any(|&x| x > 1e-9) && e.iter().any(|&x| x < -1e-9)
                })
                .count();
            assert_eq!(cross, c.conflict.len());
            assert!(cross as f64 <= n as f64 / r as f64);
        }
    }

    #[test]
    fn single_line() {
        let l = vec![Hyperplane::line(1.0, 1.0, 0.3).unwrap()];
        let cells = build_cutting_2d(&l, 2, 0).unwrap();
        check_cutting(&l, &cells, 2);
        assert!(cells.iter().any(|c| c.boundary == vec![0]));
    }

    #[test]
    fn random_lines() {
        let (o, _) = planted_2d(64, 5);
        let l = o.constraints();
        let cells = build_cutting_2d(l, 4, 1).unwrap();
        check_cutting(l, &cells, 4);
    }

    #[test]
    fn axis_grid() {
        let mut l = Vec::new();
        for i in 0..20 {
            l.push(Hyperplane::line(1.0, 0.0, i as f64 * 0.1).unwrap());
            l.push(Hyperplane::line(0.0, 1.0, i as f64 * 0.1).unwrap());
        }
        for seed in 0..100 {
            let cells = build_cutting_2d(&l, 4, seed).unwrap();
            check_cutting(&l, &cells, 4);
        }
    }

    #[test]
    fn triangle_interior() {
        let tri = [Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 1.0)];
        let mut l = Vec::new();
        let mut sides = Vec::new();
        for k in 0..3 {
            let h = Hyperplane::through(&tri[k], &tri[(k + 1) % 3]).unwrap();
            sides.push(if h.eval(&tri[(k + 2) % 3]) > 0.0 { 1 } else { -1 });
            l.push(h);
        }
        let o = UlpOracle::new(UlpGroundTruth::new(l.clone(), sides, None).unwrap(), QueryLedger::shared());
        let r = solve_ulp_cutting_2d(&l, &o, &CuttingParams::default()).unwrap();
        let w = r.witness().unwrap();
        assert!(w.x() >= -1e-9 && w.y() >= -1e-9 && w.x() + w.y() <= 1.0 + 1e-9);
    }

    #[test]
    fn planted_and_infeasible() {
        for seed in 0..10 {
            let (o, _) = planted_2d(300, seed);
            let l = o.constraints().to_vec();
            let r = solve_ulp_cutting_2d(&l, &o, &CuttingParams { seed, ..Default::default() }).unwrap();
            let w = r.witness().unwrap();
            assert_eq!(o.separation_query(&w).unwrap(), Separation::Feasible);

            let o = infeasible_2d(300, seed);
            let l = o.constraints().to_vec();
            let r = solve_ulp_cutting_2d(&l, &o, &CuttingParams { seed, ..Default::default() }).unwrap();
            assert_eq!(r.outcome, UlpOutcome::Infeasible);
            assert!(r.certifies_infeasible(2).unwrap());
        }
    }

    #[test]
    fn implicit_superset() {
        // Half the lines are decoys the oracle never enforces.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (o, target) = planted_2d(200, 2);
        let l = o.constraints().to_vec();
        let sides: Vec<i8> = (0..l.len()).map(|i| o.label_query(i).unwrap().side).collect();
        let mask: Vec<bool> = (0..l.len()).map(|_| rng.random_bool(0.5)).collect();
        let gt = UlpGroundTruth::new(l.clone(), sides, Some(mask)).unwrap();
        let o2 = UlpOracle::new(gt, QueryLedger::shared());
        let r = solve_ulp_cutting_2d(&l, &o2, &CuttingParams::default()).unwrap();
        assert!(r.is_feasible());
        let _ = target;
    }
}

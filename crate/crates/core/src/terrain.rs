//! Terrain simplification.
//!
//! A sampled height field is covered by triangles that each carry a plane
//! within `eps` vertically of every point above them, using the same loop as
//! the triangle-cover learner with plane validation as the acceptance test.
//! The cover is then overlaid and lifted into a mesh: every face takes the
//! plane of the earliest cover triangle containing it.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Triangle2};
use crate::oracle::{plane_conflict, ColorOracle, ColoredGroundTruth, LedgerSnapshot, QueryLedger, TerrainOracle, Validation};
use crate::tol::tol;
use crate::triangle::{json_lines, run_cover, CoverTarget, TriangleIteration, TriangleParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl TerrainPoint {
    pub fn new(x: f64, y: f64, z: f64) -> TerrainPoint {
        TerrainPoint { x, y, z }
    }

    pub fn xy(&self) -> Point {
        Point::p2(self.x, self.y)
    }
}

/// A planar triangle lifted to the plane `z = a x + b y + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle3 {
    pub base: Triangle2,
    pub plane: [f64; 3],
}

impl Triangle3 {
    pub fn height_at(&self, p: &Point) -> f64 {
        let [a, b, c] = self.plane;
        a * p.x() + b * p.y() + c
    }

    pub fn corners(&self) -> [[f64; 3]; 3] {
        self.base.vertices().map(|v| [v.x(), v.y(), self.height_at(&v)])
    }
}

/// Piecewise-planar height field over the union of the cover triangles.
/// May be discontinuous across faces with different source planes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TerrainMesh {
    pub faces: Vec<Triangle3>,
    /// Index of the cover triangle each face was cut from.
    pub assignment: Vec<usize>,
}

impl TerrainMesh {
    /// Lowest-index face whose projection contains `p`.
    pub fn face_at(&self, p: &Point) -> Option<usize> {
        self.faces.iter().position(|f| f.base.contains(p))
    }

    pub fn height_at(&self, p: &Point) -> Option<f64> {
        self.face_at(p).map(|i| self.faces[i].height_at(p))
    }

    /// Vertical distance from each point to the mesh, `None` where the point
    /// projects outside every face.
    pub fn vertical_errors(&self, points: &[TerrainPoint]) -> Vec<Option<f64>> {
        points.iter().map(|p| self.height_at(&p.xy()).map(|h| (p.z - h).abs())).collect()
    }

    /// Largest vertical distance from a point to the mesh; infinite when
    /// some point projects outside every face.
    pub fn max_vertical_error(&self, points: &[TerrainPoint]) -> f64 {
        self.vertical_errors(points).into_iter().map(|e| e.unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        self.faces.iter().map(|f| f.base.area()).sum()
    }

    /// Wavefront-style text: `v x y z` lines, then `f i j k` lines with
    /// 1-based vertex indices. Faces do not share vertices.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for f in &self.faces {
            for [x, y, z] in f.corners() {
                writeln!(out, "v {x} {y} {z}").expect("string write");
            }
        }
        for i in 0..self.faces.len() {
            writeln!(out, "f {} {} {}", 3 * i + 1, 3 * i + 2, 3 * i + 3).expect("string write");
        }
        out
    }
}

/// Part of a convex vertex cycle where `f >= 0`, with no tolerance band so
/// that thin pieces survive; `f` is affine.
fn clip_exact(poly: &[Point], f: impl Fn(&Point) -> f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
            out.push(p.add(&q.sub(&p).scale(fp / (fp - fq))));
        }
    }
    out.dedup();
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Signed area test: positive when `c` is left of `a -> b`.
fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x())
}

/// `poly` minus the closed triangle `t`, as interior-disjoint convex pieces.
fn subtract(poly: &[Point], t: &Triangle2) -> Vec<Vec<Point>> {
    let [a, b, c] = t.vertices();
    let (a, b, c) = if orient(&a, &b, &c) > 0.0 { (a, b, c) } else { (a, c, b) };
    let mut out = Vec::new();
    let mut rest = poly.to_vec();
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let piece = clip_exact(&rest, |p| -orient(&u, &v, p));
        if piece.len() >= 3 {
            out.push(piece);
        }
        rest = clip_exact(&rest, |p| orient(&u, &v, p));
        if rest.len() < 3 {
            break;
        }
    }
    out
}

fn fan(poly: &[Point]) -> impl Iterator<Item = Triangle2> + '_ {
    (1..poly.len().saturating_sub(1)).map(move |i| Triangle2::new(poly[0], poly[i], poly[i + 1]))
}

/// Overlays the projected cover triangles and lifts the result: the part of
/// triangle `i` outside triangles `0..i` is split into convex pieces,
/// fan-triangulated, and lifted to the plane of triangle `i`.
pub fn assemble_terrain(cover: &[Triangle3]) -> TerrainMesh {
    let mut mesh = TerrainMesh::default();
    for (i, t) in cover.iter().enumerate() {
        if t.base.area() == 0.0 {
            continue;
        }
        let [a, b, c] = t.base.vertices();
        let mut pieces = vec![if orient(&a, &b, &c) > 0.0 { vec![a, b, c] } else { vec![a, c, b] }];
        for earlier in &cover[..i] {
            pieces = pieces.iter().flat_map(|p| subtract(p, &earlier.base)).collect();
            if pieces.is_empty() {
                break;
            }
        }
        for p in &pieces {
            for base in fan(p) {
                if base.area() > 0.0 {
                    mesh.faces.push(Triangle3 { base, plane: t.plane });
                    mesh.assignment.push(i);
                }
            }
        }
    }
    mesh
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainSimplification {
    pub cover: Vec<Triangle3>,
    pub mesh: TerrainMesh,
    pub ledger: LedgerSnapshot,
    pub iterations: Vec<TriangleIteration>,
}

impl TerrainSimplification {
    pub fn iterations_json_lines(&self) -> String {
        json_lines(&self.iterations)
    }
}

/// JSON sidecar written next to a mesh file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainSidecar {
    pub eps: f64,
    pub cover: Vec<Triangle3>,
    pub faces: usize,
    pub ledger: LedgerSnapshot,
    /// `None` when some point lies outside the mesh.
    pub max_vertical_error: Option<f64>,
    /// Per input point, in input order.
    pub vertical_errors: Vec<Option<f64>>,
}

impl TerrainSidecar {
    pub fn new(run: &TerrainSimplification, points: &[TerrainPoint], eps: f64) -> TerrainSidecar {
        let errors = run.mesh.vertical_errors(points);
        let max = errors.iter().try_fold(0.0f64, |m, e| e.map(|e| m.max(e)));
        TerrainSidecar {
            eps,
            cover: run.cover.clone(),
            faces: run.mesh.faces.len(),
            ledger: run.ledger,
            max_vertical_error: max,
            vertical_errors: errors,
        }
    }
}

fn key(p: &Point) -> (u64, u64) {
    (p.x().to_bits(), p.y().to_bits())
}

struct PlaneTarget<'a> {
    oracle: &'a dyn TerrainOracle,
    eps: f64,
    /// Heights of the input points by location, used to screen candidates
    /// before spending a validation query.
    heights: HashMap<(u64, u64), Vec<f64>>,
    ledger: LedgerSnapshot,
}

impl CoverTarget for PlaneTarget<'_> {
    type Tag = [f64; 3];

    fn sample(&mut self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point> {
        self.ledger.sample_uncovered += 1;
        self.oracle.sample_uncovered(cover, rng)
    }

    fn classify(&mut self, sample: &[Point]) -> Result<(Vec<u8>, usize)> {
        for p in sample {
            let hs = self.heights.get(&key(p)).map(Vec::as_slice).unwrap_or(&[]);
            let lo = hs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > 2.0 * self.eps + tol().side {
                return Err(Error::Assumption(format!(
                    "heights at ({}, {}) differ by {} > 2 eps; no plane fits them",
                    p.x(),
                    p.y(),
                    hi - lo
                )));
            }
        }
        Ok((vec![0; sample.len()], 0))
    }

    fn conflict(&self, sample: &[Point], _: &[u8], hit: &[usize]) -> Option<Vec<usize>> {
        let (owner, pts): (Vec<usize>, Vec<(Point, f64)>) = hit
            .iter()
            .flat_map(|&j| self.heights.get(&key(&sample[j])).into_iter().flatten().map(move |&z| (j, (sample[j], z))))
            .unzip();
        let mut w: Vec<usize> = plane_conflict(&pts, self.eps)?.into_iter().map(|i| owner[i]).collect();
        w.sort_unstable();
        w.dedup();
        Some(w)
    }

    fn accept(&mut self, t: &Triangle2) -> Result<Option<[f64; 3]>> {
        self.ledger.validate_triangle += 1;
        Ok(match self.oracle.validate(t, self.eps) {
            Validation::Valid { a, b, c } => Some([a, b, c]),
            Validation::Invalid { .. } => None,
        })
    }
}

/// Covers `points` by triangles validated through `oracle`, which must
/// answer for the same point set.
pub fn learn_terrain_cover(
    oracle: &dyn TerrainOracle,
    points: &[TerrainPoint],
    eps: f64,
    params: &TriangleParams,
) -> Result<(Vec<Triangle3>, LedgerSnapshot, Vec<TriangleIteration>)> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Contract("eps must be finite and nonnegative".into()));
    }
    let mut heights: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    for p in points {
        heights.entry(key(&p.xy())).or_default().push(p.z);
    }
    let mut target = PlaneTarget { oracle, eps, heights, ledger: LedgerSnapshot::default() };
    let run = run_cover(&mut target, params)?;
    let cover = run.triangles.into_iter().map(|(base, plane)| Triangle3 { base, plane }).collect();
    Ok((cover, target.ledger, run.iterations))
}

/// Simplifies a sampled terrain assumed coverable by `params.k` triangles
/// with planes within `eps`, validating against the reference oracle.
pub fn simplify_terrain(points: &[TerrainPoint], eps: f64, params: &TriangleParams) -> Result<TerrainSimplification> {
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(Error::Contract("terrain points must be finite".into()));
    }
    let gt = ColoredGroundTruth::terrain(points.iter().map(TerrainPoint::xy).collect(), points.iter().map(|p| p.z).collect())?;
    let oracle = ColorOracle::new(gt, QueryLedger::shared());
    let (cover, ledger, iterations) = learn_terrain_cover(&oracle, points, eps, params)?;
    let mesh = assemble_terrain(&cover);
    Ok(TerrainSimplification { cover, mesh, ledger, iterations })
}

/// Parses `x y z` (whitespace or comma separated) lines. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_xyz(text: &str) -> Result<Vec<TerrainPoint>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Contract(format!("line {}: {e}", no + 1)))?;
        match vals[..] {
            [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => out.push(TerrainPoint::new(x, y, z)),
            _ => return Err(Error::Contract(format!("line {}: expected three finite numbers", no + 1))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_terrain;
    use rand::{Rng, SeedableRng};

    fn t3(a: (f64, f64), b: (f64, f64), c: (f64, f64), plane: [f64; 3]) -> Triangle3 {
        Triangle3 { base: Triangle2::new(Point::p2(a.0, a.1), Point::p2(b.0, b.1), Point::p2(c.0, c.1)), plane }
    }

    #[test]
    fn single_triangle_mesh() {
        let t = t3((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), [1.0, 2.0, 3.0]);
        let m = assemble_terrain(&[t]);
        assert_eq!(m.faces.len(), 1);
        assert!((m.faces[0].base.area() - 0.5).abs() < 1e-12);
        assert_eq!(m.faces[0].plane, t.plane);
    }

    #[test]
    fn disjoint_triangles_stay_separate() {
        let a = t3((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), [0.0, 0.0, 1.0]);
        let b = t3((2.0, 0.0), (3.0, 0.0), (2.0, 1.0), [0.0, 0.0, 2.0]);
        let m = assemble_terrain(&[a, b]);
        assert_eq!(m.faces.len(), 2);
        assert_eq!(m.assignment, vec![0, 1]);
    }

    /// Area of a union of triangles by counting grid cell centers.
    fn grid_area(tris: &[Triangle2], lo: f64, hi: f64, steps: usize) -> f64 {
        let h = (hi - lo) / steps as f64;
        let mut hit = 0;
        for i in 0..steps {
            for j in 0..steps {
                let p = Point::p2(lo + (i as f64 + 0.5) * h, lo + (j as f64 + 0.5) * h);
                if tris.iter().any(|t| t.contains(&p)) {
                    hit += 1;
                }
            }
        }
        hit as f64 * h * h
    }

    #[test]
    fn overlay_is_disjoint_and_covers_the_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let cover: Vec<Triangle3> = (0..4)
                .map(|_| {
                    let mut q = || (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                    t3(q(), q(), q(), [0.0, 0.0, 0.0])
                })
                .collect();
            let m = assemble_terrain(&cover);
            let bases: Vec<Triangle2> = cover.iter().map(|t| t.base).collect();
            let union = grid_area(&bases, 0.0, 1.0, 300);
            assert!((m.area() - union).abs() < 0.01, "{} vs {union}", m.area());
            // Interior-disjoint: no grid point strictly inside two faces.
            for i in 0..60 {
                for j in 0..60 {
                    let p = Point::p2((i as f64 + 0.37) / 60.0, (j as f64 + 0.61) / 60.0);
                    assert!(m.faces.iter().filter(|f| f.base.contains(&p)).count() <= 1 || on_some_edge(&m, &p));
                }
            }
            for (f, &s) in m.faces.iter().zip(&m.assignment) {
                assert!(bases[s].contains(&f.base.centroid()));
                assert!(bases[..s].iter().all(|b| !strictly_inside(b, &f.base.centroid())));
            }
        }
    }

    fn strictly_inside(t: &Triangle2, p: &Point) -> bool {
        let v = t.vertices();
        let s: Vec<f64> = (0..3)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % 3]);
                (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x())
            })
            .collect();
        s.iter().all(|&x| x > 1e-9) || s.iter().all(|&x| x < -1e-9)
    }

    fn on_some_edge(m: &TerrainMesh, p: &Point) -> bool {
        m.faces.iter().any(|f| f.base.contains(p) && !strictly_inside(&f.base, p))
    }

    #[test]
    fn overlap_goes_to_the_lower_index() {
        let a = t3((0.0, 0.0), (2.0, 0.0), (0.0, 2.0), [0.0, 0.0, 1.0]);
        let b = t3((0.5, 0.5), (3.0, 0.5), (0.5, 3.0), [0.0, 0.0, 1.05]);
        let m = assemble_terrain(&[a, b]);
        let p = Point::p2(0.7, 0.7);
        assert_eq!(m.assignment[m.face_at(&p).unwrap()], 0);
        assert_eq!(m.height_at(&Point::p2(2.0, 0.9)), Some(1.05));
    }

    #[test]
    fn coplanar_points_single_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<TerrainPoint> = (0..150)
            .map(|_| {
                let (x, y) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                TerrainPoint::new(x, y, 0.3 * x - 0.2 * y + 1.0)
            })
            .collect();
        let r = simplify_terrain(&pts, 0.0, &TriangleParams { k: 1, ..Default::default() }).unwrap();
        assert!(r.iterations.iter().all(|it| it.accepted && it.queries == 1));
        // Faces cut from tiny end-game triangles may carry a level plane,
        // which is still exact up to their size.
        for f in &r.mesh.faces {
            for [x, y, z] in f.corners() {
                assert!((z - (0.3 * x - 0.2 * y + 1.0)).abs() < 1e-6);
            }
        }
        assert!(r.mesh.max_vertical_error(&pts) <= 1e-9);
    }

    #[test]
    fn stacked_points_violate_the_assumption() {
        let mut pts = vec![TerrainPoint::new(0.5, 0.5, 0.0), TerrainPoint::new(0.5, 0.5, 1.0)];
        pts.extend((0..20).map(|i| TerrainPoint::new(i as f64 / 20.0, 0.1, 0.0)));
        let err = simplify_terrain(&pts, 0.1, &TriangleParams { k: 1, ..Default::default() }).unwrap_err();
        assert!(err.is_assumption(), "{err}");
    }

    #[test]
    fn planted_terrain_within_eps() {
        for seed in 0..2 {
            let inst = gen_terrain(4, 400, 0.1, seed).unwrap();
            let pts: Vec<TerrainPoint> =
                inst.points.iter().zip(&inst.hidden.heights).map(|(p, &z)| TerrainPoint::new(p.x(), p.y(), z)).collect();
            let r = simplify_terrain(&pts, 0.1, &TriangleParams { k: 4, seed, ..Default::default() }).unwrap();
            assert!(r.mesh.max_vertical_error(&pts) <= 0.1 + 1e-9);
            let sidecar = TerrainSidecar::new(&r, &pts, 0.1);
            let back: TerrainSidecar = serde_json::from_str(&serde_json::to_string(&sidecar).unwrap()).unwrap();
            assert_eq!(back, sidecar);
        }
    }

    #[test]
    fn obj_layout() {
        let m = assemble_terrain(&[t3((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), [0.0, 0.0, 2.0])]);
        let obj = m.to_obj();
        let lines: Vec<&str> = obj.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[..3].iter().all(|l| l.starts_with("v ") && l.ends_with(" 2")));
        assert_eq!(lines[3], "f 1 2 3");
    }

    #[test]
    fn xyz_parsing() {
        let pts = parse_xyz("# header\n0 0 1\n1,2,3\n\n 4\t5  6 \n").unwrap();
        assert_eq!(pts, vec![TerrainPoint::new(0.0, 0.0, 1.0), TerrainPoint::new(1.0, 2.0, 3.0), TerrainPoint::new(4.0, 5.0, 6.0)]);
        assert!(parse_xyz("1 2").is_err());
        assert!(parse_xyz("1 2 x").is_err());
    }
}

//! Planted instance generators.
//!
//! Every generator is a pure function of its parameters and seed. Public
//! data (hyperplanes, point locations) and hidden data (sides, colors,
//! heights, planted regions) are kept in separate fields so that a runner
//! can hand the hidden part to the oracle layer alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Hyperplane, Point, Triangle2};
use crate::lift::Ball;
use crate::oracle::{Color, ColoredGroundTruth, UlpGroundTruth};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlpHidden {
    pub sides: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implicit_mask: Option<Vec<bool>>,
    /// A strictly feasible point for feasible instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Point>,
    /// Indices of the planted infeasible core.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub core: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlpInstance {
    pub dim: usize,
    pub feasible: bool,
    pub constraints: Vec<Hyperplane>,
    pub hidden: UlpHidden,
}

impl UlpInstance {
    pub fn ground_truth(&self) -> Result<UlpGroundTruth> {
        UlpGroundTruth::with_dim(self.dim, self.constraints.clone(), self.hidden.sides.clone(), self.hidden.implicit_mask.clone())
    }
}

/// Planted region with the color of its points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Disk { ball: Ball, color: Color },
    Triangle { triangle: Triangle2, color: Color },
}

impl Region {
    pub fn color(&self) -> Color {
        match self {
            Region::Disk { color, .. } | Region::Triangle { color, .. } => *color,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Disk { ball, .. } => ball.contains_with(p, 1e-12),
            Region::Triangle { triangle, .. } => triangle.contains(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredHidden {
    pub colors: Vec<Color>,
    pub regions: Vec<Region>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredInstance {
    pub points: Vec<Point>,
    pub hidden: ColoredHidden,
}

impl ColoredInstance {
    pub fn ground_truth(&self) -> Result<ColoredGroundTruth> {
        ColoredGroundTruth::new(self.points.clone(), self.hidden.colors.clone())
    }
}

/// One planted terrain piece: `z = a x + b y + c` over `triangle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanePiece {
    pub triangle: Triangle2,
    pub plane: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainHidden {
    pub heights: Vec<f64>,
    pub pieces: Vec<PlanePiece>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainInstance {
    pub points: Vec<Point>,
    pub eps: f64,
    pub hidden: TerrainHidden,
}

impl TerrainInstance {
    pub fn ground_truth(&self) -> Result<ColoredGroundTruth> {
        ColoredGroundTruth::terrain(self.points.clone(), self.hidden.heights.clone())
    }
}

fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = Point::new(&v);
        let n = p.norm();
        if n > 0.1 && n <= 1.0 {
            return p.scale(1.0 / n);
        }
    }
}

fn random_point(d: usize, half: f64, rng: &mut ChaCha8Rng) -> Point {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(-half..half)).collect();
    Point::new(&v)
}

/// Random plane through a random point of `[-1, 1]^d`.
fn random_plane(d: usize, rng: &mut ChaCha8Rng) -> Hyperplane {
    let nrm = unit_vector(d, rng);
    let p = random_point(d, 1.0, rng);
    Hyperplane::new(nrm, nrm.dot(&p)).expect("unit normal")
}

fn side_toward(h: &Hyperplane, p: &Point) -> i8 {
    if h.eval(p) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Hyperplanes through the facets of a random simplex, each oriented away
/// from the simplex: together they admit no common point.
fn infeasible_core(d: usize, rng: &mut ChaCha8Rng) -> Vec<(Hyperplane, i8)> {
    loop {
        let verts: Vec<Point> = (0..=d).map(|_| random_point(d, 0.5, rng)).collect();
        let mut out = Vec::with_capacity(d + 1);
        let mut ok = true;
        for skip in 0..=d {
            let facet: Vec<&Point> = verts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p).collect();
            let Some(h) = facet_plane(&facet) else {
                ok = false;
                break;
            };
            let e = h.eval(&verts[skip]);
            if e.abs() < 0.05 {
                ok = false;
                break;
            }
            out.push((h, if e > 0.0 { -1 } else { 1 }));
        }
        if ok {
            return out;
        }
    }
}

/// Plane through `d` points in `R^d` (d <= 3).
fn facet_plane(pts: &[&Point]) -> Option<Hyperplane> {
    let d = pts[0].dim();
    let nrm = match d {
        1 => Point::new(&[1.0]),
        2 => {
            let v = pts[1].sub(pts[0]);
            Point::p2(-v.y(), v.x())
        }
        3 => {
            let u = pts[1].sub(pts[0]);
            let v = pts[2].sub(pts[0]);
            Point::p3(u.y() * v.z() - u.z() * v.y(), u.z() * v.x() - u.x() * v.z(), u.x() * v.y() - u.y() * v.x())
        }
        _ => return None,
    };
    if nrm.norm() < 1e-9 {
        return None;
    }
    Hyperplane::new(nrm, nrm.dot(pts[0])).ok()
}

/// Undecided LP with `n` random hyperplanes in `R^d`. Feasible instances
/// orient every side toward a random point of `[-1/2, 1/2]^d`; infeasible
/// ones additionally contain a `d + 1` constraint core with empty
/// intersection, placed at random indices.
pub fn gen_ulp(n: usize, d: usize, feasible: bool, seed: u64) -> Result<UlpInstance> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !feasible && n < d + 1 {
        return Err(Error::Generation(format!("an infeasible core needs at least {} constraints", d + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = random_point(d, 0.5, &mut rng);
    let core = if feasible { Vec::new() } else { infeasible_core(d, &mut rng) };
    let free = n - core.len();
    let mut cons: Vec<(Hyperplane, i8, bool)> = Vec::with_capacity(n);
    for _ in 0..free {
        let h = random_plane(d, &mut rng);
        cons.push((h, side_toward(&h, &target), false));
    }
    for (h, s) in core {
        let at = rng.random_range(0..=cons.len());
        cons.insert(at, (h, s, true));
    }
    let core_idx = cons.iter().enumerate().filter(|c| c.1 .2).map(|c| c.0).collect();
    Ok(UlpInstance {
        dim: d,
        feasible,
        constraints: cons.iter().map(|c| c.0).collect(),
        hidden: UlpHidden {
            sides: cons.iter().map(|c| c.1).collect(),
            implicit_mask: None,
            planted: feasible.then_some(target),
            core: core_idx,
        },
    })
}

/// Layout of a disk instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiskLayout {
    /// `k` pairwise separated disks with alternating colors; points only
    /// inside the disks.
    Default,
    /// One red disk; blue points fill the rest of the square, at least
    /// `margin` away from the disk boundary.
    Separable,
    /// One red point at the origin and blue points along a half-turn arc
    /// around it. Every large ball holding the red point swallows part of
    /// the arc, so a search must learn blue points until only small balls
    /// remain.
    Chain,
}

fn alternating(i: usize) -> Color {
    if i % 2 == 0 {
        Color::Red
    } else {
        Color::Blue
    }
}

fn uniform_in_disk(b: &Ball, rng: &mut ChaCha8Rng) -> Point {
    let r = b.radius * rng.random_range(0.0f64..1.0).sqrt();
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    Point::p2(b.center.x() + r * a.cos(), b.center.y() + r * a.sin())
}

/// Hidden-color disk instance in the square `[-1, 1]^2`.
pub fn gen_kdisks(k: usize, n: usize, margin: f64, layout: DiskLayout, seed: u64) -> Result<ColoredInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match layout {
        DiskLayout::Default => {
            if k == 0 {
                return Err(Error::Generation("k must be positive".into()));
            }
            let r_max = (0.9 / (k as f64).sqrt()).min(0.6);
            let mut disks: Vec<Ball> = Vec::new();
            let mut attempts = 0;
            while disks.len() < k {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    return Err(Error::Generation(format!("could not place {k} disks with margin {margin}")));
                }
                let r = rng.random_range(0.5 * r_max..r_max);
                let c = Point::p2(rng.random_range(-1.0 + r..1.0 - r), rng.random_range(-1.0 + r..1.0 - r));
                if disks.iter().all(|b| b.center.dist(&c) >= b.radius + r + margin) {
                    disks.push(Ball { center: c, radius: r });
                }
            }
            let regions: Vec<Region> =
                disks.iter().enumerate().map(|(i, b)| Region::Disk { ball: *b, color: alternating(i) }).collect();
            let mut points = Vec::with_capacity(n);
            let mut colors = Vec::with_capacity(n);
            for i in 0..n {
                let j = i % k;
                let Region::Disk { ball, color } = &regions[j] else { unreachable!() };
                points.push(uniform_in_disk(ball, &mut rng));
                colors.push(*color);
            }
            Ok(ColoredInstance { points, hidden: ColoredHidden { colors, regions } })
        }
        DiskLayout::Separable => {
            let r = rng.random_range(0.25..0.5);
            let c = Point::p2(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
            let mut points = Vec::with_capacity(n);
            let mut colors = Vec::with_capacity(n);
            let mut attempts = 0;
            while points.len() < n {
                attempts += 1;
                if attempts > MAX_ATTEMPTS * (n + 1) {
                    return Err(Error::Generation("margin leaves no room for points".into()));
                }
                let p = Point::p2(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let d = p.dist(&c);
                if d <= r - margin / 2.0 {
                    points.push(p);
                    colors.push(Color::Red);
                } else if d >= r + margin / 2.0 {
                    points.push(p);
                    colors.push(Color::Blue);
                }
            }
            let inner = Ball { center: c, radius: r - margin / 2.0 };
            Ok(ColoredInstance { points, hidden: ColoredHidden { colors, regions: vec![Region::Disk { ball: inner, color: Color::Red }] } })
        }
        DiskLayout::Chain => Ok(chain(n, &mut rng)),
    }
}

/// The red origin plus `n - 1` blue points on the unit circle spread over a
/// half-turn around the direction `-x`, with a small random jitter.
fn chain(n: usize, rng: &mut ChaCha8Rng) -> ColoredInstance {
    let mut points = vec![Point::p2(0.0, 0.0)];
    let mut colors = vec![Color::Red];
    let m = n.saturating_sub(1);
    for i in 0..m {
        let f = (i as f64 + 0.5 + rng.random_range(-0.1..0.1)) / m as f64;
        let a = std::f64::consts::PI * (0.5 + f);
        points.push(Point::p2(a.cos(), a.sin()));
        colors.push(Color::Blue);
    }
    let red = Ball { center: Point::p2(0.0, 0.0), radius: 0.0 };
    ColoredInstance { points, hidden: ColoredHidden { colors, regions: vec![Region::Disk { ball: red, color: Color::Red }] } }
}

fn triangle_gap(a: &Triangle2, b: &Triangle2) -> f64 {
    // Largest separation along an edge normal of either triangle; a lower
    // bound on their distance.
    let mut best = f64::NEG_INFINITY;
    for (s, t) in [(a, b), (b, a)] {
        let v = s.vertices();
        for k in 0..3 {
            let Ok(h) = Hyperplane::through(&v[k], &v[(k + 1) % 3]) else { continue };
            let inward = if h.eval(&v[(k + 2) % 3]) > 0.0 { 1.0 } else { -1.0 };
            let far = t.vertices().iter().map(|p| inward * h.eval(p)).fold(f64::NEG_INFINITY, f64::max);
            best = best.max(-far);
        }
    }
    best
}

/// `k` separated random triangles in `[-1, 1]^2` with alternating colors;
/// points uniform inside them.
pub fn gen_ktriangles(k: usize, n: usize, margin: f64, seed: u64) -> Result<ColoredInstance> {
    if k == 0 {
        return Err(Error::Generation("k must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = (1.6 / (k as f64).sqrt()).min(1.2);
    let mut tris: Vec<Triangle2> = Vec::new();
    let mut attempts = 0;
    while tris.len() < k {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Generation(format!("could not place {k} triangles with margin {margin}")));
        }
        let c = Point::p2(rng.random_range(-1.0 + size / 2.0..1.0 - size / 2.0), rng.random_range(-1.0 + size / 2.0..1.0 - size / 2.0));
        let v: Vec<Point> = (0..3)
            .map(|_| Point::p2(c.x() + rng.random_range(-size / 2.0..size / 2.0), c.y() + rng.random_range(-size / 2.0..size / 2.0)))
            .collect();
        let t = Triangle2::new(v[0], v[1], v[2]);
        if t.area() < 0.1 * size * size {
            continue;
        }
        if tris.iter().all(|o| triangle_gap(o, &t) >= margin) {
            tris.push(t);
        }
    }
    let regions: Vec<Region> = tris.iter().enumerate().map(|(i, t)| Region::Triangle { triangle: *t, color: alternating(i) }).collect();
    let mut points = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    for i in 0..n {
        let t = &tris[i % k];
        let (mut u, mut v) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        let p = t.a.add(&t.b.sub(&t.a).scale(u)).add(&t.c.sub(&t.a).scale(v));
        points.push(p);
        colors.push(alternating(i % k));
    }
    Ok(ColoredInstance { points, hidden: ColoredHidden { colors, regions } })
}

/// Splits the unit square into `k` triangles by repeated bisection of the
/// largest triangle's longest edge.
fn triangle_partition(k: usize, rng: &mut ChaCha8Rng) -> Vec<Triangle2> {
    let (p00, p10, p11, p01) = (Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(1.0, 1.0), Point::p2(0.0, 1.0));
    let mut tris = vec![Triangle2::new(p00, p10, p11)];
    if k >= 2 {
        tris.push(Triangle2::new(p00, p11, p01));
    }
    while tris.len() < k {
        let (i, _) = tris.iter().enumerate().max_by(|a, b| a.1.area().total_cmp(&b.1.area())).unwrap();
        let t = tris.swap_remove(i);
        let v = t.vertices();
        let e = (0..3).max_by(|&a, &b| v[a].dist(&v[(a + 1) % 3]).total_cmp(&v[b].dist(&v[(b + 1) % 3]))).unwrap();
        let (a, b, c) = (v[e], v[(e + 1) % 3], v[(e + 2) % 3]);
        let m = a.add(&b.sub(&a).scale(rng.random_range(0.35..0.65)));
        tris.push(Triangle2::new(a, m, c));
        tris.push(Triangle2::new(m, b, c));
    }
    tris
}

/// `(k, eps)`-terrain: `k` random planes over a triangle partition of the
/// unit square (half of it when `k = 1`), heights with uniform noise in
/// `[-eps/2, eps/2]`.
pub fn gen_terrain(k: usize, n: usize, eps: f64, seed: u64) -> Result<TerrainInstance> {
    if k == 0 {
        return Err(Error::Generation("k must be positive".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::Generation("eps must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tris = triangle_partition(k, &mut rng);
    let pieces: Vec<PlanePiece> = tris
        .iter()
        .map(|t| PlanePiece {
            triangle: *t,
            plane: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)],
        })
        .collect();
    let mut points = Vec::with_capacity(n);
    let mut heights = Vec::with_capacity(n);
    while points.len() < n {
        let p = Point::p2(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let Some(piece) = pieces.iter().find(|pc| pc.triangle.contains(&p)) else { continue };
        let [a, b, c] = piece.plane;
        let noise = if eps > 0.0 { rng.random_range(-eps / 2.0..=eps / 2.0) } else { 0.0 };
        points.push(p);
        heights.push(a * p.x() + b * p.y() + c + noise);
    }
    Ok(TerrainInstance { points, eps, hidden: TerrainHidden { heights, pieces } })
}

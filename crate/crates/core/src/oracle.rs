//! Oracle interfaces and their reference implementations.
//!
//! Ground-truth records keep the hidden data (constraint sides, point colors,
//! terrain heights) in private fields. Solvers receive oracle handles that
//! implement the traits below and never the ground truth itself. The
//! ground-truth accessors that return hidden data are meant for white-box
//! verification only; arming the tripwire makes them panic, which lets a
//! harness prove that a solver run never reached for them.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{convex_hull_2d, CommittedHalfspace, HullKind, Hyperplane, Point, Triangle2};
use crate::lp::{lp_solve, LpInstance, LpResult};
use crate::tol::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleKind {
    Separation,
    Labeling,
    #[serde(rename = "NN")]
    Nn,
    #[serde(rename = "FN")]
    Fn,
    Triangle,
    SampleUncovered,
    ValidateTriangle,
}

impl OracleKind {
    pub const ALL: [OracleKind; 7] = [
        OracleKind::Separation,
        OracleKind::Labeling,
        OracleKind::Nn,
        OracleKind::Fn,
        OracleKind::Triangle,
        OracleKind::SampleUncovered,
        OracleKind::ValidateTriangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Separation => "Separation",
            OracleKind::Labeling => "Labeling",
            OracleKind::Nn => "NN",
            OracleKind::Fn => "FN",
            OracleKind::Triangle => "Triangle",
            OracleKind::SampleUncovered => "SampleUncovered",
            OracleKind::ValidateTriangle => "ValidateTriangle",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Per-kind call counters. Counters only ever increase and are safe to bump
/// from several threads.
#[derive(Debug, Default)]
pub struct QueryLedger {
    counts: [AtomicU64; 7],
}

/// Plain copy of a ledger; serializes as a flat `{kind: count}` object.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    #[serde(rename = "Separation")]
    pub separation: u64,
    #[serde(rename = "Labeling")]
    pub labeling: u64,
    #[serde(rename = "NN")]
    pub nn: u64,
    #[serde(rename = "FN")]
    pub fn_: u64,
    #[serde(rename = "Triangle")]
    pub triangle: u64,
    #[serde(rename = "SampleUncovered")]
    pub sample_uncovered: u64,
    #[serde(rename = "ValidateTriangle")]
    pub validate_triangle: u64,
}

impl LedgerSnapshot {
    pub fn get(&self, k: OracleKind) -> u64 {
        match k {
            OracleKind::Separation => self.separation,
            OracleKind::Labeling => self.labeling,
            OracleKind::Nn => self.nn,
            OracleKind::Fn => self.fn_,
            OracleKind::Triangle => self.triangle,
            OracleKind::SampleUncovered => self.sample_uncovered,
            OracleKind::ValidateTriangle => self.validate_triangle,
        }
    }

    pub fn total(&self) -> u64 {
        OracleKind::ALL.iter().map(|&k| self.get(k)).sum()
    }

    /// Counter-wise difference `self - earlier`.
    pub fn since(&self, earlier: &LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            separation: self.separation - earlier.separation,
            labeling: self.labeling - earlier.labeling,
            nn: self.nn - earlier.nn,
            fn_: self.fn_ - earlier.fn_,
            triangle: self.triangle - earlier.triangle,
            sample_uncovered: self.sample_uncovered - earlier.sample_uncovered,
            validate_triangle: self.validate_triangle - earlier.validate_triangle,
        }
    }
}

impl QueryLedger {
    pub fn new() -> QueryLedger {
        QueryLedger::default()
    }

    pub fn shared() -> Arc<QueryLedger> {
        Arc::new(QueryLedger::default())
    }

    pub fn record(&self, k: OracleKind) {
        self.counts[k.slot()].fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self, k: OracleKind) -> u64 {
        self.counts[k.slot()].load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            separation: self.get(OracleKind::Separation),
            labeling: self.get(OracleKind::Labeling),
            nn: self.get(OracleKind::Nn),
            fn_: self.get(OracleKind::Fn),
            triangle: self.get(OracleKind::Triangle),
            sample_uncovered: self.get(OracleKind::SampleUncovered),
            validate_triangle: self.get(OracleKind::ValidateTriangle),
        }
    }
}

impl Serialize for QueryLedger {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.snapshot().serialize(s)
    }
}

/// Shared flag that makes hidden-data accessors panic while armed.
#[derive(Clone, Debug, Default)]
pub struct Tripwire(Arc<AtomicBool>);

impl Tripwire {
    pub fn arm(&self) -> TripwireGuard {
        self.0.store(true, Ordering::SeqCst);
        TripwireGuard(self.clone())
    }

    fn check(&self, what: &str) {
        if self.0.load(Ordering::SeqCst) {
            panic!("hidden field `{what}` read while the tripwire is armed");
        }
    }
}

/// Disarms the tripwire when dropped.
pub struct TripwireGuard(Tripwire);

impl Drop for TripwireGuard {
    fn drop(&mut self) {
        (self.0).0.store(false, Ordering::SeqCst);
    }
}

// ---------------------------------------------------------------------------
// Undecided LP oracles.

/// Hidden data of an undecided LP: the sides of every hyperplane, and an
/// optional mask selecting which constraints are really part of the LP.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UlpGroundTruth {
    dim: usize,
    constraints: Vec<Hyperplane>,
    hidden_sides: Vec<i8>,
    implicit_mask: Option<Vec<bool>>,
    #[serde(skip)]
    tripwire: Tripwire,
}

impl UlpGroundTruth {
    /// Ground truth in the dimension of its first constraint (2 if empty).
    pub fn new(constraints: Vec<Hyperplane>, hidden_sides: Vec<i8>, implicit_mask: Option<Vec<bool>>) -> Result<Self> {
        let dim = constraints.first().map_or(2, Hyperplane::dim);
        Self::with_dim(dim, constraints, hidden_sides, implicit_mask)
    }

    pub fn with_dim(
        dim: usize,
        constraints: Vec<Hyperplane>,
        hidden_sides: Vec<i8>,
        implicit_mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        if constraints.len() != hidden_sides.len() || implicit_mask.as_ref().is_some_and(|m| m.len() != constraints.len()) {
            return Err(Error::Contract("ground truth lengths differ".into()));
        }
        if hidden_sides.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Contract("sides must be +1 or -1".into()));
        }
        if let Some(h) = constraints.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: h.dim() });
        }
        Ok(UlpGroundTruth { dim, constraints, hidden_sides, implicit_mask, tripwire: Tripwire::default() })
    }

    /// The public hyperplanes.
    pub fn constraints(&self) -> &[Hyperplane] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tripwire(&self) -> &Tripwire {
        &self.tripwire
    }

    /// White-box access to the hidden sides.
    pub fn hidden_sides(&self) -> &[i8] {
        self.tripwire.check("hidden_sides");
        &self.hidden_sides
    }

    /// White-box access to the implicit mask.
    pub fn implicit_mask(&self) -> Option<&[bool]> {
        self.tripwire.check("implicit_mask");
        self.implicit_mask.as_deref()
    }

    /// White-box: the committed halfspaces that really form the LP.
    pub fn hidden_lp(&self) -> Vec<CommittedHalfspace> {
        self.tripwire.check("hidden_lp");
        self.real_constraints().collect()
    }

    fn is_real(&self, i: usize) -> bool {
        self.implicit_mask.as_ref().is_none_or(|m| m[i])
    }

    fn committed(&self, i: usize) -> CommittedHalfspace {
        CommittedHalfspace { plane: self.constraints[i], side: self.hidden_sides[i] }
    }

    fn real_constraints(&self) -> impl Iterator<Item = CommittedHalfspace> + '_ {
        (0..self.constraints.len()).filter(|&i| self.is_real(i)).map(|i| self.committed(i))
    }

    /// White-box: does `p` satisfy every real constraint?
    pub fn satisfies_all(&self, p: &Point) -> bool {
        self.tripwire.check("satisfies_all");
        self.real_constraints().all(|h| h.contains(p))
    }
}

/// A violated constraint returned by a separation oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Index of the constraint in the oracle's public list.
    pub index: usize,
    pub halfspace: CommittedHalfspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Separation {
    Feasible,
    Violated(Violation),
}

/// Answers "is this point feasible, and if not, which constraint fails".
pub trait SeparationOracle: Sync {
    fn dim(&self) -> usize;
    fn separate(&self, p: &Point) -> Separation;
}

/// Reveals the side of a named constraint.
pub trait LabelingOracle: Sync {
    fn label(&self, index: usize) -> Result<CommittedHalfspace>;
}

/// Reference undecided-LP oracle over a ground truth.
pub struct UlpOracle {
    gt: UlpGroundTruth,
    ledger: Arc<QueryLedger>,
}

impl UlpOracle {
    pub fn new(gt: UlpGroundTruth, ledger: Arc<QueryLedger>) -> UlpOracle {
        UlpOracle { gt, ledger }
    }

    pub fn ledger(&self) -> &Arc<QueryLedger> {
        &self.ledger
    }

    /// The public hyperplanes, in oracle index order.
    pub fn constraints(&self) -> &[Hyperplane] {
        &self.gt.constraints
    }

    /// Feasible iff `p` satisfies every real constraint; otherwise the
    /// lowest-index violated one. Always evaluated on the full original set.
    pub fn separation_query(&self, p: &Point) -> Result<Separation> {
        if p.dim() != self.gt.dim() {
            return Err(Error::DimensionMismatch { expected: self.gt.dim(), got: p.dim() });
        }
        self.ledger.record(OracleKind::Separation);
        for i in 0..self.gt.constraints.len() {
            if !self.gt.is_real(i) {
                continue;
            }
            let h = self.gt.committed(i);
            if h.violated_by(p) {
                return Ok(Separation::Violated(Violation { index: i, halfspace: h }));
            }
        }
        Ok(Separation::Feasible)
    }

    /// Reveals the hidden side of constraint `index`, masked or not.
    pub fn label_query(&self, index: usize) -> Result<CommittedHalfspace> {
        if index >= self.gt.constraints.len() {
            return Err(Error::Contract(format!("constraint index {index} out of range")));
        }
        self.ledger.record(OracleKind::Labeling);
        Ok(self.gt.committed(index))
    }
}

impl SeparationOracle for UlpOracle {
    fn dim(&self) -> usize {
        self.gt.dim()
    }

    fn separate(&self, p: &Point) -> Separation {
        self.separation_query(p).expect("query point dimension matches the instance")
    }
}

impl LabelingOracle for UlpOracle {
    fn label(&self, index: usize) -> Result<CommittedHalfspace> {
        self.label_query(index)
    }
}

// ---------------------------------------------------------------------------
// Colored point oracles.

/// Hidden coloring (and optional terrain heights) of a public point set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColoredGroundTruth {
    points: Vec<Point>,
    colors: Vec<Color>,
    heights: Option<Vec<f64>>,
    #[serde(skip)]
    tripwire: Tripwire,
}

impl ColoredGroundTruth {
    pub fn new(points: Vec<Point>, colors: Vec<Color>) -> Result<Self> {
        if points.len() != colors.len() {
            return Err(Error::Contract("points and colors differ in length".into()));
        }
        Ok(ColoredGroundTruth { points, colors, heights: None, tripwire: Tripwire::default() })
    }

    /// Terrain mode: every point has a hidden height and a nominal color.
    pub fn terrain(points: Vec<Point>, heights: Vec<f64>) -> Result<Self> {
        if points.len() != heights.len() {
            return Err(Error::Contract("points and heights differ in length".into()));
        }
        if heights.iter().any(|z| !z.is_finite()) {
            return Err(Error::Contract("non-finite height".into()));
        }
        let colors = vec![Color::Red; points.len()];
        Ok(ColoredGroundTruth { points, colors, heights: Some(heights), tripwire: Tripwire::default() })
    }

    /// Point locations are public.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tripwire(&self) -> &Tripwire {
        &self.tripwire
    }

    /// White-box access to the hidden colors.
    pub fn hidden_colors(&self) -> &[Color] {
        self.tripwire.check("hidden_colors");
        &self.colors
    }

    /// White-box access to the hidden heights.
    pub fn hidden_heights(&self) -> Option<&[f64]> {
        self.tripwire.check("hidden_heights");
        self.heights.as_deref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub index: usize,
    pub point: Point,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TriangleVerdict {
    Empty,
    Monochromatic(Color),
    Mixed { red: Point, blue: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Validation {
    /// Plane `z = a x + b y + c` within `eps` of every point inside.
    Valid { a: f64, b: f64, c: f64 },
    /// A point no admissible plane can serve.
    Invalid { witness: Point },
}

/// Colored nearest / furthest neighbour queries over a public point set.
pub trait ProximityOracle: Sync {
    fn points(&self) -> &[Point];
    fn nn(&self, q: &Point, color: Color) -> Option<Neighbor>;
    fn furthest(&self, q: &Point, color: Color) -> Option<Neighbor>;
}

/// Triangle color queries plus uniform sampling of uncovered points.
pub trait RegionOracle: Sync {
    fn triangle(&self, t: &Triangle2) -> TriangleVerdict;
    fn sample_uncovered(&self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point>;
}

/// Terrain triangle validation plus uniform sampling of uncovered points.
pub trait TerrainOracle: Sync {
    fn validate(&self, t: &Triangle2, eps: f64) -> Validation;
    fn sample_uncovered(&self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point>;
}

/// Reference implementation of every colored-point oracle by linear scans.
pub struct ColorOracle {
    gt: ColoredGroundTruth,
    ledger: Arc<QueryLedger>,
}

impl ColorOracle {
    pub fn new(gt: ColoredGroundTruth, ledger: Arc<QueryLedger>) -> ColorOracle {
        ColorOracle { gt, ledger }
    }

    pub fn ledger(&self) -> &Arc<QueryLedger> {
        &self.ledger
    }

    fn extreme(&self, q: &Point, color: Color, furthest: bool) -> Option<Neighbor> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.gt.points.iter().enumerate() {
            if self.gt.colors[i] != color {
                continue;
            }
            let d2 = p.dist2(q);
            let better = match best {
                None => true,
                Some((_, b)) => {
                    if furthest {
                        d2 > b
                    } else {
                        d2 < b
                    }
                }
            };
            if better {
                best = Some((i, d2));
            }
        }
        best.map(|(i, d2)| Neighbor { index: i, point: self.gt.points[i], distance: d2.sqrt() })
    }

    /// Closest point of `color` (lowest index on ties).
    pub fn nn_query(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.ledger.record(OracleKind::Nn);
        self.extreme(q, color, false)
    }

    /// Furthest point of `color` (lowest index on ties).
    pub fn fn_query(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.ledger.record(OracleKind::Fn);
        self.extreme(q, color, true)
    }

    pub fn triangle_query(&self, t: &Triangle2) -> TriangleVerdict {
        self.ledger.record(OracleKind::Triangle);
        let mut red = None;
        let mut blue = None;
        for (i, p) in self.gt.points.iter().enumerate() {
            if !t.contains(p) {
                continue;
            }
            match self.gt.colors[i] {
                Color::Red => red = red.or(Some(*p)),
                Color::Blue => blue = blue.or(Some(*p)),
            }
            if red.is_some() && blue.is_some() {
                break;
            }
        }
        match (red, blue) {
            (None, None) => TriangleVerdict::Empty,
            (Some(_), None) => TriangleVerdict::Monochromatic(Color::Red),
            (None, Some(_)) => TriangleVerdict::Monochromatic(Color::Blue),
            (Some(r), Some(b)) => TriangleVerdict::Mixed { red: r, blue: b },
        }
    }

    /// A uniformly random point not covered by any triangle of `cover`.
    pub fn sample_uncovered_query(&self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point> {
        self.ledger.record(OracleKind::SampleUncovered);
        let free: Vec<usize> = (0..self.gt.points.len())
            .filter(|&i| !cover.iter().any(|t| t.contains(&self.gt.points[i])))
            .collect();
        if free.is_empty() {
            return None;
        }
        Some(self.gt.points[free[rng.random_range(0..free.len())]])
    }

    /// Decides whether some plane is within `eps` vertically of every point
    /// whose projection lies in the closed triangle `t`.
    pub fn validate_triangle_query(&self, t: &Triangle2, eps: f64) -> Result<Validation> {
        let heights = self
            .gt
            .heights
            .as_ref()
            .ok_or_else(|| Error::Contract("validate_triangle needs a terrain ground truth".into()))?;
        if !(eps >= 0.0) {
            return Err(Error::Contract("eps must be nonnegative".into()));
        }
        self.ledger.record(OracleKind::ValidateTriangle);
        let inside: Vec<usize> = (0..self.gt.points.len()).filter(|&i| t.contains(&self.gt.points[i])).collect();
        Ok(fit_plane(&inside.iter().map(|&i| (self.gt.points[i], heights[i])).collect::<Vec<_>>(), eps))
    }
}

/// Largest-margin plane through the points: maximize `t` subject to
/// `|z_i - (a x_i + b y_i + c)| <= eps - t`. The 3-variable problem with
/// margin zero is feasible exactly when the optimum has `t >= 0`, and the
/// returned plane keeps the largest possible slack.
///
/// When the points sit on one line (or at one location) the plane is not
/// determined by them; the fit then varies only along that line, so the
/// returned plane is level across it instead of tilting at random.
pub(crate) fn fit_plane(pts: &[(Point, f64)], eps: f64) -> Validation {
    match fit(pts, eps) {
        Fit::Plane(a, b, c) => Validation::Valid { a, b, c },
        Fit::Worst(order) => Validation::Invalid { witness: pts[order[0]].0 },
    }
}

/// A small subset of `pts` that no plane fits within `eps`, or `None` when
/// a plane fits all of them. Any set containing the subset fails as well.
pub(crate) fn plane_conflict(pts: &[(Point, f64)], eps: f64) -> Option<Vec<usize>> {
    let Fit::Worst(order) = fit(pts, eps) else { return None };
    // The points attaining the largest residual carry the optimum; confirm
    // before trusting that subset.
    let sub: Vec<(Point, f64)> = order.iter().map(|&i| pts[i]).collect();
    if order.len() < pts.len() && matches!(fit(&sub, eps), Fit::Plane(..)) {
        return Some((0..pts.len()).collect());
    }
    Some(order)
}

enum Fit {
    Plane(f64, f64, f64),
    /// Indices of the points with the largest residual, worst first.
    Worst(Vec<usize>),
}

fn fit(pts: &[(Point, f64)], eps: f64) -> Fit {
    if pts.is_empty() {
        return Fit::Plane(0.0, 0.0, 0.0);
    }
    let hull = convex_hull_2d(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let (a, b, c) = match hull.kind {
        HullKind::Polygon => match fit_polygon(pts, eps) {
            Some(v) => v,
            None => return Fit::Worst((0..pts.len()).collect()),
        },
        HullKind::Segment => match fit_line(pts, eps, hull.polygon.vertices[0], hull.polygon.vertices[1]) {
            Some(v) => v,
            None => return Fit::Worst((0..pts.len()).collect()),
        },
        _ => {
            let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            (0.0, 0.0, (lo + hi) / 2.0)
        }
    };
    let res: Vec<f64> = pts.iter().map(|(p, z)| (z - (a * p.x() + b * p.y() + c)).abs()).collect();
    let worst = res.iter().copied().fold(0.0, f64::max);
    if worst <= eps + tol().side {
        return Fit::Plane(a, b, c);
    }
    let mut order: Vec<usize> = (0..pts.len()).filter(|&i| res[i] >= worst - tol().side * (1.0 + worst)).collect();
    order.sort_by(|&i, &j| res[j].total_cmp(&res[i]));
    Fit::Worst(order)
}

fn fit_polygon(pts: &[(Point, f64)], eps: f64) -> Option<(f64, f64, f64)> {
    let mut cons = Vec::with_capacity(2 * pts.len());
    for (p, z) in pts {
        let (x, y) = (p.x(), p.y());
        // a x + b y + c - t >= z - eps
        cons.push(CommittedHalfspace {
            plane: Hyperplane::new(Point::new(&[x, y, 1.0, -1.0]), z - eps).expect("nonzero"),
            side: 1,
        });
        // a x + b y + c + t <= z + eps
        cons.push(CommittedHalfspace {
            plane: Hyperplane::new(Point::new(&[x, y, 1.0, 1.0]), z + eps).expect("nonzero"),
            side: -1,
        });
    }
    let inst = LpInstance { dim: 4, constraints: cons, objective: Some(Point::new(&[0.0, 0.0, 0.0, -1.0])), box_m: Some(tol().box_m) };
    match lp_solve(&inst, 0) {
        Ok(LpResult::Optimal(v)) => Some((v[0], v[1], v[2])),
        _ => None,
    }
}

/// Fit for points on the segment `p0 p1`: `z = c + s l` in the arc-length
/// parameter `l` along the segment.
fn fit_line(pts: &[(Point, f64)], eps: f64, p0: Point, p1: Point) -> Option<(f64, f64, f64)> {
    let u = p1.sub(&p0).scale(1.0 / p1.dist(&p0));
    let mut cons = Vec::with_capacity(2 * pts.len());
    for (p, z) in pts {
        let l = u.dot(&p.sub(&p0));
        cons.push(CommittedHalfspace { plane: Hyperplane::new(Point::p3(l, 1.0, -1.0), z - eps).expect("nonzero"), side: 1 });
        cons.push(CommittedHalfspace { plane: Hyperplane::new(Point::p3(l, 1.0, 1.0), z + eps).expect("nonzero"), side: -1 });
    }
    let inst = LpInstance { dim: 3, constraints: cons, objective: Some(Point::p3(0.0, 0.0, -1.0)), box_m: Some(tol().box_m) };
    let sol = match lp_solve(&inst, 0) {
        Ok(LpResult::Optimal(v)) => v,
        _ => return None,
    };
    let (sl, c0) = (sol[0], sol[1]);
    // z = c0 + sl * u.(p - p0)
    Some((sl * u.x(), sl * u.y(), c0 - sl * u.dot(&p0)))
}

impl ProximityOracle for ColorOracle {
    fn points(&self) -> &[Point] {
        &self.gt.points
    }

    fn nn(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.nn_query(q, color)
    }

    fn furthest(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.fn_query(q, color)
    }
}

impl RegionOracle for ColorOracle {
    fn triangle(&self, t: &Triangle2) -> TriangleVerdict {
        self.triangle_query(t)
    }

    fn sample_uncovered(&self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point> {
        self.sample_uncovered_query(cover, rng)
    }
}

impl TerrainOracle for ColorOracle {
    fn validate(&self, t: &Triangle2, eps: f64) -> Validation {
        self.validate_triangle_query(t, eps).expect("terrain ground truth")
    }

    fn sample_uncovered(&self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point> {
        self.sample_uncovered_query(cover, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn quadrant() -> UlpOracle {
        let gt = UlpGroundTruth::new(
            vec![Hyperplane::line(1.0, 0.0, 0.0).unwrap(), Hyperplane::line(0.0, 1.0, 0.0).unwrap()],
            vec![1, 1],
            None,
        )
        .unwrap();
        UlpOracle::new(gt, QueryLedger::shared())
    }

    #[test]
    fn separation_examples() {
        let o = quadrant();
        assert_eq!(o.separation_query(&Point::p2(1.0, 1.0)).unwrap(), Separation::Feasible);
        match o.separation_query(&Point::p2(-1.0, 1.0)).unwrap() {
            Separation::Violated(v) => {
                assert_eq!(v.index, 0);
                assert_eq!(v.halfspace.side, 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(o.ledger().get(OracleKind::Separation), 2);
        assert!(o.separation_query(&Point::p3(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn separation_tie_rule_picks_lowest_index() {
        let gt = UlpGroundTruth::new(
            vec![Hyperplane::new(Point::new(&[1.0]), 0.0).unwrap(), Hyperplane::new(Point::new(&[1.0]), -1.0).unwrap()],
            vec![1, -1],
            None,
        )
        .unwrap();
        let o = UlpOracle::new(gt, QueryLedger::shared());
        match o.separation_query(&Point::new(&[-0.5])).unwrap() {
            Separation::Violated(v) => assert_eq!(v.index, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn labeling_counts_every_call_and_ignores_mask() {
        let gt = UlpGroundTruth::new(
            vec![Hyperplane::line(1.0, 0.0, 0.0).unwrap(), Hyperplane::line(0.0, 1.0, 0.0).unwrap()],
            vec![1, -1],
            Some(vec![true, false]),
        )
        .unwrap();
        let o = UlpOracle::new(gt, QueryLedger::shared());
        let a = o.label_query(0).unwrap();
        let b = o.label_query(0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.side, 1);
        assert_eq!(o.label_query(1).unwrap().side, -1);
        assert_eq!(o.ledger().get(OracleKind::Labeling), 3);
        assert!(o.label_query(2).is_err());
        // The masked constraint is never reported as violated.
        assert_eq!(o.separation_query(&Point::p2(1.0, 1.0)).unwrap(), Separation::Feasible);
    }

    fn colored(points: &[(f64, f64)], colors: &[Color]) -> ColorOracle {
        let gt = ColoredGroundTruth::new(points.iter().map(|&(x, y)| Point::p2(x, y)).collect(), colors.to_vec()).unwrap();
        ColorOracle::new(gt, QueryLedger::shared())
    }

    #[test]
    fn proximity_examples() {
        let o = colored(&[(1.0, 1.0), (5.0, 0.0)], &[Color::Red, Color::Blue]);
        let n = o.nn_query(&Point::p2(1.0, 1.0), Color::Red).unwrap();
        assert_eq!(n.distance, 0.0);
        let n = o.nn_query(&Point::p2(0.0, 0.0), Color::Blue).unwrap();
        assert_eq!((n.point, n.distance), (Point::p2(5.0, 0.0), 5.0));

        let o = colored(&[(0.0, 0.0), (3.0, 0.0)], &[Color::Red, Color::Red]);
        let f = o.fn_query(&Point::p2(0.0, 0.0), Color::Red).unwrap();
        assert_eq!((f.point, f.distance), (Point::p2(3.0, 0.0), 3.0));
        assert!(o.nn_query(&Point::p2(0.0, 0.0), Color::Blue).is_none());
        assert!(o.fn_query(&Point::p2(0.0, 0.0), Color::Blue).is_none());
        assert_eq!(o.ledger().get(OracleKind::Nn), 1);
        assert_eq!(o.ledger().get(OracleKind::Fn), 2);
    }

    #[test]
    fn triangle_examples() {
        let o = colored(&[(0.2, 0.2), (0.4, 0.1), (5.0, 5.0)], &[Color::Red, Color::Blue, Color::Red]);
        assert_eq!(o.triangle_query(&Triangle2::probe(&Point::p2(0.2, 0.2))), TriangleVerdict::Monochromatic(Color::Red));
        let t = Triangle2::new(Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 1.0));
        assert_eq!(o.triangle_query(&t), TriangleVerdict::Mixed { red: Point::p2(0.2, 0.2), blue: Point::p2(0.4, 0.1) });
        let far = Triangle2::new(Point::p2(10.0, 0.0), Point::p2(11.0, 0.0), Point::p2(10.0, 1.0));
        assert_eq!(o.triangle_query(&far), TriangleVerdict::Empty);
    }

    #[test]
    fn sampling_examples() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.0)).collect();
        let o = colored(&pts, &[Color::Red; 10]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            seen.insert(o.sample_uncovered_query(&[], &mut rng).unwrap().x() as i64);
        }
        assert_eq!(seen.len(), 10);
        let all = Triangle2::new(Point::p2(-1.0, -1.0), Point::p2(20.0, -1.0), Point::p2(-1.0, 20.0));
        assert!(o.sample_uncovered_query(&[all], &mut rng).is_none());
        // Leave only x = 7 uncovered.
        let left = Triangle2::new(Point::p2(-100.0, -1.0), Point::p2(6.5, -1.0), Point::p2(6.5, 1000.0));
        let right = Triangle2::new(Point::p2(7.5, -1.0), Point::p2(100.0, -1.0), Point::p2(7.5, 1000.0));
        for _ in 0..20 {
            assert_eq!(o.sample_uncovered_query(&[left, right], &mut rng), Some(Point::p2(7.0, 0.0)));
        }
    }

    #[test]
    fn validate_examples() {
        let gt = ColoredGroundTruth::terrain(vec![Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 1.0)], vec![0.0; 3]).unwrap();
        let o = ColorOracle::new(gt, QueryLedger::shared());
        let t = Triangle2::new(Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 1.0));
        match o.validate_triangle_query(&t, 0.0).unwrap() {
            Validation::Valid { a, b, c } => assert!(a.abs() < 1e-9 && b.abs() < 1e-9 && c.abs() < 1e-9),
            v => panic!("{v:?}"),
        }

        let gt = ColoredGroundTruth::terrain(vec![Point::p2(0.3, 0.3), Point::p2(0.3 + 5e-8, 0.3)], vec![0.0, 1.0]).unwrap();
        let o = ColorOracle::new(gt, QueryLedger::shared());
        assert!(matches!(o.validate_triangle_query(&t, 0.4).unwrap(), Validation::Invalid { .. }));
        match o.validate_triangle_query(&t, 0.5).unwrap() {
            Validation::Valid { a, b, c } => {
                let z0 = a * 0.3 + b * 0.3 + c;
                let z1 = a * (0.3 + 5e-8) + b * 0.3 + c;
                assert!(z0.abs() <= 0.5 + 1e-9 && (z1 - 1.0).abs() <= 0.5 + 1e-9, "{z0} {z1}");
            }
            v => panic!("{v:?}"),
        }
        assert_eq!(o.ledger().get(OracleKind::ValidateTriangle), 2);
    }

    #[test]
    fn ledger_serializes_flat() {
        let l = QueryLedger::new();
        l.record(OracleKind::Nn);
        l.record(OracleKind::Nn);
        l.record(OracleKind::Separation);
        let v: serde_json::Value = serde_json::to_value(&l).unwrap();
        assert_eq!(v["NN"], 2);
        assert_eq!(v["Separation"], 1);
        assert_eq!(v["ValidateTriangle"], 0);
        assert_eq!(v.as_object().unwrap().len(), 7);
    }

    #[test]
    fn ledger_is_exact_under_threads() {
        let l = Arc::new(QueryLedger::new());
        std::thread::scope(|s| {
            for _ in 0..4 {
                let l = l.clone();
                s.spawn(move || {
                    for _ in 0..1000 {
                        l.record(OracleKind::Triangle);
                    }
                });
            }
        });
        assert_eq!(l.get(OracleKind::Triangle), 4000);
    }

    #[test]
    #[should_panic(expected = "tripwire")]
    fn armed_tripwire_blocks_hidden_reads() {
        let gt = ColoredGroundTruth::new(vec![Point::p2(0.0, 0.0)], vec![Color::Red]).unwrap();
        let _g = gt.tripwire().arm();
        let _ = gt.hidden_colors();
    }
}

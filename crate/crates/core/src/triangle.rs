//! Learner that covers a hidden-color planar point set by monochromatic
//! triangles, using triangle queries and uniform sampling of uncovered
//! points.
//!
//! Every iteration draws a sample of uncovered points, forms candidate
//! triangles from it, and asks the oracle about the candidates that look
//! monochromatic and heavy in the sample, heaviest first. The first
//! confirmed candidate joins the cover. The terrain simplifier runs the same
//! loop with plane validation in place of the color check.

use std::collections::HashMap;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::arrangement::intersect_lines;
use crate::geom::{convex_hull_2d, relative_sample_size_with, Hyperplane, Point, Triangle2};
use crate::oracle::{Color, LedgerSnapshot, RegionOracle, TriangleVerdict};
use crate::tol::tol;

/// How candidate triangles are formed from a labeled sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleStrategy {
    /// Triangles spanned by three sample points of one color.
    #[default]
    SampleTriples,
    /// Bounded triangles cut out by three lines through sample pairs.
    LineTriples,
}

/// Sample constant used by the triangle learners unless overridden.
pub const DEFAULT_TRIANGLE_C_RA: f64 = 0.003;

/// VC dimension bound used for planar triangle ranges.
pub const VC_DIM_TRIANGLES: usize = 7;

/// Line triples enumerated by [`TriangleStrategy::LineTriples`] before the
/// line set is thinned.
pub const LINE_TRIPLE_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleParams {
    pub k: usize,
    pub seed: u64,
    pub strategy: TriangleStrategy,
    /// Constant of the relative-approximation sample size.
    pub sample_const: f64,
    pub vc_dim: usize,
    /// Consecutive fruitless iterations before giving up.
    pub max_retries: usize,
    /// Largest number of line-triple candidates kept per iteration.
    pub line_budget: usize,
}

impl Default for TriangleParams {
    fn default() -> Self {
        TriangleParams {
            k: 1,
            seed: 0,
            strategy: TriangleStrategy::SampleTriples,
            sample_const: DEFAULT_TRIANGLE_C_RA,
            vc_dim: VC_DIM_TRIANGLES,
            max_retries: 50,
            line_budget: 2000,
        }
    }
}

impl TriangleParams {
    /// Target sample size `max(relative_sample_size(1/4, 1/(16k), 0.05), 3k)`.
    pub fn sample_size(&self) -> Result<usize> {
        if self.k == 0 {
            return Err(Error::Contract("k must be positive".into()));
        }
        let p = 1.0 / (16.0 * self.k as f64);
        Ok(relative_sample_size_with(0.25, p, 0.05, self.vc_dim, self.sample_const)?.max(3 * self.k))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangleIteration {
    /// Sampling-oracle calls spent on the sample.
    pub sample_calls: usize,
    /// Distinct points in the sample.
    pub sample: usize,
    /// Oracle queries spent learning the sample's labels.
    pub probes: usize,
    pub candidates: usize,
    /// Candidates at or above the heaviness threshold.
    pub eligible: usize,
    /// Eligible candidates rejected by the sample alone.
    pub screened: usize,
    /// Oracle queries on candidates.
    pub queries: usize,
    pub accepted: bool,
    /// Sample estimate of the accepted triangle.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleCover {
    pub triangles: Vec<(Triangle2, Color)>,
    pub ledger: LedgerSnapshot,
    pub iterations: Vec<TriangleIteration>,
}

impl TriangleCover {
    /// Color implied for `p` by the first triangle containing it.
    pub fn label_of(&self, p: &Point) -> Option<Color> {
        self.triangles.iter().find(|(t, _)| t.contains(p)).map(|(_, c)| *c)
    }

    /// The iteration log, one JSON object per line.
    pub fn iterations_json_lines(&self) -> String {
        json_lines(&self.iterations)
    }
}

pub(crate) fn json_lines(iterations: &[TriangleIteration]) -> String {
    let mut out = String::new();
    for it in iterations {
        out.push_str(&serde_json::to_string(it).expect("plain struct"));
        out.push('\n');
    }
    out
}

fn choose3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) / 2 * (n - 2) / 3
    }
}

fn inside(t: &Triangle2, pts: &[Point]) -> Vec<usize> {
    (0..pts.len()).filter(|&i| t.contains(&pts[i])).collect()
}

/// Non-degenerate triangles spanned by triples of points sharing a class.
fn sample_triples(pts: &[Point], classes: &[u8]) -> Vec<(Triangle2, u8, [usize; 3])> {
    let mut groups: Vec<(u8, Vec<usize>)> = Vec::new();
    for (i, &c) in classes.iter().enumerate() {
        match groups.iter_mut().find(|g| g.0 == c) {
            Some(g) => g.1.push(i),
            None => groups.push((c, vec![i])),
        }
    }
    let mut out = Vec::new();
    for (c, idx) in &groups {
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                for d in b + 1..idx.len() {
                    let t = Triangle2::new(pts[idx[a]], pts[idx[b]], pts[idx[d]]);
                    if !t.is_degenerate() {
                        out.push((t, *c, [idx[a], idx[b], idx[d]]));
                    }
                }
            }
        }
    }
    out
}

/// Thin triangle around the segment `ab`.
fn sliver(a: &Point, b: &Point) -> Triangle2 {
    let d = b.sub(a);
    let w = tol().dedup / d.norm();
    let apex = a.add(&d.scale(0.5)).add(&Point::p2(-d.y() * w, d.x() * w));
    Triangle2::new(*a, *b, apex)
}

/// Candidates for classes whose sample points span no proper triangle:
/// slivers along pairs and probe-sized triangles around single points.
fn small_candidates(pts: &[Point], classes: &[u8], covered: &[u8]) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut done: Vec<u8> = covered.to_vec();
    for (i, &c) in classes.iter().enumerate() {
        if done.contains(&c) {
            continue;
        }
        done.push(c);
        let idx: Vec<usize> = (i..pts.len()).filter(|&j| classes[j] == c).collect();
        for (x, &a) in idx.iter().enumerate() {
            for &b in &idx[x + 1..] {
                if pts[a].dist(&pts[b]) > tol().dedup {
                    out.push(Candidate { tri: sliver(&pts[a], &pts[b]), class: Some(c), verts: None });
                }
            }
            out.push(Candidate { tri: Triangle2::probe(&pts[a]), class: Some(c), verts: None });
        }
    }
    out
}

fn same_line(a: &Hyperplane, b: &Hyperplane) -> bool {
    let eps = 1e-12;
    let s = if a.normal.dot(&b.normal) >= 0.0 { 1.0 } else { -1.0 };
    (a.normal.x() - s * b.normal.x()).abs() <= eps
        && (a.normal.y() - s * b.normal.y()).abs() <= eps
        && (a.offset - s * b.offset).abs() <= eps * (1.0 + a.offset.abs())
}

/// Distinct lines through pairs of sample points.
fn pair_lines(pts: &[Point]) -> Vec<Hyperplane> {
    let mut lines: Vec<Hyperplane> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if let Ok(h) = Hyperplane::through(&pts[i], &pts[j]) {
                if !lines.iter().any(|l| same_line(l, &h)) {
                    lines.push(h);
                }
            }
        }
    }
    lines
}

/// Bounded triangles of three lines each, over a subset of `lines` small
/// enough that at most [`LINE_TRIPLE_CAP`] triples are visited.
fn line_triples(lines: &[Hyperplane], seed: u64) -> Vec<Triangle2> {
    let mut keep = lines.len();
    while choose3(keep) > LINE_TRIPLE_CAP {
        keep -= 1;
    }
    let chosen: Vec<Hyperplane> = if keep == lines.len() {
        lines.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample_indices(&mut rng, lines.len(), keep).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| lines[i]).collect()
    };
    let n = chosen.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let Some(ab) = intersect_lines(&chosen[a], &chosen[b]) else { continue };
            for c in b + 1..n {
                let Some(bc) = intersect_lines(&chosen[b], &chosen[c]) else { continue };
                let Some(ca) = intersect_lines(&chosen[c], &chosen[a]) else { continue };
                let t = Triangle2::new(Point::p2(ab[0], ab[1]), Point::p2(bc[0], bc[1]), Point::p2(ca[0], ca[1]));
                if !t.is_degenerate() {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// When slivers and probe triangles join the candidates. They let isolated
/// points be covered: `Unspanned` offers them to classes whose sample points
/// span no proper triangle, `Always` to every class.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Small {
    Never,
    Unspanned,
    Always,
}

pub(crate) struct Candidate {
    tri: Triangle2,
    /// Class the candidate was built for; `None` for line triples.
    class: Option<u8>,
    /// Sample indices of the corners of a sample triple.
    verts: Option<[usize; 3]>,
}

/// Signed distances from every sample point to every line through two
/// sample points, so that containment of sample points in sample triples
/// costs three lookups.
struct EdgeTable {
    m: usize,
    d: Vec<f64>,
}

impl EdgeTable {
    fn new(pts: &[Point]) -> EdgeTable {
        let m = pts.len();
        let mut d = vec![0.0; m * m * m];
        for i in 0..m {
            for j in 0..m {
                let len = pts[i].dist(&pts[j]);
                if i == j || len == 0.0 {
                    continue;
                }
                let (ux, uy) = (pts[j].x() - pts[i].x(), pts[j].y() - pts[i].y());
                for (p, q) in pts.iter().enumerate() {
                    d[(i * m + j) * m + p] = (ux * (q.y() - pts[i].y()) - uy * (q.x() - pts[i].x())) / len;
                }
            }
        }
        EdgeTable { m, d }
    }

    fn at(&self, i: usize, j: usize, p: usize) -> f64 {
        self.d[(i * self.m + j) * self.m + p]
    }

    /// Closed containment of sample point `p` in the triple `[a, b, c]`,
    /// within the side tolerance like [`Triangle2::contains`].
    fn holds(&self, [a, b, c]: [usize; 3], p: usize) -> bool {
        let s = if self.at(a, b, c) > 0.0 { 1.0 } else { -1.0 };
        let band = -tol().side;
        s * self.at(a, b, p) >= band && s * self.at(b, c, p) >= band && s * self.at(c, a, p) >= band
    }

    fn hits(&self, cand: &Candidate, pts: &[Point]) -> Vec<usize> {
        match cand.verts {
            Some(v) => (0..self.m).filter(|&p| self.holds(v, p)).collect(),
            None => inside(&cand.tri, pts),
        }
    }

    fn count(&self, cand: &Candidate, pts: &[Point]) -> usize {
        match cand.verts {
            Some(v) => (0..self.m).filter(|&p| self.holds(v, p)).count(),
            None => inside(&cand.tri, pts).len(),
        }
    }
}

/// Candidate triangles for a labeled sample.
fn candidates_in(
    pts: &[Point],
    classes: &[u8],
    strategy: TriangleStrategy,
    budget: usize,
    seed: u64,
    small: Small,
) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = match strategy {
        TriangleStrategy::SampleTriples => sample_triples(pts, classes)
            .into_iter()
            .map(|(tri, c, v)| Candidate { tri, class: Some(c), verts: Some(v) })
            .collect(),
        TriangleStrategy::LineTriples => {
            let tris = line_triples(&pair_lines(pts), seed);
            let mut scored: Vec<(usize, usize, Triangle2)> = tris
                .into_par_iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    let hit = inside(&t, pts);
                    let first = *hit.first()?;
                    hit.iter().all(|&j| classes[j] == classes[first]).then_some((hit.len(), i, t))
                })
                .collect();
            scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            scored.truncate(budget);
            scored.into_iter().map(|(_, _, tri)| Candidate { tri, class: None, verts: None }).collect()
        }
    };
    match small {
        Small::Never => {}
        Small::Unspanned => {
            let spanned: Vec<u8> = sample_triples(pts, classes).into_iter().map(|t| t.1).collect();
            out.extend(small_candidates(pts, classes, &spanned));
        }
        Small::Always => out.extend(small_candidates(pts, classes, &[])),
    }
    out
}

/// Candidate triangles for a labeled sample.
///
/// `SampleTriples` returns every non-degenerate triangle spanned by three
/// sample points of one color. `LineTriples` returns the bounded triangles
/// formed by three lines through sample pairs that are monochromatic and
/// non-empty in the sample, heaviest first, at most `budget` of them.
pub fn candidate_triangles(sample: &[(Point, Color)], strategy: TriangleStrategy, budget: usize) -> Vec<Triangle2> {
    let pts: Vec<Point> = sample.iter().map(|s| s.0).collect();
    let classes: Vec<u8> = sample.iter().map(|s| s.1 as u8).collect();
    candidates_in(&pts, &classes, strategy, budget, 0, Small::Never).into_iter().map(|c| c.tri).collect()
}

/// What the generic cover loop needs from a problem.
pub(crate) trait CoverTarget: Sync {
    type Tag: Copy;

    fn sample(&mut self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point>;
    /// Class of every sample point, plus the queries spent learning them.
    fn classify(&mut self, sample: &[Point]) -> Result<(Vec<u8>, usize)>;
    /// A subset of the sample points `hit` that rules out every candidate
    /// holding it, judged from the sample alone, or `None` when a candidate
    /// holding exactly `hit` may be accepted.
    fn conflict(&self, sample: &[Point], classes: &[u8], hit: &[usize]) -> Option<Vec<usize>>;
    fn accept(&mut self, t: &Triangle2) -> Result<Option<Self::Tag>>;
}

pub(crate) struct CoverRun<T> {
    pub triangles: Vec<(Triangle2, T)>,
    pub iterations: Vec<TriangleIteration>,
}

/// Distinct uncovered points: repeated sampling until `target` distinct
/// points or `10 target` calls. `None` once everything is covered.
fn draw<T: CoverTarget>(target: &mut T, cover: &[Triangle2], want: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<Point>, usize)> {
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::with_capacity(want);
    let mut calls = 0;
    while pts.len() < want && calls < 10 * want {
        calls += 1;
        let Some(p) = target.sample(cover, rng) else { break };
        if seen.insert((p.x().to_bits(), p.y().to_bits())) {
            pts.push(p);
        }
    }
    if pts.is_empty() {
        None
    } else {
        Some((pts, calls))
    }
}

const CHUNK: usize = 64;

pub(crate) fn run_cover<T: CoverTarget>(target: &mut T, params: &TriangleParams) -> Result<CoverRun<T::Tag>> {
    let want = params.sample_size()?;
    let k = params.k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut triangles: Vec<(Triangle2, T::Tag)> = Vec::new();
    let mut cover: Vec<Triangle2> = Vec::new();
    let mut iterations = Vec::new();
    let mut failures = 0;
    while let Some((pts, calls)) = draw(target, &cover, want, &mut rng) {
        let m = pts.len();
        let (classes, probes) = target.classify(&pts)?;
        // A short sample is (nearly) the whole uncovered set, so a fresh
        // one cannot help and small candidates are offered to every class.
        let small = if m < want { Small::Always } else { Small::Unspanned };
        let seed = params.seed ^ (iterations.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let cands = candidates_in(&pts, &classes, params.strategy, params.line_budget, seed, small);

        // Heaviness threshold per class: 1/(10k h) for sample triples, with h
        // the hull size of the class, and 1/(10k) for line triples.
        let mut hull_size: HashMap<u8, usize> = HashMap::new();
        for &c in &classes {
            hull_size.entry(c).or_insert_with(|| {
                let members: Vec<Point> = (0..m).filter(|&i| classes[i] == c).map(|i| pts[i]).collect();
                convex_hull_2d(&members).polygon.len().max(1)
            });
        }
        let threshold = |class: Option<u8>| match class {
            Some(c) => 1.0 / (10.0 * k * hull_size[&c] as f64),
            None => 1.0 / (10.0 * k),
        };
        let table = EdgeTable::new(&pts);
        let mut eligible: Vec<(usize, usize)> = cands
            .par_iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let n = table.count(c, &pts);
                (n as f64 / m as f64 >= threshold(c.class)).then_some((i, n))
            })
            .collect();
        eligible.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut record = TriangleIteration {
            sample_calls: calls,
            sample: m,
            probes,
            candidates: cands.len(),
            eligible: eligible.len(),
            ..Default::default()
        };
        let mut found = None;
        // Holding a known conflict rules a candidate out without solving
        // anything; conflicts found along the way are kept for later ones.
        let mut conflicts: Vec<Vec<usize>> = Vec::new();
        'scan: for chunk in eligible.chunks(CHUNK) {
            let hits: Vec<Vec<bool>> = chunk
                .par_iter()
                .map(|&(i, _)| {
                    let mut mask = vec![false; m];
                    for j in table.hits(&cands[i], &pts) {
                        mask[j] = true;
                    }
                    mask
                })
                .collect();
            // Some(None): ruled out by a known conflict; Some(Some(w)): by a new one.
            let verdicts: Vec<Option<Option<Vec<usize>>>> = hits
                .par_iter()
                .map(|mask| {
                    if conflicts.iter().any(|w| w.iter().all(|&j| mask[j])) {
                        return Some(None);
                    }
                    let hit: Vec<usize> = (0..m).filter(|&j| mask[j]).collect();
                    target.conflict(&pts, &classes, &hit).map(Some)
                })
                .collect();
            for (&(i, n), verdict) in chunk.iter().zip(verdicts) {
                if let Some(w) = verdict {
                    record.screened += 1;
                    if let Some(w) = w.filter(|w| !conflicts.contains(w)) {
                        conflicts.push(w);
                    }
                    continue;
                }
                record.queries += 1;
                if let Some(tag) = target.accept(&cands[i].tri)? {
                    found = Some((cands[i].tri, tag, n));
                    break 'scan;
                }
            }
        }
        match found {
            Some((t, tag, hits)) => {
                failures = 0;
                record.accepted = true;
                record.estimate = hits as f64 / m as f64;
                triangles.push((t, tag));
                cover.push(t);
            }
            None => {
                failures += 1;
                if failures >= params.max_retries {
                    iterations.push(record);
                    return Err(Error::Assumption(format!(
                        "{failures} consecutive samples produced no acceptable triangle; the instance may not admit a cover by {} triangles",
                        params.k
                    )));
                }
            }
        }
        iterations.push(record);
    }
    Ok(CoverRun { triangles, iterations })
}

struct ColorTarget<'a> {
    oracle: &'a dyn RegionOracle,
    known: HashMap<(u64, u64), Color>,
    ledger: LedgerSnapshot,
}

impl CoverTarget for ColorTarget<'_> {
    type Tag = Color;

    fn sample(&mut self, cover: &[Triangle2], rng: &mut ChaCha8Rng) -> Option<Point> {
        self.ledger.sample_uncovered += 1;
        self.oracle.sample_uncovered(cover, rng)
    }

    fn classify(&mut self, sample: &[Point]) -> Result<(Vec<u8>, usize)> {
        let mut probes = 0;
        let mut out = Vec::with_capacity(sample.len());
        for p in sample {
            let key = (p.x().to_bits(), p.y().to_bits());
            let c = match self.known.get(&key) {
                Some(c) => *c,
                None => {
                    probes += 1;
                    self.ledger.triangle += 1;
                    let c = match self.oracle.triangle(&Triangle2::probe(p)) {
                        TriangleVerdict::Monochromatic(c) => c,
                        v => return Err(Error::Diagnostic(format!("probe at {p:?} answered {v:?}"))),
                    };
                    self.known.insert(key, c);
                    c
                }
            };
            out.push(c as u8);
        }
        Ok((out, probes))
    }

    fn conflict(&self, _: &[Point], classes: &[u8], hit: &[usize]) -> Option<Vec<usize>> {
        let first = *hit.first()?;
        hit.iter().find(|&&j| classes[j] != classes[first]).map(|&j| vec![first, j])
    }

    fn accept(&mut self, t: &Triangle2) -> Result<Option<Color>> {
        self.ledger.triangle += 1;
        Ok(match self.oracle.triangle(t) {
            TriangleVerdict::Monochromatic(c) => Some(c),
            _ => None,
        })
    }
}

/// Covers the oracle's hidden point set by monochromatic triangles,
/// assuming `params.k` monochromatic triangles suffice.
pub fn learn_triangle_cover(oracle: &dyn RegionOracle, params: &TriangleParams) -> Result<TriangleCover> {
    let mut target = ColorTarget { oracle, known: HashMap::new(), ledger: LedgerSnapshot::default() };
    let run = run_cover(&mut target, params)?;
    Ok(TriangleCover { triangles: run.triangles, ledger: target.ledger, iterations: run.iterations })
}

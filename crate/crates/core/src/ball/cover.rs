//! Learner for point sets covered by `k` monochromatic balls, using NN
//! queries only.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::relative_sample_size_with;
use crate::lift::Ball;
use crate::lp::{lp_solve, LpInstance};
use crate::oracle::{Color, LedgerSnapshot, ProximityOracle};

use super::canonical::{enumerate, Bits};
use super::mono::{known_constraints, mono_with_planes, MonoParams};
use super::{lifted_planes, Counting, LIFTED_BOX};

#[derive(Clone, Debug, PartialEq)]
pub struct KBallParams {
    pub k: usize,
    pub seed: u64,
    /// Constant of the relative-approximation sample size.
    pub c_ra: f64,
    pub mono: MonoParams,
    /// Consecutive iterations without an accepted ball before giving up.
    pub max_failures: usize,
    /// Run the mono-ball searches of an iteration one at a time.
    pub sequential: bool,
}

/// Sample constant used by the k-ball learner unless overridden.
pub const DEFAULT_KBALL_C_RA: f64 = 0.02;

impl Default for KBallParams {
    fn default() -> Self {
        KBallParams { k: 1, seed: 0, c_ra: DEFAULT_KBALL_C_RA, mono: MonoParams::default(), max_failures: 50, sequential: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverIteration {
    /// Unlabeled points when the iteration started.
    pub remaining: usize,
    pub sample: usize,
    /// Distinct canonical sets of the sample.
    pub canonical: usize,
    /// Monochromatic sets with estimate at least `1/(2k)`.
    pub eligible: usize,
    /// Oracle-backed mono-ball searches.
    pub searched: usize,
    /// Sets rejected without queries because a known opposite-color point
    /// blocks every ball around them.
    pub pruned: usize,
    pub accepted: bool,
    /// Unlabeled points inside the accepted ball.
    pub covered: usize,
    pub nn_queries: u64,
}

impl CoverIteration {
    pub fn coverage(&self) -> f64 {
        if self.remaining == 0 {
            0.0
        } else {
            self.covered as f64 / self.remaining as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCover {
    pub balls: Vec<(Ball, Color)>,
    pub labels: Vec<Color>,
    pub ledger: LedgerSnapshot,
    pub iterations: Vec<CoverIteration>,
    /// Mono-ball searches that fell back from centerpoint to the loop.
    pub fallbacks: usize,
}

impl LabeledCover {
    pub fn accepted_iterations(&self) -> usize {
        self.iterations.iter().filter(|i| i.accepted).count()
    }
}

struct Success {
    ball: Ball,
    color: Color,
    covered: Vec<usize>,
    sample_hits: Bits,
}

/// Labels every point, assuming `k` balls, each free of one color, cover the
/// points of the other color.
pub fn learn_k_ball_cover(oracle: &dyn ProximityOracle, params: &KBallParams) -> Result<LabeledCover> {
    if params.k == 0 {
        return Err(Error::Contract("k must be positive".into()));
    }
    let points = oracle.points();
    let n = points.len();
    let prox = Counting::new(oracle);
    let planes = lifted_planes(points)?;
    let p = 1.0 / (4.0 * params.k as f64);
    let target = relative_sample_size_with(0.25, p, 0.05, 3, params.c_ra)?.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut known: Vec<Option<Color>> = vec![None; n];
    let mut labels: Vec<Option<Color>> = vec![None; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut balls = Vec::new();
    let mut iterations = Vec::new();
    let mut failures = 0;
    let mut fallbacks = 0;
    let box_m = params.mono.solver.box_m.unwrap_or(LIFTED_BOX);
    let chunk = if params.sequential { 1 } else { rayon::current_num_threads().max(1) };
    while !remaining.is_empty() {
        let before = prox.ledger().nn;
        let m = target.min(remaining.len());
        let picked: Vec<usize> = sample(&mut rng, remaining.len(), m).into_iter().map(|i| remaining[i]).collect();
        let colors: Vec<Color> = picked.iter().map(|&i| *known[i].get_or_insert_with(|| prox.probe(i))).collect();
        let pts: Vec<_> = picked.iter().map(|&i| points[i]).collect();

        let mut red = Bits::new(m);
        for (j, c) in colors.iter().enumerate() {
            if *c == Color::Red {
                red.set(j);
            }
        }
        let need = (m as f64 / (2.0 * params.k as f64)).ceil() as usize;
        let mut seen = HashSet::new();
        let mut eligible: Vec<(Bits, usize, Color)> = Vec::new();
        enumerate(&pts, |_, bits| {
            if seen.contains(&bits) {
                return;
            }
            let size = bits.count();
            if size >= need.max(1) {
                let reds = if bits.intersects(&red) { bits.indices().iter().filter(|&&j| red.get(j)).count() } else { 0 };
                let color = if reds == size {
                    Some(Color::Red)
                } else if reds == 0 {
                    Some(Color::Blue)
                } else {
                    None
                };
                if let Some(c) = color {
                    eligible.push((bits.clone(), size, c));
                }
            }
            seen.insert(bits);
        });
        eligible.sort_by_key(|e| std::cmp::Reverse(e.1));

        let mut successes: Vec<Success> = Vec::new();
        let mut searched = 0;
        let mut pruned = 0;
        let mut next = 0;
        while next < eligible.len() {
            let mut batch = Vec::new();
            while batch.len() < chunk && next < eligible.len() {
                let (bits, _, color) = &eligible[next];
                next += 1;
                if successes.iter().any(|s| bits.is_subset(&s.sample_hits)) {
                    continue;
                }
                let required: Vec<usize> = bits.indices().iter().map(|&j| picked[j]).collect();
                let excluded: Vec<usize> = (0..n).filter(|&i| known[i] == Some(color.other())).collect();
                // A ball avoiding points already known to have the other
                // color must exist before any query is worth spending.
                let cons = known_constraints(points, &planes, &required, &excluded, params.mono.gamma)?;
                let lp = LpInstance { dim: 3, constraints: cons.into_iter().map(|c| c.1).collect(), objective: None, box_m: Some(box_m) };
                if lp_solve(&lp, params.seed)?.is_infeasible() {
                    pruned += 1;
                    continue;
                }
                batch.push((*color, required, excluded));
            }
            searched += batch.len();
            let run = |(color, required, excluded): &(Color, Vec<usize>, Vec<usize>)| {
                mono_with_planes(&prox, &planes, required, excluded, *color, &params.mono)
            };
            let results: Vec<Result<_>> =
                if batch.len() > 1 { batch.par_iter().map(run).collect() } else { batch.iter().map(run).collect() };
            for ((color, _, _), r) in batch.iter().zip(results) {
                let (r, revealed) = r?;
                for i in revealed {
                    known[i] = Some(color.other());
                }
                fallbacks += r.fell_back as usize;
                let Some(ball) = r.ball() else { continue };
                let covered: Vec<usize> = remaining.iter().copied().filter(|&i| ball.contains(&points[i])).collect();
                let mut hits = Bits::new(m);
                for (j, q) in pts.iter().enumerate() {
                    if ball.contains(q) {
                        hits.set(j);
                    }
                }
                successes.push(Success { ball: *ball, color: *color, covered, sample_hits: hits });
            }
        }

        let best = successes.into_iter().reduce(|a, b| if b.covered.len() > a.covered.len() { b } else { a });
        let mut record = CoverIteration {
            remaining: remaining.len(),
            sample: m,
            canonical: seen.len(),
            eligible: eligible.len(),
            searched,
            pruned,
            accepted: best.is_some(),
            covered: 0,
            nn_queries: 0,
        };
        match best {
            None => {
                failures += 1;
                record.nn_queries = prox.ledger().nn - before;
                iterations.push(record);
                if failures >= params.max_failures {
                    return Err(Error::Assumption(format!(
                        "{failures} consecutive iterations found no monochromatic ball; the points may not be coverable by {} balls",
                        params.k
                    )));
                }
            }
            Some(s) => {
                failures = 0;
                for &i in &s.covered {
                    labels[i] = Some(s.color);
                }
                remaining.retain(|&i| labels[i].is_none());
                record.covered = s.covered.len();
                record.nn_queries = prox.ledger().nn - before;
                iterations.push(record);
                balls.push((s.ball, s.color));
            }
        }
    }
    Ok(LabeledCover {
        balls,
        labels: labels.into_iter().map(|c| c.expect("every point is covered")).collect(),
        ledger: prox.ledger(),
        iterations,
        fallbacks,
    })
}

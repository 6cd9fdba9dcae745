//! Planar solver that mixes labeling queries on random samples with
//! separation queries used to keep the search polygon small.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{clip_polygon, ConvexPolygon, Hyperplane};
use crate::oracle::{LabelingOracle, Separation, SeparationOracle};
use crate::tol::tol;

use super::naive::settle;
use super::reduce::{reduce_polygon_in, PolygonReduction, MAX_EDGES};
use super::{Session, UlpResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeplabParams {
    /// Lines labeled per round.
    pub s_net: usize,
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for SeplabParams {
    fn default() -> Self {
        SeplabParams { s_net: 200, seed: 0, max_rounds: 200 }
    }
}

pub(crate) fn crosses_interior(h: &Hyperplane, poly: &ConvexPolygon) -> bool {
    let band = tol().side;
    let (mut pos, mut neg) = (false, false);
    for v in &poly.vertices {
        let e = h.eval(v);
        pos |= e > band;
        neg |= e < -band;
        if pos && neg {
            return true;
        }
    }
    false
}

/// Separation + labeling solver. `rounds` in the result lists the crossing
/// set size before each round and after the last one.
pub fn solve_ulp_seplab_2d(
    lines: &[Hyperplane],
    sep: &dyn SeparationOracle,
    label: &dyn LabelingOracle,
    params: &SeplabParams,
) -> Result<UlpResult> {
    if sep.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: sep.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut s = Session::with_labels(sep, label);
    let mut poly = ConvexPolygon::bounding_box();
    let mut crossing: Vec<usize> = (0..lines.len()).filter(|&i| crosses_interior(&lines[i], &poly)).collect();
    s.rounds.push(crossing.len());
    for _ in 0..params.max_rounds {
        if crossing.is_empty() {
            // No constraint splits the polygon, so one probe decides it.
            let Some(c) = poly.centroid() else { break };
            match s.separate(&c) {
                Separation::Feasible => return Ok(s.feasible(c)),
                Separation::Violated(v) => {
                    poly = clip_polygon(&poly, &v.halfspace);
                    if poly.is_degenerate() {
                        break;
                    }
                    continue;
                }
            }
        }
        let picks: Vec<usize> = if crossing.len() <= params.s_net {
            crossing.clone()
        } else {
            sample(&mut rng, crossing.len(), params.s_net).into_iter().map(|k| crossing[k]).collect()
        };
        for i in picks {
            let h = s.label(i)?;
            poly = clip_polygon(&poly, &h);
            if poly.is_degenerate() {
                break;
            }
        }
        if poly.is_degenerate() {
            break;
        }
        if poly.len() > MAX_EDGES {
            match reduce_polygon_in(&mut s, &poly, &mut rng) {
                PolygonReduction::Feasible(p) => return Ok(s.feasible(p)),
                PolygonReduction::Reduced(p) => poly = p,
            }
            if poly.is_degenerate() {
                break;
            }
        }
        crossing.retain(|&i| crosses_interior(&lines[i], &poly));
        s.rounds.push(crossing.len());
    }
    // The polygon vanished: confirm with the committed LP, probing its
    // solution if tolerances leave a sliver.
    settle(s, 64, params.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{QueryLedger, UlpGroundTruth, UlpOracle};
    use crate::ulp::testutil::{infeasible_2d, planted_2d};
    use crate::ulp::UlpOutcome;

    #[test]
    fn one_line() {
        let l = vec![Hyperplane::line(1.0, 0.0, 0.0).unwrap()];
        let o = UlpOracle::new(UlpGroundTruth::new(l.clone(), vec![1], None).unwrap(), QueryLedger::shared());
        let r = solve_ulp_seplab_2d(&l, &o, &o, &SeplabParams::default()).unwrap();
        assert!(r.witness().unwrap().x() >= 0.0);
        assert!(r.ledger.labeling <= 1 && r.ledger.separation <= 1);
    }

    #[test]
    fn opposing_parallel_lines() {
        let l = vec![Hyperplane::line(1.0, 0.0, 0.0).unwrap(), Hyperplane::line(1.0, 0.0, 1.0).unwrap()];
        let o = UlpOracle::new(UlpGroundTruth::new(l.clone(), vec![-1, 1], None).unwrap(), QueryLedger::shared());
        let r = solve_ulp_seplab_2d(&l, &o, &o, &SeplabParams::default()).unwrap();
        assert_eq!(r.outcome, UlpOutcome::Infeasible);
        assert_eq!(r.ledger.separation, 0);
        assert!(r.certifies_infeasible(2).unwrap());
    }

    #[test]
    fn planted_instances() {
        for seed in 0..20 {
            let (o, _) = planted_2d(1000, seed);
            let l = o.constraints().to_vec();
            let r = solve_ulp_seplab_2d(&l, &o, &o, &SeplabParams { seed, ..Default::default() }).unwrap();
            let w = r.witness().unwrap();
            assert_eq!(o.separation_query(&w).unwrap(), Separation::Feasible);
            let work: usize = r.rounds.iter().sum();
            assert!(work <= 4 * 1000, "{work}");

            let o = infeasible_2d(1000, seed);
            let l = o.constraints().to_vec();
            let r = solve_ulp_seplab_2d(&l, &o, &o, &SeplabParams { seed, ..Default::default() }).unwrap();
            assert!(!r.is_feasible());
            assert!(r.certifies_infeasible(2).unwrap());
        }
    }
}

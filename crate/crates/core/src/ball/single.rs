//! Exact label recovery when one ball separates the red points from the
//! blue ones.

use crate::error::{Error, Result};
use crate::geom::{CommittedHalfspace, Hyperplane, Point};
use crate::lift::{lifted_slack, unlift, Ball, Unlifted};
use crate::lp::{lp_solve, LpInstance};
use crate::oracle::{Color, LedgerSnapshot, ProximityOracle, Separation, SeparationOracle, Violation};
use crate::tol::tol;
use crate::ulp::{solve_ulp_centerpoint_with, CenterpointSolverParams, UlpOutcome};

use super::{lifted_center, lifted_planes, Counting, LIFTED_BOX};

#[derive(Clone, Debug, PartialEq)]
pub struct SingleBallParams {
    pub solver: CenterpointSolverParams,
}

impl Default for SingleBallParams {
    fn default() -> Self {
        SingleBallParams { solver: CenterpointSolverParams { vertex_cap: 40_000_000, box_m: Some(LIFTED_BOX), ..Default::default() } }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleBall {
    /// Ball containing exactly the red points; `None` when there are none.
    pub ball: Option<Ball>,
    pub labels: Vec<Color>,
    /// NN and FN queries of this run, boundary probes included.
    pub ledger: LedgerSnapshot,
    /// Points whose side of the lifted witness was within tolerance and
    /// needed a direct color probe.
    pub probes: usize,
    /// Separation queries made by the lifted solver.
    pub separation_calls: u64,
}

/// Lifted separation: blue NN at the center must lie outside, red FN inside.
/// Boundary contact counts as satisfied for both colors.
struct LiftedSeparation<'a> {
    prox: &'a Counting<'a>,
    planes: &'a [Hyperplane],
}

impl LiftedSeparation<'_> {
    fn include(&self, i: usize) -> Violation {
        Violation { index: i, halfspace: CommittedHalfspace { plane: self.planes[i], side: 1 } }
    }

    fn exclude(&self, i: usize) -> Violation {
        Violation { index: i, halfspace: CommittedHalfspace { plane: self.planes[i], side: -1 } }
    }

    fn red_check(&self, w: &Point, c: &Point) -> Option<Violation> {
        let f = self.prox.furthest(c, Color::Red)?;
        (self.planes[f.index].eval(w) < -tol().side).then(|| self.include(f.index))
    }

    fn blue_check(&self, w: &Point, c: &Point) -> Option<Violation> {
        let nb = self.prox.nn(c, Color::Blue)?;
        (self.planes[nb.index].eval(w) > tol().side).then(|| self.exclude(nb.index))
    }
}

impl SeparationOracle for LiftedSeparation<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn separate(&self, w: &Point) -> Separation {
        let c = lifted_center(w);
        let degenerate = matches!(unlift(w), Ok(Unlifted::Degenerate { .. }));
        let v = if degenerate {
            // An imaginary radius holds no point: any red refutes it.
            self.red_check(w, &c).or_else(|| self.blue_check(w, &c))
        } else {
            self.blue_check(w, &c).or_else(|| self.red_check(w, &c))
        };
        match v {
            Some(v) => Separation::Violated(v),
            None => Separation::Feasible,
        }
    }
}

/// Widest lifted margin ball for known labels: maximize `t` with reds at
/// normalized lifted slack `>= t` and blues at `<= -t`.
fn max_margin(planes: &[Hyperplane], labels: &[Color]) -> Result<(Point, f64)> {
    let mut cons = Vec::with_capacity(planes.len() + 1);
    for (h, c) in planes.iter().zip(labels) {
        let n = h.normal.coords();
        let (tcoef, side) = match c {
            Color::Red => (-1.0, 1),
            Color::Blue => (1.0, -1),
        };
        let plane = Hyperplane::new(Point::new(&[n[0], n[1], n[2], tcoef]), h.offset)?;
        cons.push(CommittedHalfspace::new(plane, side)?);
    }
    cons.push(CommittedHalfspace::new(Hyperplane::new(Point::new(&[0.0, 0.0, 0.0, 1.0]), 1.0)?, -1)?);
    let inst = LpInstance { dim: 4, constraints: cons, objective: Some(Point::new(&[0.0, 0.0, 0.0, -1.0])), box_m: Some(LIFTED_BOX) };
    let x = lp_solve(&inst, 0)?
        .point()
        .ok_or_else(|| Error::Diagnostic("max-margin LP has no solution".into()))?;
    let c = x.coords();
    Ok((Point::p3(c[0], c[1], c[2]), c[3]))
}

/// Learns every color with NN and FN queries, assuming a ball holds all red
/// points and no blue point.
pub fn learn_single_ball(oracle: &dyn ProximityOracle, params: &SingleBallParams) -> Result<SingleBall> {
    let prox = Counting::new(oracle);
    let points = oracle.points();
    if let Some(p) = points.iter().find(|p| p.dim() != 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: p.dim() });
    }
    let planes = lifted_planes(points)?;
    let sep = LiftedSeparation { prox: &prox, planes: &planes };
    let r = solve_ulp_centerpoint_with(&planes, &sep, 3, &params.solver, &[])?;
    let separation_calls = r.ledger.separation;
    let w = match r.outcome {
        UlpOutcome::Feasible { witness } => witness,
        UlpOutcome::Infeasible => return Err(Error::Assumption("no ball separates the red points from the blue points".into())),
    };
    // Reds have lifted slack at least that of the furthest red and blues at
    // most that of the nearest blue, both within the oracle's band.
    let widest = points.iter().map(|p| (p.dot(p) + 1.0).sqrt()).fold(1.0f64, f64::max);
    let band = 4.0 * tol().side * widest;
    let mut probes = 0;
    let labels: Vec<Color> = (0..points.len())
        .map(|i| {
            let s = lifted_slack(&points[i], &w);
            if s > band {
                Color::Red
            } else if s < -band {
                Color::Blue
            } else {
                probes += 1;
                prox.probe(i)
            }
        })
        .collect();
    let ball = if labels.contains(&Color::Red) {
        let (w, t) = max_margin(&planes, &labels)?;
        if !(t > tol().side) {
            return Err(Error::Assumption(format!("red and blue points touch every separating ball (margin {t:e})")));
        }
        match unlift(&w)? {
            Unlifted::Ball(b) => Some(b),
            Unlifted::Degenerate { .. } => return Err(Error::Diagnostic("max-margin ball has imaginary radius".into())),
        }
    } else {
        None
    };
    if let Some(b) = &ball {
        for (p, c) in points.iter().zip(&labels) {
            if b.contains(p) != (*c == Color::Red) {
                return Err(Error::Diagnostic(format!("fitted ball disagrees with the recovered label of {p:?}")));
            }
        }
    }
    Ok(SingleBall { ball, labels, ledger: prox.ledger(), probes, separation_calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_kdisks, DiskLayout};
    use crate::oracle::{ColorOracle, ColoredGroundTruth, QueryLedger};

    fn oracle(points: Vec<Point>, colors: Vec<Color>) -> ColorOracle {
        ColorOracle::new(ColoredGroundTruth::new(points, colors).unwrap(), QueryLedger::shared())
    }

    #[test]
    fn one_red_one_blue() {
        let o = oracle(vec![Point::p2(0.0, 0.0), Point::p2(5.0, 0.0)], vec![Color::Red, Color::Blue]);
        let r = learn_single_ball(&o, &SingleBallParams::default()).unwrap();
        assert_eq!(r.labels, vec![Color::Red, Color::Blue]);
        let b = r.ball.unwrap();
        assert!(b.contains(&Point::p2(0.0, 0.0)) && !b.contains(&Point::p2(5.0, 0.0)));
    }

    #[test]
    fn all_red() {
        let pts = vec![Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 1.0)];
        let o = oracle(pts.clone(), vec![Color::Red; 3]);
        let r = learn_single_ball(&o, &SingleBallParams::default()).unwrap();
        assert_eq!(r.labels, vec![Color::Red; 3]);
        assert!(pts.iter().all(|p| r.ball.unwrap().contains(p)));
    }

    #[test]
    fn all_blue() {
        let o = oracle(vec![Point::p2(0.0, 0.0), Point::p2(1.0, 0.0)], vec![Color::Blue; 2]);
        let r = learn_single_ball(&o, &SingleBallParams::default()).unwrap();
        assert_eq!(r.labels, vec![Color::Blue; 2]);
        assert!(r.ball.is_none());
    }

    #[test]
    fn blue_between_reds_is_an_assumption_violation() {
        let o = oracle(
            vec![Point::p2(-1.0, 0.0), Point::p2(0.0, 0.0), Point::p2(1.0, 0.0), Point::p2(0.0, 3.0)],
            vec![Color::Red, Color::Blue, Color::Red, Color::Blue],
        );
        let e = learn_single_ball(&o, &SingleBallParams::default()).unwrap_err();
        assert!(e.is_assumption(), "{e}");
    }

    #[test]
    fn planted_instances() {
        for seed in 0..10 {
            let inst = gen_kdisks(1, 200, 0.01, DiskLayout::Separable, seed).unwrap();
            let gt = inst.ground_truth().unwrap();
            let o = ColorOracle::new(gt, QueryLedger::shared());
            let r = learn_single_ball(&o, &SingleBallParams::default()).unwrap();
            assert_eq!(r.labels, inst.hidden.colors, "seed {seed}");
            let q = r.ledger.nn + r.ledger.fn_;
            let n = 200f64;
            assert!((q as f64) <= 8.0 * n.log2() * (n * n * n).log2(), "seed {seed}: {q} queries");
        }
    }
}

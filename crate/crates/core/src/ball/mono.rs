//! Search for a ball that holds given points of one color and no point of
//! the other color.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CommittedHalfspace, Hyperplane, Point};
use crate::lift::{exclusion_halfspace, unlift, Ball, Unlifted};
use crate::oracle::{Color, LedgerSnapshot, ProximityOracle, Separation, SeparationOracle, Violation};
use crate::tol::tol;
use crate::ulp::{solve_ulp_centerpoint_with, solve_ulp_naive_loop_with, CenterpointSolverParams, UlpOutcome, UlpResult};

use super::{lifted_center, lifted_planes, Counting, LIFTED_BOX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonoStrategy {
    /// Centerpoint filtering over the lifted arrangement of every point.
    ImplicitCenterpoint,
    /// LP, query, commit, repeat.
    CounterexampleLoop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonoParams {
    pub strategy: MonoStrategy,
    pub solver: CenterpointSolverParams,
    /// Lifted clearance required of excluded points, standing in for strict
    /// exclusion.
    pub gamma: f64,
}

impl Default for MonoParams {
    fn default() -> Self {
        MonoParams {
            strategy: MonoStrategy::ImplicitCenterpoint,
            solver: CenterpointSolverParams { box_m: Some(LIFTED_BOX), ..Default::default() },
            gamma: tol().dedup,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MonoOutcome {
    Found(Ball),
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoSearch {
    pub outcome: MonoOutcome,
    /// Strategy that produced the outcome; differs from the requested one
    /// after a fallback.
    pub strategy: MonoStrategy,
    pub fell_back: bool,
    pub ledger: LedgerSnapshot,
    /// Separation calls of the lifted solver (required-point checks are
    /// local and included here).
    pub iterations: u64,
}

impl MonoSearch {
    pub fn ball(&self) -> Option<&Ball> {
        match &self.outcome {
            MonoOutcome::Found(b) => Some(b),
            MonoOutcome::NotFound => None,
        }
    }
}

struct MonoSeparation<'a> {
    prox: &'a dyn ProximityOracle,
    planes: &'a [Hyperplane],
    required: &'a [usize],
    other: Color,
    gamma: f64,
}

impl SeparationOracle for MonoSeparation<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn separate(&self, w: &Point) -> Separation {
        let band = tol().side;
        for &i in self.required {
            if self.planes[i].eval(w) < -band {
                let halfspace = CommittedHalfspace { plane: self.planes[i], side: 1 };
                return Separation::Violated(Violation { index: i, halfspace });
            }
        }
        let Some(nb) = self.prox.nn(&lifted_center(w), self.other) else { return Separation::Feasible };
        let ex = exclusion_halfspace(&self.prox.points()[nb.index], self.gamma).expect("2D point");
        if ex.contains(w) {
            Separation::Feasible
        } else {
            Separation::Violated(Violation { index: nb.index, halfspace: ex })
        }
    }
}

fn decode(r: &UlpResult, gamma: f64) -> Result<MonoOutcome> {
    match &r.outcome {
        UlpOutcome::Infeasible => Ok(MonoOutcome::NotFound),
        UlpOutcome::Feasible { witness } => {
            // Grow by half the clearance: required points end up strictly
            // inside, excluded ones stay strictly outside.
            let w = Point::p3(witness.x(), witness.y(), witness.z() + gamma / 2.0);
            match unlift(&w)? {
                Unlifted::Ball(b) => Ok(MonoOutcome::Found(b)),
                Unlifted::Degenerate { .. } => Err(Error::Diagnostic("accepted lifted ball has imaginary radius".into())),
            }
        }
    }
}

/// Finds a ball containing `required` (indices into `oracle.points()`, all of
/// color `color`) and no point of the other color, or reports that none
/// exists. The implicit strategy falls back to the loop when the lifted
/// arrangement exceeds the vertex cap.
pub fn mono_ball_search(oracle: &dyn ProximityOracle, required: &[usize], color: Color, params: &MonoParams) -> Result<MonoSearch> {
    if required.is_empty() {
        return Err(Error::Contract("mono_ball_search needs at least one required point".into()));
    }
    let planes = lifted_planes(oracle.points())?;
    Ok(mono_with_planes(oracle, &planes, required, &[], color, params)?.0)
}

/// Lifted constraints known without a query: the required points inside,
/// the points in `excluded` (known to have the other color) outside.
pub(crate) fn known_constraints(
    points: &[Point],
    planes: &[Hyperplane],
    required: &[usize],
    excluded: &[usize],
    gamma: f64,
) -> Result<Vec<(usize, CommittedHalfspace)>> {
    let mut out: Vec<(usize, CommittedHalfspace)> =
        required.iter().map(|&i| (i, CommittedHalfspace { plane: planes[i], side: 1 })).collect();
    for &i in excluded {
        out.push((i, exclusion_halfspace(&points[i], gamma)?));
    }
    Ok(out)
}

/// Search with extra constraints known in advance. Also returns the points
/// the oracle revealed to have the other color.
pub(crate) fn mono_with_planes(
    oracle: &dyn ProximityOracle,
    planes: &[Hyperplane],
    required: &[usize],
    excluded: &[usize],
    color: Color,
    params: &MonoParams,
) -> Result<(MonoSearch, Vec<usize>)> {
    let prox = Counting::new(oracle);
    let sep = MonoSeparation { prox: &prox, planes, required, other: color.other(), gamma: params.gamma };
    let includes = known_constraints(oracle.points(), planes, required, excluded, params.gamma)?;
    let mut fell_back = false;
    let mut strategy = params.strategy;
    let r = loop {
        match strategy {
            MonoStrategy::ImplicitCenterpoint => {
                let pre: Vec<CommittedHalfspace> = includes.iter().map(|c| c.1).collect();
                match solve_ulp_centerpoint_with(planes, &sep, 3, &params.solver, &pre) {
                    Err(Error::Capacity { .. }) => {
                        fell_back = true;
                        strategy = MonoStrategy::CounterexampleLoop;
                    }
                    r => break r?,
                }
            }
            MonoStrategy::CounterexampleLoop => {
                let m = params.solver.box_m.unwrap_or(LIFTED_BOX);
                break solve_ulp_naive_loop_with(&sep, &includes, 4 * planes.len().max(1), params.solver.seed, m)?;
            }
        }
    };
    let revealed = r.committed.iter().filter(|c| c.halfspace.side < 0).map(|c| c.index).collect();
    let search = MonoSearch { outcome: decode(&r, params.gamma)?, strategy, fell_back, ledger: prox.ledger(), iterations: r.ledger.separation };
    Ok((search, revealed))
}

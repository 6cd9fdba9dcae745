//! Undecided LP solvers.
//!
//! Every solver sees the constraint hyperplanes but not their sides, and
//! learns sides only through oracle calls. A run ends either with a point
//! the separation oracle accepted, or with a committed subset of constraints
//! whose LP (inside the bounding box) is empty.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::geom::{CommittedHalfspace, Hyperplane, Point};
use crate::lp::{lp_solve, LpInstance, LpResult};
use crate::oracle::{LabelingOracle, LedgerSnapshot, Separation, SeparationOracle, Violation};
use crate::tol::tol;
use crate::Result;

mod centerpoint;
mod cutting;
mod naive;
mod oned;
mod reduce;
mod seplab;

pub use centerpoint::{
    arrangement_vertices_3d, solve_ulp_centerpoint, solve_ulp_centerpoint_with, CenterpointSolverParams,
};
pub use cutting::{build_cutting_2d, solve_ulp_cutting_2d, CuttingCell, CuttingParams};
pub use naive::{solve_ulp_naive_loop, solve_ulp_naive_loop_with};
pub use oned::{solve_ulp_1d, solve_ulp_1d_with, LineQuery, Outcome1d};
pub use reduce::{reduce_point_set, reduce_polygon, PointSetReduction, PolygonReduction};
pub use seplab::{solve_ulp_seplab_2d, SeplabParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum UlpOutcome {
    Feasible { witness: Point },
    Infeasible,
}

/// A constraint whose side an oracle revealed, with its index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Committed {
    pub index: usize,
    pub halfspace: CommittedHalfspace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlpResult {
    pub outcome: UlpOutcome,
    pub committed: Vec<Committed>,
    /// Calls made by this run only.
    pub ledger: LedgerSnapshot,
    /// Size of the active constraint set at each round or recursion level.
    pub rounds: Vec<usize>,
}

impl UlpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, UlpOutcome::Feasible { .. })
    }

    pub fn witness(&self) -> Option<Point> {
        match self.outcome {
            UlpOutcome::Feasible { witness } => Some(witness),
            UlpOutcome::Infeasible => None,
        }
    }

    pub fn committed_halfspaces(&self) -> Vec<CommittedHalfspace> {
        self.committed.iter().map(|c| c.halfspace).collect()
    }

    /// Re-solves the committed LP inside the box; `true` when it is empty.
    pub fn certifies_infeasible(&self, dim: usize) -> Result<bool> {
        let inst = LpInstance { dim, constraints: self.committed_halfspaces(), objective: None, box_m: Some(tol().box_m) };
        Ok(lp_solve(&inst, 0)?.is_infeasible())
    }
}

/// Oracle wrapper that counts this run's calls and keeps the committed set.
pub(crate) struct Session<'a> {
    sep: &'a dyn SeparationOracle,
    label: Option<&'a dyn LabelingOracle>,
    sep_calls: Cell<u64>,
    label_calls: Cell<u64>,
    pub committed: Vec<Committed>,
    seen: std::collections::HashSet<usize>,
    pub rounds: Vec<usize>,
    box_m: f64,
}

impl<'a> Session<'a> {
    pub fn new(sep: &'a dyn SeparationOracle) -> Session<'a> {
        Session {
            sep,
            label: None,
            sep_calls: Cell::new(0),
            label_calls: Cell::new(0),
            committed: Vec::new(),
            seen: Default::default(),
            rounds: Vec::new(),
            box_m: tol().box_m,
        }
    }

    pub fn with_box(mut self, m: f64) -> Session<'a> {
        self.box_m = m;
        self
    }

    pub fn with_labels(sep: &'a dyn SeparationOracle, label: &'a dyn LabelingOracle) -> Session<'a> {
        let mut s = Session::new(sep);
        s.label = Some(label);
        s
    }

    pub fn dim(&self) -> usize {
        self.sep.dim()
    }

    pub fn commit(&mut self, v: Violation) -> bool {
        if self.seen.insert(v.index) {
            self.committed.push(Committed { index: v.index, halfspace: v.halfspace });
            true
        } else {
            false
        }
    }

    /// Separation query; a violated answer is added to the committed set.
    pub fn separate(&mut self, p: &Point) -> Separation {
        self.sep_calls.set(self.sep_calls.get() + 1);
        let s = self.sep.separate(p);
        if let Separation::Violated(v) = s {
            self.commit(v);
        }
        s
    }

    pub fn label(&mut self, index: usize) -> Result<CommittedHalfspace> {
        let o = self.label.expect("session has no labeling oracle");
        self.label_calls.set(self.label_calls.get() + 1);
        let h = o.label(index)?;
        self.commit(Violation { index, halfspace: h });
        Ok(h)
    }

    pub fn committed_halfspaces(&self) -> Vec<CommittedHalfspace> {
        self.committed.iter().map(|c| c.halfspace).collect()
    }

    /// LP over the committed set inside the box.
    pub fn committed_lp(&self, seed: u64) -> Result<LpResult> {
        let inst = LpInstance { dim: self.dim(), constraints: self.committed_halfspaces(), objective: None, box_m: Some(self.box_m) };
        lp_solve(&inst, seed)
    }

    pub fn ledger(&self) -> LedgerSnapshot {
        LedgerSnapshot { separation: self.sep_calls.get(), labeling: self.label_calls.get(), ..Default::default() }
    }

    pub fn finish(self, outcome: UlpOutcome) -> UlpResult {
        let ledger = self.ledger();
        UlpResult { outcome, committed: self.committed, ledger, rounds: self.rounds }
    }

    pub fn feasible(self, witness: Point) -> UlpResult {
        self.finish(UlpOutcome::Feasible { witness })
    }

    pub fn infeasible(self) -> UlpResult {
        self.finish(UlpOutcome::Infeasible)
    }
}

/// Plane as `(normal, offset)` arrays for the fixed-size kernels.
pub(crate) fn plane_arrays<const D: usize>(h: &Hyperplane) -> ([f64; D], f64) {
    (h.normal.to_array(), h.offset)
}

/// Committed halfspace as `a . x >= b` arrays.
pub(crate) fn geq_arrays<const D: usize>(h: &CommittedHalfspace) -> ([f64; D], f64) {
    let (a, b) = h.as_geq();
    (a.to_array(), b)
}

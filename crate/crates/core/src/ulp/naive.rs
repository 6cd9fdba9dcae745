//! The counterexample loop: solve the committed LP, ask the oracle about
//! its solution, commit the violated constraint, repeat.

use crate::error::{Error, Result};
use crate::lp::LpResult;
use crate::geom::CommittedHalfspace;
use crate::oracle::{Separation, SeparationOracle, Violation};

use super::{Session, UlpResult};

/// Runs the loop on an existing session for at most `max_iters` rounds.
pub(crate) fn settle(mut s: Session, max_iters: usize, seed: u64) -> Result<UlpResult> {
    for it in 0..max_iters {
        let p = match s.committed_lp(seed.wrapping_add(it as u64))? {
            LpResult::Optimal(p) => p,
            LpResult::Infeasible { .. } => return Ok(s.infeasible()),
            LpResult::Unbounded => return Err(Error::Diagnostic("bounded committed LP reported unbounded".into())),
        };
        let known = s.committed.len();
        match s.separate(&p) {
            Separation::Feasible => return Ok(s.feasible(p)),
            // A repeat means the LP point sits inside the tolerance band of
            // a constraint it was asked to satisfy.
            Separation::Violated(v) if s.committed.len() == known => {
                return Err(Error::Diagnostic(format!(
                    "LP witness {p:?} violates already committed constraint {}",
                    v.index
                )))
            }
            Separation::Violated(_) => {}
        }
    }
    Err(Error::Diagnostic(format!("counterexample loop hit its cap of {max_iters} iterations")))
}

/// Counterexample loop from scratch; `max_iters` caps the oracle calls.
pub fn solve_ulp_naive_loop(oracle: &dyn SeparationOracle, max_iters: usize, seed: u64) -> Result<UlpResult> {
    settle(Session::new(oracle), max_iters, seed)
}

/// Counterexample loop inside the box `[-box_m, box_m]^d`, starting from
/// constraints whose sides are already known; they count as committed but
/// cost no query.
pub fn solve_ulp_naive_loop_with(
    oracle: &dyn SeparationOracle,
    known: &[(usize, CommittedHalfspace)],
    max_iters: usize,
    seed: u64,
    box_m: f64,
) -> Result<UlpResult> {
    let mut s = Session::new(oracle).with_box(box_m);
    for &(index, halfspace) in known {
        s.commit(Violation { index, halfspace });
    }
    settle(s, max_iters, seed)
}

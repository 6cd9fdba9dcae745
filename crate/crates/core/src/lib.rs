//! Oracle-driven geometric learning.
//!
//! The crate solves undecided linear programs (hyperplanes whose feasible
//! side is hidden behind a separation or labeling oracle), learns the hidden
//! colors of planar point sets through nearest/furthest-neighbour and
//! triangle oracles, and simplifies sampled terrains through a
//! triangle-validation oracle. Every oracle counts its calls in a
//! [`QueryLedger`], which is the main measured output.
//!
//! Solvers never see hidden data directly: they receive oracle handles, and
//! the ground truth types expose their hidden fields only to white-box
//! verification code.

// `!(x > 0.0)` is used on purpose so that NaN fails the check, and the
// index loops follow the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ball;
pub mod error;
pub mod geom;
pub mod instances;
pub mod lift;
pub mod lp;
pub mod oracle;
pub mod terrain;
pub mod tol;
pub mod triangle;
pub mod ulp;

pub use error::{Error, Result};
pub use geom::{side_of, CommittedHalfspace, ConvexPolygon, Hyperplane, Point};
pub use lift::{lift_ball, lift_point, unlift, Ball, Unlifted};
pub use lp::{lp_solve, LpInstance, LpResult};
pub use oracle::{Color, OracleKind, QueryLedger};
pub use tol::{tol, Tolerances};

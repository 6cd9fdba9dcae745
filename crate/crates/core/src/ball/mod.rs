//! Ball learners over hidden two-color point sets.
//!
//! Point locations are public; colors are reached only through nearest and
//! furthest neighbor queries. Both learners lift the plane to the paraboloid
//! so that "ball contains point" becomes a halfspace constraint on the
//! lifted ball.

mod canonical;
mod cover;
mod mono;
mod single;

use std::sync::atomic::{AtomicU64, Ordering};

pub use canonical::{canonical_disk_sets, canonical_disk_sets_colored, CanonicalDiskSet};
pub use cover::{learn_k_ball_cover, CoverIteration, KBallParams, LabeledCover, DEFAULT_KBALL_C_RA};
pub use mono::{mono_ball_search, MonoOutcome, MonoParams, MonoSearch, MonoStrategy};
pub use single::{learn_single_ball, SingleBall, SingleBallParams};

use crate::error::Result;
use crate::geom::{Hyperplane, Point};
use crate::lift::lift_point;
use crate::oracle::{Color, LedgerSnapshot, Neighbor, ProximityOracle};

/// Half-width of the lifted search box. Lifted coordinates are `2c` and
/// `r^2 - |c|^2`, so this admits centers up to 500 away at unit data scale
/// while keeping squared distances well inside double precision.
pub const LIFTED_BOX: f64 = 1e3;

/// Proximity oracle wrapper with run-local query counters.
pub(crate) struct Counting<'a> {
    inner: &'a dyn ProximityOracle,
    nn: AtomicU64,
    fn_: AtomicU64,
}

impl<'a> Counting<'a> {
    pub fn new(inner: &'a dyn ProximityOracle) -> Counting<'a> {
        Counting { inner, nn: AtomicU64::new(0), fn_: AtomicU64::new(0) }
    }

    pub fn ledger(&self) -> LedgerSnapshot {
        LedgerSnapshot { nn: self.nn.load(Ordering::Relaxed), fn_: self.fn_.load(Ordering::Relaxed), ..Default::default() }
    }

    /// Color of `points()[i]` by a zero-distance nearest-red probe.
    pub fn probe(&self, i: usize) -> Color {
        let p = self.inner.points()[i];
        match self.nn(&p, Color::Red) {
            Some(nb) if nb.distance == 0.0 => Color::Red,
            _ => Color::Blue,
        }
    }
}

impl ProximityOracle for Counting<'_> {
    fn points(&self) -> &[Point] {
        self.inner.points()
    }

    fn nn(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.nn.fetch_add(1, Ordering::Relaxed);
        self.inner.nn(q, color)
    }

    fn furthest(&self, q: &Point, color: Color) -> Option<Neighbor> {
        self.fn_.fetch_add(1, Ordering::Relaxed);
        self.inner.furthest(q, color)
    }
}

pub(crate) fn lifted_planes(points: &[Point]) -> Result<Vec<Hyperplane>> {
    points.iter().map(lift_point).collect()
}

/// Center of the ball encoded by lifted point `w`.
pub(crate) fn lifted_center(w: &Point) -> Point {
    Point::p2(w.x() / 2.0, w.y() / 2.0)
}

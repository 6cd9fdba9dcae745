//! The two reduction subroutines: shrink a point set or a polygon with a
//! few separation queries at centerpoints.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::centerpoint::{approx_centerpoint_d, depth_2d};
use crate::geom::{clip_polygon, CommittedHalfspace, ConvexPolygon, Point};
use crate::oracle::{LedgerSnapshot, Separation, SeparationOracle};

use super::centerpoint::{filter_loop, CenterpointSolverParams, FilterEnd};
use super::Session;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PointSetReduction {
    Feasible(Point),
    /// Halfspaces whose intersection contains the feasible region and none
    /// of the input points.
    AvoidingPolytope(Vec<CommittedHalfspace>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PolygonReduction {
    Feasible(Point),
    /// Sub-polygon with at most 10 edges that still contains the feasible
    /// part of the input. Empty when that part is empty.
    Reduced(ConvexPolygon),
}

/// Queries centerpoints of the surviving points until every point is ruled
/// out by a revealed constraint or a query lands in the feasible region.
pub fn reduce_point_set(
    points: &[Point],
    oracle: &dyn SeparationOracle,
    dim: usize,
    seed: u64,
) -> Result<(PointSetReduction, LedgerSnapshot)> {
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }
    let params = CenterpointSolverParams { seed, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Session::new(oracle);
    let end = match dim {
        2 => filter_loop(&mut s, points.iter().map(|p| p.to_array::<2>()).collect(), points.len(), &params, &mut rng),
        3 => filter_loop(&mut s, points.iter().map(|p| p.to_array::<3>()).collect(), points.len(), &params, &mut rng),
        d => return Err(Error::UnsupportedDimension(d)),
    };
    let ledger = s.ledger();
    Ok(match end {
        FilterEnd::Feasible(p) => (PointSetReduction::Feasible(p), ledger),
        FilterEnd::Exhausted => (PointSetReduction::AvoidingPolytope(s.committed_halfspaces()), ledger),
    })
}

pub(crate) const MAX_EDGES: usize = 10;

/// A deep point among the polygon's vertices: the best of the area
/// centroid, the vertex centroid and a few Radon-tree candidates.
fn deep_point(poly: &ConvexPolygon, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let v: Vec<[f64; 2]> = poly.vertices.iter().map(|p| p.to_array()).collect();
    let mut cands = vec![crate::geom::vec::centroid(&v)];
    if let Some(c) = poly.centroid() {
        cands.push(c.to_array());
    }
    cands.push(approx_centerpoint_d(&v, rng, &Default::default()));
    cands.into_iter().max_by_key(|c| depth_2d(c, &v)).unwrap()
}

pub(crate) fn reduce_polygon_in(s: &mut Session, poly: &ConvexPolygon, rng: &mut ChaCha8Rng) -> PolygonReduction {
    let mut poly = poly.clone();
    // Each cut removes at least the depth of the query point, so the vertex
    // count falls geometrically; the cap only guards degenerate input.
    let cap = 4 * poly.len() + 16;
    for _ in 0..cap {
        if poly.len() <= MAX_EDGES {
            break;
        }
        let c = Point::from_array(deep_point(&poly, rng));
        match s.separate(&c) {
            Separation::Feasible => return PolygonReduction::Feasible(c),
            Separation::Violated(v) => poly = clip_polygon(&poly, &v.halfspace),
        }
        if poly.is_degenerate() {
            return PolygonReduction::Reduced(ConvexPolygon::empty());
        }
    }
    PolygonReduction::Reduced(poly)
}

/// Cuts a convex polygon down to at most 10 edges with separation queries
/// at deep points of its vertex set.
pub fn reduce_polygon(
    poly: &ConvexPolygon,
    oracle: &dyn SeparationOracle,
    seed: u64,
) -> Result<(PolygonReduction, LedgerSnapshot)> {
    if oracle.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: oracle.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Session::new(oracle);
    let r = reduce_polygon_in(&mut s, poly, &mut rng);
    Ok((r, s.ledger()))
}

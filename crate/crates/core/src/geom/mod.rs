//! Points, hyperplanes and committed halfspaces, plus the planar and
//! sampling primitives built on them.

pub(crate) mod arrangement;
pub(crate) mod centerpoint;
mod hull;
mod polygon;
mod radon;
mod sampling;
mod tri;
pub mod vec;

pub use arrangement::{arrangement_vertices_2d, dedup_points};
pub use centerpoint::{
    approx_centerpoint, approx_centerpoint_with, tukey_depth, tukey_depth_2d, CenterpointParams,
};
pub use hull::{convex_hull_2d, Hull, HullKind};
pub use polygon::{clip_polygon, ConvexPolygon};
pub use radon::radon_point;
pub use sampling::{relative_sample_size, relative_sample_size_with, DEFAULT_C_RA};
pub use tri::Triangle2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::tol;

/// Largest ambient dimension any routine accepts (the LP goes up to 4).
pub const MAX_DIM: usize = 4;

/// A point in `R^d` for `1 <= d <= 4`, stored inline.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Point {
    c: [f64; MAX_DIM],
    d: u8,
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::try_new(&v)
    }
}

impl Point {
    /// Builds a point, panicking on an unsupported dimension.
    pub fn new(coords: &[f64]) -> Point {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "point dimension {} out of range",
            coords.len()
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { c, d: coords.len() as u8 }
    }

    pub fn try_new(coords: &[f64]) -> Result<Point> {
        if !(1..=MAX_DIM).contains(&coords.len()) {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("non-finite coordinate".into()));
        }
        Ok(Point::new(coords))
    }

    pub fn p2(x: f64, y: f64) -> Point {
        Point { c: [x, y, 0.0, 0.0], d: 2 }
    }

    pub fn p3(x: f64, y: f64, z: f64) -> Point {
        Point { c: [x, y, z, 0.0], d: 3 }
    }

    pub fn zeros(d: usize) -> Point {
        assert!((1..=MAX_DIM).contains(&d));
        Point { c: [0.0; MAX_DIM], d: d as u8 }
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn unit(d: usize, i: usize) -> Point {
        let mut p = Point::zeros(d);
        p.c[i] = 1.0;
        p
    }

    pub fn from_array<const D: usize>(a: [f64; D]) -> Point {
        Point::new(&a)
    }

    /// Copies the leading `D` coordinates into a fixed array.
    pub fn to_array<const D: usize>(&self) -> [f64; D] {
        debug_assert_eq!(D, self.dim());
        let mut a = [0.0; D];
        a.copy_from_slice(&self.c[..D]);
        a
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.c[..self.d as usize]
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.c[0]
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.c[1]
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.c[2]
    }

    #[inline]
    pub fn dot(&self, o: &Point) -> f64 {
        debug_assert_eq!(self.d, o.d);
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2] + self.c[3] * o.c[3]
    }

    pub fn add(&self, o: &Point) -> Point {
        let mut r = *self;
        for i in 0..MAX_DIM {
            r.c[i] += o.c[i];
        }
        r
    }

    pub fn sub(&self, o: &Point) -> Point {
        let mut r = *self;
        for i in 0..MAX_DIM {
            r.c[i] -= o.c[i];
        }
        r
    }

    pub fn scale(&self, s: f64) -> Point {
        let mut r = *self;
        for i in 0..MAX_DIM {
            r.c[i] *= s;
        }
        r
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, o: &Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn dist2(&self, o: &Point) -> f64 {
        let d = self.sub(o);
        d.dot(&d)
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// Average of a nonempty list of points.
    pub fn centroid(points: &[Point]) -> Point {
        assert!(!points.is_empty());
        let mut acc = Point::zeros(points[0].dim());
        for p in points {
            acc = acc.add(p);
        }
        acc.scale(1.0 / points.len() as f64)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

/// The locus `{x : normal . x = offset}` with a unit-length normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Point,
    pub offset: f64,
}

impl Hyperplane {
    /// Normalizes `normal` to unit length and scales `offset` with it.
    pub fn new(normal: Point, offset: f64) -> Result<Hyperplane> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(Error::Contract("hyperplane normal must be nonzero and finite".into()));
        }
        Ok(Hyperplane { normal: normal.scale(1.0 / n), offset: offset / n })
    }

    /// Line `a x + b y = c` in the plane.
    pub fn line(a: f64, b: f64, c: f64) -> Result<Hyperplane> {
        Hyperplane::new(Point::p2(a, b), c)
    }

    /// Line through two distinct points; the positive side is to the left
    /// of the direction `p -> q`.
    pub fn through(p: &Point, q: &Point) -> Result<Hyperplane> {
        let dx = q.x() - p.x();
        let dy = q.y() - p.y();
        Hyperplane::line(-dy, dx, -dy * p.x() + dx * p.y())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// Signed distance `normal . p - offset`.
    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Same plane with the opposite orientation.
    pub fn flipped(&self) -> Hyperplane {
        Hyperplane { normal: self.normal.scale(-1.0), offset: -self.offset }
    }

    /// Sign of `eval(p)` with the `tol().side` band reported as zero.
    #[inline]
    pub fn side(&self, p: &Point) -> i8 {
        sign_with(self.eval(p), tol().side)
    }
}

#[inline]
pub(crate) fn sign_with(v: f64, band: f64) -> i8 {
    if v > band {
        1
    } else if v < -band {
        -1
    } else {
        0
    }
}

/// Side of `p` relative to `plane`: +1, -1, or 0 inside the tolerance band.
pub fn side_of(plane: &Hyperplane, p: &Point) -> Result<i8> {
    if plane.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: plane.dim(), got: p.dim() });
    }
    Ok(plane.side(p))
}

/// A hyperplane whose feasible side has been revealed:
/// `{x : side * (normal . x - offset) >= 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommittedHalfspace {
    pub plane: Hyperplane,
    pub side: i8,
}

impl CommittedHalfspace {
    pub fn new(plane: Hyperplane, side: i8) -> Result<CommittedHalfspace> {
        if side != 1 && side != -1 {
            return Err(Error::Contract(format!("side must be +1 or -1, got {side}")));
        }
        Ok(CommittedHalfspace { plane, side })
    }

    /// `a x + b y >= c` in the plane.
    pub fn geq(a: f64, b: f64, c: f64) -> CommittedHalfspace {
        CommittedHalfspace { plane: Hyperplane::line(a, b, c).expect("nonzero normal"), side: 1 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.plane.dim()
    }

    /// Signed slack; nonnegative on the feasible side.
    #[inline]
    pub fn value(&self, p: &Point) -> f64 {
        self.side as f64 * self.plane.eval(p)
    }

    /// Boundary-inclusive membership within the side tolerance.
    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        self.value(p) >= -tol().side
    }

    #[inline]
    pub fn violated_by(&self, p: &Point) -> bool {
        !self.contains(p)
    }

    /// Inward normal (pointing into the feasible side).
    pub fn inward_normal(&self) -> Point {
        self.plane.normal.scale(self.side as f64)
    }

    /// The halfspace in the form `a . x >= b`.
    pub fn as_geq(&self) -> (Point, f64) {
        (self.inward_normal(), self.side as f64 * self.plane.offset)
    }

    /// The four (or 2d) halfspaces of the box `[-m, m]^d`.
    pub fn box_halfspaces(d: usize, m: f64) -> Vec<CommittedHalfspace> {
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = Point::zeros(d);
            e.c[i] = 1.0;
            out.push(CommittedHalfspace { plane: Hyperplane { normal: e, offset: -m }, side: 1 });
            out.push(CommittedHalfspace { plane: Hyperplane { normal: e, offset: m }, side: -1 });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn side_of_examples() {
        let h = Hyperplane::line(1.0, 0.0, 0.0).unwrap();
        assert_eq!(side_of(&h, &Point::p2(3.0, 5.0)).unwrap(), 1);
        assert_eq!(side_of(&h, &Point::p2(-2.0, 1.0)).unwrap(), -1);
        assert_eq!(side_of(&h, &Point::p2(0.0, 7.0)).unwrap(), 0);
    }

    #[test]
    fn side_of_rejects_dimension_mismatch() {
        let h = Hyperplane::line(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            side_of(&h, &Point::p3(0.0, 0.0, 0.0)),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn hyperplane_is_normalized() {
        let h = Hyperplane::line(3.0, 4.0, 10.0).unwrap();
        assert!((h.normal.norm() - 1.0).abs() < 1e-15);
        assert!((h.offset - 2.0).abs() < 1e-15);
        assert!(Hyperplane::line(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn committed_side_must_be_unit() {
        let h = Hyperplane::line(1.0, 0.0, 0.0).unwrap();
        assert!(CommittedHalfspace::new(h, 0).is_err());
        assert!(CommittedHalfspace::new(h, -1).is_ok());
    }

    #[test]
    fn point_serde_is_a_plain_array() {
        let p = Point::p2(1.5, -2.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let q: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Point>("[1,2,3,4,5]").is_err());
    }

    proptest! {
        #[test]
        fn side_is_antisymmetric(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64,
                                 x in -10.0..10.0f64, y in -10.0..10.0f64) {
            prop_assume!(a.abs() + b.abs() > 1e-3);
            let h = Hyperplane::line(a, b, c).unwrap();
            let p = Point::p2(x, y);
            let s = side_of(&h, &p).unwrap();
            let t = side_of(&h.flipped(), &p).unwrap();
            if s != 0 {
                prop_assert_eq!(s, -t);
            }
        }
    }
}

//! Disk and point lifting.
//!
//! A ball `(c, r)` in `R^d` maps to the point `(2c, r^2 - |c|^2)` in
//! `R^{d+1}` and a point `q` maps to the hyperplane
//! `z = -q . x + |q|^2`. The lifted ball lies on or above the lifted point's
//! plane exactly when `q` is in the ball, so ball containment becomes a
//! halfspace test one dimension up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CommittedHalfspace, Hyperplane, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Ball> {
        if !(radius >= 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::Contract("ball radius must be finite and nonnegative".into()));
        }
        Ok(Ball { center, radius })
    }

    /// Closed containment with an absolute slack on the squared distance.
    pub fn contains_with(&self, q: &Point, slack: f64) -> bool {
        self.center.dist2(q) <= self.radius * self.radius + slack
    }

    pub fn contains(&self, q: &Point) -> bool {
        self.contains_with(q, 0.0)
    }
}

/// Result of decoding a lifted point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Unlifted {
    Ball(Ball),
    /// The decoded squared radius is negative: the ball contains nothing.
    Degenerate { center: Point, radius2: f64 },
}

fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

pub fn lift_ball(b: &Ball) -> Result<Point> {
    let d = b.center.dim();
    check_dim(d)?;
    let c = b.center.coords();
    let mut w = [0.0; 4];
    for i in 0..d {
        w[i] = 2.0 * c[i];
    }
    w[d] = b.radius * b.radius - b.center.dot(&b.center);
    Ok(Point::new(&w[..d + 1]))
}

/// The plane `z = -q . x + |q|^2`, oriented so that "above" is positive.
pub fn lift_point(q: &Point) -> Result<Hyperplane> {
    let d = q.dim();
    check_dim(d)?;
    let mut n = [0.0; 4];
    n[..d].copy_from_slice(q.coords());
    n[d] = 1.0;
    Hyperplane::new(Point::new(&n[..d + 1]), q.dot(q))
}

pub fn unlift(w: &Point) -> Result<Unlifted> {
    let d1 = w.dim();
    if d1 != 3 && d1 != 4 {
        return Err(Error::UnsupportedDimension(d1));
    }
    let d = d1 - 1;
    let c: Vec<f64> = w.coords()[..d].iter().map(|v| v / 2.0).collect();
    let center = Point::new(&c);
    let r2 = w.coords()[d] + center.dot(&center);
    if r2 < 0.0 {
        return Ok(Unlifted::Degenerate { center, radius2: r2 });
    }
    Ok(Unlifted::Ball(Ball { center, radius: r2.sqrt() }))
}

/// Unnormalized lifted slack `r^2 - |q - c|^2` of point `q` against the
/// lifted ball `w`.
pub fn lifted_slack(q: &Point, w: &Point) -> f64 {
    let d = q.dim();
    let wc = w.coords();
    let mut s = wc[d] - q.dot(q);
    for i in 0..d {
        s += q.coords()[i] * wc[i];
    }
    s
}

/// Lifted constraint "the ball contains `q`".
pub fn inclusion_halfspace(q: &Point) -> Result<CommittedHalfspace> {
    Ok(CommittedHalfspace { plane: lift_point(q)?, side: 1 })
}

/// Lifted constraint "`q` is at squared distance at least `r^2 + gamma`
/// from the center", i.e. strictly outside the closed ball when `gamma > 0`.
pub fn exclusion_halfspace(q: &Point, gamma: f64) -> Result<CommittedHalfspace> {
    let d = q.dim();
    check_dim(d)?;
    let mut n = [0.0; 4];
    n[..d].copy_from_slice(q.coords());
    n[d] = 1.0;
    let plane = Hyperplane::new(Point::new(&n[..d + 1]), q.dot(q) - gamma)?;
    Ok(CommittedHalfspace { plane, side: -1 })
}

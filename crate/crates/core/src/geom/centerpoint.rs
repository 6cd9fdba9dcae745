//! Approximate centerpoints by the iterated-Radon tree, and Tukey depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::radon::radon_point_d;
use super::vec::{coordinate_median, dot, sub};
use super::Point;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterpointParams {
    /// Slack below the `1/(d+1)^2` depth target.
    pub eps_cp: f64,
    /// Failure probability the tree size is meant to cover.
    pub delta_cp: f64,
    /// Extra attempts when verification rejects a candidate.
    pub restarts: usize,
    /// Inputs up to this size have the result's depth checked.
    pub verify_limit: usize,
    /// Upper bound on the number of tree leaves.
    pub max_leaves: usize,
}

impl Default for CenterpointParams {
    fn default() -> Self {
        CenterpointParams { eps_cp: 0.02, delta_cp: 0.05, restarts: 3, verify_limit: 500, max_leaves: 16_384 }
    }
}

impl CenterpointParams {
    /// Depth fraction a verified candidate must reach.
    pub fn target_fraction(&self, d: usize) -> f64 {
        (1.0 / ((d + 1) * (d + 1)) as f64 - self.eps_cp).max(0.0)
    }
}

/// Exact planar Tukey depth of `q` (closed halfplanes through `q`).
pub fn tukey_depth_2d(q: &Point, pts: &[Point]) -> usize {
    let a: Vec<[f64; 2]> = pts.iter().map(|p| [p.x(), p.y()]).collect();
    depth_2d(&[q.x(), q.y()], &a)
}

pub(crate) fn depth_2d(q: &[f64; 2], pts: &[[f64; 2]]) -> usize {
    let mut same = 0usize;
    let mut ang: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        if dx.abs() <= 1e-15 && dy.abs() <= 1e-15 {
            same += 1;
        } else {
            ang.push(dy.atan2(dx));
        }
    }
    let m = ang.len();
    if m == 0 {
        return same;
    }
    ang.sort_by(f64::total_cmp);
    // Largest number of directions inside a half-open window [a, a + pi).
    let pi = std::f64::consts::PI;
    let eps = 1e-12;
    let mut best = 0usize;
    let mut j = 0usize;
    for i in 0..m {
        if j < i {
            j = i;
        }
        while j < i + m {
            let a = if j < m { ang[j] } else { ang[j - m] + 2.0 * pi };
            if a < ang[i] + pi - eps {
                j += 1;
            } else {
                break;
            }
        }
        best = best.max(j - i);
    }
    same + (m - best)
}

fn fib_sphere(k: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..k)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
            let r = (1.0 - y * y).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), y, r * t.sin()]
        })
        .collect()
}

/// Depth in 1D and 2D is exact; in 3D it is the minimum over a fixed set of
/// 256 directions, i.e. an upper bound on the true depth.
pub(crate) fn depth_d<const D: usize>(q: &[f64; D], pts: &[[f64; D]]) -> usize {
    match D {
        1 => {
            let le = pts.iter().filter(|p| p[0] <= q[0]).count();
            let ge = pts.iter().filter(|p| p[0] >= q[0]).count();
            le.min(ge)
        }
        2 => {
            let q2 = [q[0], q[1]];
            let p2: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
            depth_2d(&q2, &p2)
        }
        _ => {
            let mut best = pts.len();
            for u in fib_sphere(256) {
                let mut dir = [0.0; D];
                dir[..D.min(3)].copy_from_slice(&u[..D.min(3)]);
                let mut pos = 0;
                let mut neg = 0;
                for p in pts {
                    let v = dot(&sub(p, q), &dir);
                    if v >= 0.0 {
                        pos += 1;
                    }
                    if v <= 0.0 {
                        neg += 1;
                    }
                }
                best = best.min(pos).min(neg);
            }
            best
        }
    }
}

/// Tukey depth of `q` among `pts` (exact up to dimension 2).
pub fn tukey_depth(q: &Point, pts: &[Point]) -> Result<usize> {
    let d = q.dim();
    if pts.iter().any(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: pts.iter().find(|p| p.dim() != d).unwrap().dim() });
    }
    Ok(match d {
        1 => depth_d::<1>(&q.to_array(), &pts.iter().map(|p| p.to_array()).collect::<Vec<_>>()),
        2 => depth_d::<2>(&q.to_array(), &pts.iter().map(|p| p.to_array()).collect::<Vec<_>>()),
        3 => depth_d::<3>(&q.to_array(), &pts.iter().map(|p| p.to_array()).collect::<Vec<_>>()),
        _ => return Err(Error::UnsupportedDimension(d)),
    })
}

fn radon_tree<const D: usize, R: Rng>(pts: &[[f64; D]], height: u32, rng: &mut R) -> [f64; D] {
    let k = D + 2;
    let leaves = k.pow(height);
    let mut level: Vec<[f64; D]> = (0..leaves).map(|_| pts[rng.random_range(0..pts.len())]).collect();
    while level.len() > 1 {
        level = level.chunks(k).map(radon_point_d::<D>).collect();
    }
    level[0]
}

/// Iterated-Radon approximate centerpoint over fixed-size coordinates.
pub(crate) fn approx_centerpoint_d<const D: usize, R: Rng>(
    pts: &[[f64; D]],
    rng: &mut R,
    params: &CenterpointParams,
) -> [f64; D] {
    let n = pts.len();
    if n == 0 {
        return [0.0; D];
    }
    if n < D + 2 {
        return coordinate_median(pts);
    }
    if pts.iter().all(|p| p == &pts[0]) {
        return pts[0];
    }
    let k = (D + 2) as f64;
    let mut height = ((n as f64).ln() / k.ln()).ceil().max(1.0) as u32;
    while height > 1 && (D + 2).pow(height) > params.max_leaves {
        height -= 1;
    }
    if n > params.verify_limit {
        return radon_tree(pts, height, rng);
    }
    let target = (params.target_fraction(D) * n as f64).ceil() as usize;
    let mut best = None;
    let mut best_depth = 0usize;
    for _ in 0..=params.restarts {
        let c = radon_tree(pts, height, rng);
        let dep = depth_d(&c, pts);
        if best.is_none() || dep > best_depth {
            best = Some(c);
            best_depth = dep;
        }
        if dep >= target {
            break;
        }
    }
    best.unwrap()
}

/// Approximate centerpoint of `points` in dimension `dim` from a seed.
pub fn approx_centerpoint(points: &[Point], dim: usize, seed: u64) -> Result<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    approx_centerpoint_with(points, dim, &mut rng, &CenterpointParams::default())
}

pub fn approx_centerpoint_with<R: Rng>(
    points: &[Point],
    dim: usize,
    rng: &mut R,
    params: &CenterpointParams,
) -> Result<Point> {
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }
    Ok(match dim {
        1 => Point::from_array(approx_centerpoint_d::<1, _>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>(), rng, params)),
        2 => Point::from_array(approx_centerpoint_d::<2, _>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>(), rng, params)),
        3 => Point::from_array(approx_centerpoint_d::<3, _>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>(), rng, params)),
        _ => return Err(Error::UnsupportedDimension(dim)),
    })
}

use super::vec::centroid;
use super::Point;
use crate::error::{Error, Result};

const REL_RANK_TOL: f64 = 1e-12;

/// Radon point of exactly `D + 2` points in `R^D` (`D <= 3`).
///
/// Solves for the affine dependence `sum l_i p_i = 0`, `sum l_i = 0` and
/// returns the common point of the two hulls. When the dependence is not
/// unique (rank-deficient input) the centroid of the input is returned.
pub(crate) fn radon_point_d<const D: usize>(pts: &[[f64; D]]) -> [f64; D] {
    debug_assert_eq!(pts.len(), D + 2);
    let rows = D + 1;
    let cols = D + 2;
    let mut m = [[0.0f64; 5]; 4];
    for (j, p) in pts.iter().enumerate() {
        for i in 0..D {
            m[i][j] = p[i];
        }
        m[D][j] = 1.0;
    }
    let scale = m.iter().flat_map(|r| r.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return centroid(pts);
    }
    // Reduced row echelon form.
    let mut pivot_col = [usize::MAX; 4];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best = r;
        for k in r + 1..rows {
            if m[k][c].abs() > m[best][c].abs() {
                best = k;
            }
        }
        if m[best][c].abs() <= REL_RANK_TOL * scale {
            continue;
        }
        m.swap(r, best);
        let inv = 1.0 / m[r][c];
        for v in m[r].iter_mut().take(cols) {
            *v *= inv;
        }
        for k in 0..rows {
            if k != r && m[k][c] != 0.0 {
                let f = m[k][c];
                for cc in 0..cols {
                    m[k][cc] -= f * m[r][cc];
                }
            }
        }
        pivot_col[r] = c;
        r += 1;
    }
    if r < rows {
        return centroid(pts);
    }
    let mut is_pivot = [false; 5];
    for &c in pivot_col.iter().take(rows) {
        is_pivot[c] = true;
    }
    let free = (0..cols).find(|&c| !is_pivot[c]).expect("one free column");
    let mut lambda = [0.0f64; 5];
    lambda[free] = 1.0;
    for k in 0..rows {
        lambda[pivot_col[k]] = -m[k][free];
    }
    let mut pos = 0.0;
    let mut acc = [0.0; D];
    for (j, p) in pts.iter().enumerate() {
        if lambda[j] > 0.0 {
            pos += lambda[j];
            for i in 0..D {
                acc[i] += lambda[j] * p[i];
            }
        }
    }
    if pos <= 0.0 {
        return centroid(pts);
    }
    for v in acc.iter_mut() {
        *v /= pos;
    }
    acc
}

/// Radon point of `d + 2` points in dimension `d` (1 to 3).
pub fn radon_point(points: &[Point]) -> Result<Point> {
    let d = points.first().map(Point::dim).ok_or_else(|| Error::Contract("no points".into()))?;
    if points.iter().any(|p| p.dim() != d) {
        return Err(Error::Contract("mixed dimensions".into()));
    }
    if points.len() != d + 2 {
        return Err(Error::Contract(format!("radon point needs {} points, got {}", d + 2, points.len())));
    }
    Ok(match d {
        1 => Point::from_array(radon_point_d::<1>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>())),
        2 => Point::from_array(radon_point_d::<2>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>())),
        3 => Point::from_array(radon_point_d::<3>(&points.iter().map(|p| p.to_array()).collect::<Vec<_>>())),
        _ => return Err(Error::UnsupportedDimension(d)),
    })
}

//! Small fixed-size vector helpers used by the hot loops, which keep
//! coordinates in `[f64; D]` instead of [`Point`](super::Point).

#[inline]
pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    let mut r = *a;
    for i in 0..D {
        r[i] -= b[i];
    }
    r
}

#[inline]
pub fn dist2<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

pub fn centroid<const D: usize>(pts: &[[f64; D]]) -> [f64; D] {
    let mut acc = [0.0; D];
    for p in pts {
        for i in 0..D {
            acc[i] += p[i];
        }
    }
    let n = pts.len().max(1) as f64;
    for v in acc.iter_mut() {
        *v /= n;
    }
    acc
}

/// Coordinate-wise median, the fallback "center" for tiny inputs.
pub fn coordinate_median<const D: usize>(pts: &[[f64; D]]) -> [f64; D] {
    let mut out = [0.0; D];
    if pts.is_empty() {
        return out;
    }
    let mut col: Vec<f64> = Vec::with_capacity(pts.len());
    for (i, o) in out.iter_mut().enumerate() {
        col.clear();
        col.extend(pts.iter().map(|p| p[i]));
        col.sort_by(f64::total_cmp);
        let m = col.len();
        *o = if m % 2 == 1 { col[m / 2] } else { 0.5 * (col[m / 2 - 1] + col[m / 2]) };
    }
    out
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `rel_tol` times the
/// largest entry.
pub fn solve<const D: usize>(mut a: [[f64; D]; D], mut b: [f64; D], rel_tol: f64) -> Option<[f64; D]> {
    let scale = a.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..D {
        let mut piv = col;
        for r in col + 1..D {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..D {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..D {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; D];
    for r in (0..D).rev() {
        let mut s = b[r];
        for c in r + 1..D {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let x = solve([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn median_of_even_count_averages() {
        let m = coordinate_median(&[[0.0], [1.0], [5.0], [3.0]]);
        assert_eq!(m, [2.0]);
    }
}

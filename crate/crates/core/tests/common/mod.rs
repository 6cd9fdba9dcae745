//! Brute-force reference oracles shared by the integration tests. None of
//! them calls into the solvers they check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use oracle_geom::geom::ConvexPolygon;
use oracle_geom::{CommittedHalfspace, Hyperplane, Point};

/// Solves `a x = b` for a small square system by Gaussian elimination with
/// partial pivoting; `None` when singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let scale = a.iter().map(|r| r[col].abs()).fold(0.0, f64::max);
        if a[piv][col].abs() <= 1e-12 * scale.max(1e-300) || a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in 0..d {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for j in col..d {
                        a[i][j] -= f * a[col][j];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    Some((0..d).map(|i| b[i] / a[i][i]).collect())
}

/// Rows `g . x >= h`.
pub type Row = (Vec<f64>, f64);

/// Every `d`-subset of the rows plus the box `|x_i| <= m`, with the vertices
/// that satisfy all rows. The best feasible vertex by `objective` (minimized)
/// is returned; with no objective, any feasible vertex.
pub fn vertex_lp(dim: usize, rows: &[Row], box_m: f64, objective: Option<&[f64]>) -> Option<(Vec<f64>, f64)> {
    let mut all: Vec<Row> = rows.to_vec();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        all.push((e.clone(), -box_m));
        e[i] = -1.0;
        all.push((e, -box_m));
    }
    let feasible = |x: &[f64]| {
        all.iter().all(|(g, h)| {
            let v: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
            let scale = 1.0 + g.iter().zip(x).map(|(a, b)| (a * b).abs()).fold(h.abs(), f64::max);
            v >= h - 1e-9 * scale
        })
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx: Vec<usize> = (0..dim).collect();
    let k = all.len();
    if k < dim {
        return None;
    }
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| all[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| all[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if x.iter().all(|v| v.is_finite()) && feasible(&x) {
                let val = objective.map_or(0.0, |c| c.iter().zip(&x).map(|(a, b)| a * b).sum());
                if objective.is_none() {
                    return Some((x, val));
                }
                if best.as_ref().is_none_or(|(_, v)| val < *v) {
                    best = Some((x, val));
                }
            }
        }
        if !next_combination(&mut idx, k) {
            return best;
        }
    }
}

/// Advances `idx` to the next increasing `idx.len()`-subset of `0..k`.
fn next_combination(idx: &mut [usize], k: usize) -> bool {
    let d = idx.len();
    for i in (0..d).rev() {
        if idx[i] < k - d + i {
            idx[i] += 1;
            for j in i + 1..d {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn geq_rows(cons: &[CommittedHalfspace]) -> Vec<Row> {
    cons.iter()
        .map(|c| {
            let (g, h) = c.as_geq();
            (g.coords().to_vec(), h)
        })
        .collect()
}

/// Whether some closed disk holds exactly the points flagged in `inside`.
/// Written as strict separation in lifted coordinates: find `(a, b, c, w)`,
/// `w >= 0`, with `a x + b y + c - w |p|^2` at least 1 inside and at most -1
/// outside (`w = 0` is a halfplane, the limit of huge disks).
pub fn disk_realizable(sample: &[Point], inside: &[bool]) -> bool {
    let mut rows: Vec<Row> = Vec::new();
    for (p, &s) in sample.iter().zip(inside) {
        let g = vec![p.x(), p.y(), 1.0, -(p.x() * p.x() + p.y() * p.y())];
        if s {
            rows.push((g, 1.0));
        } else {
            rows.push((g.iter().map(|v| -v).collect(), 1.0));
        }
    }
    rows.push((vec![0.0, 0.0, 0.0, 1.0], 0.0));
    vertex_lp(4, &rows, 1e9, None).is_some()
}

/// All subsets of `sample` realizable by a closed disk, as sorted index lists.
pub fn brute_disk_family(sample: &[Point]) -> HashSet<Vec<usize>> {
    let m = sample.len();
    let mut out = HashSet::new();
    for mask in 0u32..(1 << m) {
        let inside: Vec<bool> = (0..m).map(|i| mask >> i & 1 == 1).collect();
        if disk_realizable(sample, &inside) {
            out.insert((0..m).filter(|&i| inside[i]).collect());
        }
    }
    out
}

/// Lines with vertices of `poly` strictly on both sides.
pub fn crossing_lines(lines: &[Hyperplane], poly: &ConvexPolygon) -> Vec<usize> {
    (0..lines.len())
        .filter(|&i| {
            let e: Vec<f64> = poly.vertices.iter().map(|v| lines[i].eval(v)).collect();
            e.iter().any(|&x| x > 1e-9) && e.iter().any(|&x| x < -1e-9)
        })
        .collect()
}

pub fn median(v: &[u64]) -> u64 {
    let mut s = v.to_vec();
    s.sort_unstable();
    s[s.len() / 2]
}

pub fn log2(n: usize) -> f64 {
    (n as f64).log2()
}

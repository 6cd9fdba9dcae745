//! Seidel-style randomized incremental LP in dimension at most four.
//!
//! Constraints are processed in a seeded random order. When the current
//! optimum violates a constraint, the new optimum lies on that constraint's
//! hyperplane, so one variable is eliminated and the problem is solved
//! recursively one dimension lower over the constraints seen so far.
//!
//! Ties are removed by a lexicographic objective: the user objective first,
//! then the coordinates in order. The optimum of a bounded, feasible
//! instance is therefore unique and independent of the seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CommittedHalfspace, Point, MAX_DIM};
use crate::tol::tol;

/// Box half-width used internally when the caller disables the box.
const OPEN_BOX: f64 = 1e9;
const ZERO_COEF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpInstance {
    pub dim: usize,
    pub constraints: Vec<CommittedHalfspace>,
    /// Direction to minimize; `None` asks only for a feasible point.
    pub objective: Option<Point>,
    /// Box half-width `M`; `None` disables the box.
    pub box_m: Option<f64>,
}

impl LpInstance {
    /// Feasibility instance inside the default box.
    pub fn feasibility(dim: usize, constraints: Vec<CommittedHalfspace>) -> LpInstance {
        LpInstance { dim, constraints, objective: None, box_m: Some(tol().box_m) }
    }

    pub fn minimize(dim: usize, constraints: Vec<CommittedHalfspace>, objective: Point) -> LpInstance {
        LpInstance { dim, constraints, objective: Some(objective), box_m: Some(tol().box_m) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LpResult {
    Optimal(Point),
    /// `blocking` is the constraint whose insertion emptied the region.
    Infeasible { blocking: Option<usize> },
    Unbounded,
}

impl LpResult {
    pub fn point(&self) -> Option<Point> {
        match self {
            LpResult::Optimal(p) => Some(*p),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpResult::Infeasible { .. })
    }
}

#[derive(Clone, Copy, Debug)]
struct Row {
    a: [f64; MAX_DIM],
    b: f64,
    idx: usize,
}

type Vecd = [f64; MAX_DIM];

fn dotd(a: &Vecd, x: &Vecd, d: usize) -> f64 {
    (0..d).map(|i| a[i] * x[i]).sum()
}

/// Lexicographic minimum over a box, coordinate by coordinate.
fn box_lexmin(d: usize, objs: &[Vecd], lo: &Vecd, hi: &Vecd) -> Vecd {
    let mut x = [0.0; MAX_DIM];
    for i in 0..d {
        x[i] = lo[i];
        for o in objs {
            let s = objective_scale(o, d);
            if o[i].abs() > ZERO_COEF * s {
                x[i] = if o[i] > 0.0 { lo[i] } else { hi[i] };
                break;
            }
        }
    }
    x
}

fn objective_scale(o: &Vecd, d: usize) -> f64 {
    (0..d).fold(0.0f64, |m, i| m.max(o[i].abs())).max(1e-300)
}

/// Returns the optimum, or the `idx` of the row at this level whose
/// insertion made the problem infeasible.
fn solve_rec(d: usize, rows: &[Row], objs: &[Vecd], lo: &Vecd, hi: &Vecd, band: f64) -> std::result::Result<Vecd, usize> {
    if d == 1 {
        let (mut l, mut u) = (lo[0], hi[0]);
        for r in rows {
            let a = r.a[0];
            if a > ZERO_COEF {
                l = l.max(r.b / a);
            } else if a < -ZERO_COEF {
                u = u.min(r.b / a);
            } else if r.b > band {
                return Err(r.idx);
            }
            if l > u + band {
                return Err(r.idx);
            }
        }
        if l > u {
            let m = 0.5 * (l + u);
            l = m;
            u = m;
        }
        let mut x = [0.0; MAX_DIM];
        x[0] = l;
        for o in objs {
            if o[0].abs() > ZERO_COEF * objective_scale(o, 1) {
                x[0] = if o[0] > 0.0 { l } else { u };
                break;
            }
        }
        return Ok(x);
    }

    let mut x = box_lexmin(d, objs, lo, hi);
    for i in 0..rows.len() {
        let r = &rows[i];
        if dotd(&r.a, &x, d) >= r.b - band {
            continue;
        }
        // Pivot on the largest coefficient of the violated row.
        let mut j = 0;
        for k in 1..d {
            if r.a[k].abs() > r.a[j].abs() {
                j = k;
            }
        }
        let aj = r.a[j];
        if aj.abs() <= ZERO_COEF {
            return Err(r.idx);
        }
        let keep: Vec<usize> = (0..d).filter(|&k| k != j).collect();
        let sub = |v: &Vecd, vj: f64| -> Vecd {
            let mut out = [0.0; MAX_DIM];
            for (t, &k) in keep.iter().enumerate() {
                out[t] = v[k] - vj * r.a[k] / aj;
            }
            out
        };
        let mut sub_rows: Vec<Row> = Vec::with_capacity(i + 2);
        let push = |a: Vecd, b: f64, idx: usize, out: &mut Vec<Row>| -> bool {
            let n = (0..d - 1).map(|t| a[t] * a[t]).sum::<f64>().sqrt();
            if n <= ZERO_COEF {
                // Parallel to the pivot row: either always true or never.
                return b <= band;
            }
            let mut a2 = a;
            for v in a2.iter_mut().take(d - 1) {
                *v /= n;
            }
            out.push(Row { a: a2, b: b / n, idx });
            true
        };
        // The eliminated variable's box becomes two general rows.
        let mut e = [0.0; MAX_DIM];
        e[j] = 1.0;
        let base = sub(&e, 1.0);
        // x_j = (b - sum a_k x_k) / a_j, so x_j = b/a_j + base . y
        let c0 = r.b / aj;
        let ok = push(base, lo[j] - c0, usize::MAX, &mut sub_rows)
            && push(base.map(|v| -v), c0 - hi[j], usize::MAX, &mut sub_rows);
        if !ok {
            return Err(r.idx);
        }
        for p in &rows[..i] {
            let a2 = sub(&p.a, p.a[j]);
            let b2 = p.b - p.a[j] * c0;
            if !push(a2, b2, p.idx, &mut sub_rows) {
                return Err(r.idx);
            }
        }
        let sub_objs: Vec<Vecd> = objs.iter().map(|o| sub(o, o[j])).collect();
        let mut sub_lo = [0.0; MAX_DIM];
        let mut sub_hi = [0.0; MAX_DIM];
        for (t, &k) in keep.iter().enumerate() {
            sub_lo[t] = lo[k];
            sub_hi[t] = hi[k];
        }
        let y = match solve_rec(d - 1, &sub_rows, &sub_objs, &sub_lo, &sub_hi, band) {
            Ok(y) => y,
            Err(_) => return Err(r.idx),
        };
        let mut nx = [0.0; MAX_DIM];
        let mut rest = 0.0;
        for (t, &k) in keep.iter().enumerate() {
            nx[k] = y[t];
            rest += r.a[k] * y[t];
        }
        nx[j] = (r.b - rest) / aj;
        x = nx;
    }
    Ok(x)
}

fn run(inst: &LpInstance, m: f64, order: &[usize]) -> std::result::Result<Vecd, usize> {
    let d = inst.dim;
    let mut objs: Vec<Vecd> = Vec::with_capacity(d + 1);
    let mut o = [0.0; MAX_DIM];
    match &inst.objective {
        Some(c) => o[..d].copy_from_slice(c.coords()),
        None => {
            let mut w = 1.0;
            for v in o.iter_mut().take(d) {
                *v = w;
                w *= tol().eps_lex;
            }
        }
    }
    objs.push(o);
    for i in 0..d {
        let mut e = [0.0; MAX_DIM];
        e[i] = 1.0;
        objs.push(e);
    }
    let rows: Vec<Row> = order
        .iter()
        .map(|&i| {
            let (a, b) = inst.constraints[i].as_geq();
            let mut arr = [0.0; MAX_DIM];
            arr[..d].copy_from_slice(a.coords());
            Row { a: arr, b, idx: i }
        })
        .collect();
    let lo = [-m; MAX_DIM];
    let hi = [m; MAX_DIM];
    solve_rec(d, &rows, &objs, &lo, &hi, tol().side)
}

/// Solves the instance; the seed only fixes the insertion order.
pub fn lp_solve(inst: &LpInstance, rng_seed: u64) -> Result<LpResult> {
    let d = inst.dim;
    if d == 0 || d > MAX_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if let Some(h) = inst.constraints.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
    }
    if let Some(c) = &inst.objective {
        if c.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: c.dim() });
        }
    }
    if let Some(m) = inst.box_m {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Contract("box bound must be positive".into()));
        }
    }
    let mut order: Vec<usize> = (0..inst.constraints.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let to_point = |x: Vecd| Point::new(&x[..d]);
    match inst.box_m {
        Some(m) => Ok(match run(inst, m, &order) {
            Ok(x) => LpResult::Optimal(to_point(x)),
            Err(i) => LpResult::Infeasible { blocking: Some(i) },
        }),
        None => {
            let x = match run(inst, OPEN_BOX, &order) {
                Ok(x) => x,
                Err(i) => return Ok(LpResult::Infeasible { blocking: Some(i) }),
            };
            if let Some(c) = &inst.objective {
                // A bounded optimum does not move when the box grows.
                let x2 = run(inst, 4.0 * OPEN_BOX, &order).map_err(|_| {
                    Error::Diagnostic("LP became infeasible when the box grew".into())
                })?;
                let v1 = dotd(&x, &{ let mut a = [0.0; MAX_DIM]; a[..d].copy_from_slice(c.coords()); a }, d);
                let v2 = dotd(&x2, &{ let mut a = [0.0; MAX_DIM]; a[..d].copy_from_slice(c.coords()); a }, d);
                if v2 < v1 - 1e-6 * (1.0 + v1.abs()) {
                    return Ok(LpResult::Unbounded);
                }
            }
            Ok(LpResult::Optimal(to_point(x)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn h(a: &[f64], b: f64) -> CommittedHalfspace {
        // a . x >= b
        CommittedHalfspace { plane: crate::geom::Hyperplane::new(Point::new(a), b).unwrap(), side: 1 }
    }

    #[test]
    fn triangle_minimum() {
        let inst = LpInstance::minimize(
            2,
            vec![h(&[1.0, 0.0], 0.0), h(&[0.0, 1.0], 0.0), h(&[-1.0, -1.0], -1.0)],
            Point::p2(1.0, 1.0),
        );
        for seed in 0..10 {
            let p = lp_solve(&inst, seed).unwrap().point().unwrap();
            assert!(p.norm() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn contradictory_pair_is_infeasible() {
        let inst = LpInstance::feasibility(2, vec![h(&[1.0, 0.0], 1.0), h(&[-1.0, 0.0], 0.0)]);
        assert!(lp_solve(&inst, 0).unwrap().is_infeasible());
    }

    #[test]
    fn unbounded_only_without_box() {
        let mut inst = LpInstance::minimize(2, vec![h(&[1.0, 0.0], 0.0)], Point::p2(-1.0, 0.0));
        assert!(matches!(lp_solve(&inst, 0).unwrap(), LpResult::Optimal(_)));
        inst.box_m = None;
        assert_eq!(lp_solve(&inst, 0).unwrap(), LpResult::Unbounded);
        inst.objective = Some(Point::p2(1.0, 0.0));
        let p = lp_solve(&inst, 0).unwrap().point().unwrap();
        assert!(p.x().abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_dimension() {
        let inst = LpInstance::feasibility(5, vec![]);
        assert_eq!(lp_solve(&inst, 0), Err(Error::UnsupportedDimension(5)));
    }

    #[test]
    fn feasibility_mode_is_lexicographic() {
        // Inside the unit square the lexicographic minimum is (0, 0).
        let inst = LpInstance::feasibility(
            2,
            vec![h(&[1.0, 0.0], 0.0), h(&[0.0, 1.0], 0.0), h(&[-1.0, 0.0], -1.0), h(&[0.0, -1.0], -1.0)],
        );
        let p = lp_solve(&inst, 4).unwrap().point().unwrap();
        assert!(p.norm() < 1e-12);
    }

    #[test]
    fn seed_and_order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = rng.random_range(2..=4);
            let cons: Vec<_> = (0..15)
                .map(|_| {
                    let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    h(&a, rng.random_range(-2.0..0.0))
                })
                .collect();
            let obj: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let inst = LpInstance::minimize(d, cons, Point::new(&obj));
            let a = lp_solve(&inst, 0).unwrap().point().unwrap();
            for s in 1..5 {
                let b = lp_solve(&inst, s).unwrap().point().unwrap();
                assert!(a.dist(&b) <= 1e-6 * (1.0 + a.norm()), "{a:?} vs {b:?}");
            }
            for c in &inst.constraints {
                assert!(c.value(&a) >= -1e-9);
            }
        }
    }
}

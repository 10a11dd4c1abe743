//! Dual active-set (Goldfarb–Idnani) solver for
//! `min ½|x|²  s.t.  E x = e,  c_jᵀ x ≥ d_j`.
//!
//! With an identity Hessian the unconstrained start is `x = 0`, the primal
//! step direction is the component of the entering normal orthogonal to the
//! active normals, and the dual direction is its least-squares coefficient
//! on them. Equalities enter first and are never dropped.

use nalgebra::{DMatrix, DVector};

use super::linalg::{lstsq, min_norm_solve};

pub(crate) struct QpSolution {
    pub x: DVector<f64>,
    /// Indices of the active inequalities.
    pub active: Vec<usize>,
    pub iterations: usize,
}

pub(crate) enum QpFailure {
    Infeasible { iterations: usize },
    NotConverged { x: DVector<f64>, iterations: usize },
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Equality,
    Inequality(usize),
}

struct Active {
    normal: DVector<f64>,
    rhs: f64,
    kind: Kind,
    multiplier: f64,
}

/// `(r, z)` with `r` the least-squares coefficients of `v` on the active
/// normals and `z = v − N r`.
fn project(active: &[Active], v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    if active.is_empty() {
        return (DVector::zeros(0), v.clone());
    }
    let n = DMatrix::from_columns(&active.iter().map(|a| a.normal.clone()).collect::<Vec<_>>());
    let r = lstsq(&n, v);
    let z = v - &n * &r;
    (r, z)
}

/// Minimum-norm point satisfying every active constraint with equality.
/// Removes the drift that the incremental updates accumulate.
fn polish(active: &[Active], num_vars: usize) -> DVector<f64> {
    if active.is_empty() {
        return DVector::zeros(num_vars);
    }
    let nt = DMatrix::from_rows(&active.iter().map(|a| a.normal.transpose()).collect::<Vec<_>>());
    let b = DVector::from_iterator(active.len(), active.iter().map(|a| a.rhs));
    min_norm_solve(&nt, &b)
}

pub(crate) fn min_norm(
    num_vars: usize,
    eq_rows: &DMatrix<f64>,
    eq_rhs: &DVector<f64>,
    ineq: &[(DVector<f64>, f64)],
    tol: f64,
    max_iter: usize,
) -> Result<QpSolution, QpFailure> {
    let mut x = DVector::zeros(num_vars);
    let mut active: Vec<Active> = Vec::new();
    let mut iterations = 0;
    let mut polished = false;

    // Entering constraint: normal, rhs, kind. Equalities are oriented so the
    // current point violates them (or sits on them).
    let mut queue: Vec<(DVector<f64>, f64, Kind)> = (0..eq_rows.nrows())
        .rev()
        .map(|k| (eq_rows.row(k).transpose(), eq_rhs[k], Kind::Equality))
        .collect();

    loop {
        let (normal, rhs, kind) = if let Some((n, b, k)) = queue.pop() {
            if n.dot(&x) - b > 0.0 {
                (-n, -b, k)
            } else {
                (n, b, k)
            }
        } else {
            // Most violated inequality not already active.
            let mut worst: Option<(usize, f64)> = None;
            for (j, (c, d)) in ineq.iter().enumerate() {
                if active.iter().any(|a| a.kind == Kind::Inequality(j)) {
                    continue;
                }
                let s = c.dot(&x) - d;
                if s < -tol && worst.map_or(true, |(_, w)| s < w) {
                    worst = Some((j, s));
                }
            }
            match worst {
                None if !polished => {
                    x = polish(&active, num_vars);
                    polished = true;
                    continue;
                }
                None => {
                    let mut idx: Vec<usize> = active
                        .iter()
                        .filter_map(|a| match a.kind {
                            Kind::Inequality(j) => Some(j),
                            Kind::Equality => None,
                        })
                        .collect();
                    idx.sort_unstable();
                    return Ok(QpSolution {
                        x,
                        active: idx,
                        iterations,
                    });
                }
                Some((j, _)) => {
                    polished = false;
                    (ineq[j].0.clone(), ineq[j].1, Kind::Inequality(j))
                }
            }
        };

        let mut entering_multiplier = 0.0;
        let scale = normal.norm().max(f64::MIN_POSITIVE);
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(QpFailure::NotConverged { x, iterations });
            }
            let (r, z) = project(&active, &normal);
            let slack = normal.dot(&x) - rhs;

            // Largest dual step keeping active inequality multipliers ≥ 0.
            let mut t1 = f64::INFINITY;
            let mut blocking = None;
            for (k, a) in active.iter().enumerate() {
                if matches!(a.kind, Kind::Inequality(_)) && r[k] > 1e-12 {
                    let t = a.multiplier / r[k];
                    if t < t1 {
                        t1 = t;
                        blocking = Some(k);
                    }
                }
            }
            let zz = z.norm_squared();
            let t2 = if zz.sqrt() > 1e-10 * scale {
                (-slack / zz).max(0.0)
            } else {
                f64::INFINITY
            };

            if t1.is_infinite() && t2.is_infinite() {
                return Err(QpFailure::Infeasible { iterations });
            }
            let t = t1.min(t2);
            if t2.is_finite() {
                x += &z * t;
            }
            for (k, a) in active.iter_mut().enumerate() {
                a.multiplier -= t * r[k];
            }
            entering_multiplier += t;

            if t2 <= t1 {
                active.push(Active {
                    normal,
                    rhs,
                    kind,
                    multiplier: entering_multiplier,
                });
                break;
            }
            active.remove(blocking.expect("finite t1 has a blocking constraint"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn equality_only_is_min_norm() {
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let s = min_norm(2, &e, &dv(&[2.0]), &[], 1e-12, 100).ok().unwrap();
        assert!((s.x - dv(&[1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn bound_pushes_mass_to_other_variable() {
        // x0 + x1 = 2 with x0 <= 0.5.
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let ineq = [(dv(&[-1.0, 0.0]), -0.5)];
        let s = min_norm(2, &e, &dv(&[2.0]), &ineq, 1e-12, 100).ok().unwrap();
        assert!((s.x - dv(&[0.5, 1.5])).norm() < 1e-12);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn detects_infeasibility() {
        // x0 = 1 with x0 <= 0.
        let e = DMatrix::from_row_slice(1, 1, &[1.0]);
        let ineq = [(dv(&[-1.0]), 0.0)];
        assert!(matches!(
            min_norm(1, &e, &dv(&[1.0]), &ineq, 1e-12, 100),
            Err(QpFailure::Infeasible { .. })
        ));
    }
}

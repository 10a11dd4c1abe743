//! Brute-force reference for [`distribute_forces`](super::distribute_forces).
//!
//! Every face of each foot's (possibly capped) pyramid is a linear or affine
//! set; the optimum lies in the relative interior of one face of the product
//! set, where it is the minimum-norm point satisfying the wrench equality.
//! Enumerating face combinations and keeping the best feasible one gives the
//! global minimum. Unreachable wrenches are first projected onto the
//! achievable set by enumerating generator subsets.

use nalgebra::{DMatrix, Matrix3, Matrix6, SymmetricEigen, Vector3, Vector6};
use rayon::prelude::*;

use super::{ConstraintId, Model, StanceError, StanceProblem, StanceSolution, Wrench};

/// Upper bound on enumerated face combinations.
pub const MAX_ORACLE_PATTERNS: usize = 100_000;
/// Upper bound on enumerated generator subsets for the residual search.
pub const MAX_ORACLE_SUBSETS: usize = 200_000;

/// One face of a foot's admissible set: `f = f0 + P·v` with `P` the
/// projector onto the face's direction space.
#[derive(Debug, Clone)]
struct Face {
    f0: Vector3<f64>,
    proj: Matrix3<f64>,
    /// `A_b P A_bᵀ` and `A_b f0` for the foot's 6×3 wrench block.
    q: Matrix6<f64>,
    a_f0: Vector6<f64>,
}

struct Foot {
    block: nalgebra::Matrix6x3<f64>,
    faces: Vec<Face>,
    n: Vector3<f64>,
    t1: Vector3<f64>,
    t2: Vector3<f64>,
    mu: f64,
    cap: Option<f64>,
}

impl Foot {
    fn admissible(&self, f: &Vector3<f64>, tol: f64) -> bool {
        let fn_ = self.n.dot(f);
        fn_ >= -tol
            && self.t1.dot(f).abs() <= self.mu * fn_ + tol
            && self.t2.dot(f).abs() <= self.mu * fn_ + tol
            && self.cap.map_or(true, |c| fn_ <= c + tol)
    }
}

fn face_from_rows(rows: &[(Vector3<f64>, f64)], block: &nalgebra::Matrix6x3<f64>) -> Option<Face> {
    let mut rtr = Matrix3::zeros();
    let mut rth = Vector3::zeros();
    for (r, h) in rows {
        rtr += r * r.transpose();
        rth += r * *h;
    }
    let eig = SymmetricEigen::new(rtr);
    let top = eig.eigenvalues.amax().max(1e-300);
    let mut proj = Matrix3::zeros();
    let mut f0 = Vector3::zeros();
    for k in 0..3 {
        let v = eig.eigenvectors.column(k).into_owned();
        if eig.eigenvalues[k] <= 1e-12 * top || rows.is_empty() {
            proj += v * v.transpose();
        } else {
            f0 += v * (v.dot(&rth) / eig.eigenvalues[k]);
        }
    }
    if rows.iter().any(|(r, h)| (r.dot(&f0) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return None;
    }
    Some(Face {
        f0,
        proj,
        q: block * proj * block.transpose(),
        a_f0: block * f0,
    })
}

fn build_feet(problem: &StanceProblem, model: &Model) -> Vec<Foot> {
    model
        .contact
        .iter()
        .enumerate()
        .map(|(b, &i)| {
            let c = &problem.feet[i];
            let block: nalgebra::Matrix6x3<f64> = model.wrench_map.fixed_view::<6, 3>(0, 3 * b).into_owned();
            let (t1, t2) = c.tangents();
            let n = c.normal;
            let mu = c.friction_coefficient;
            let z = |v: Vector3<f64>| (v, 0.0);
            let mut sets: Vec<Vec<(Vector3<f64>, f64)>> = Vec::new();
            let apex = vec![z(n), z(t1), z(t2)];
            if mu > 0.0 {
                let faces = [n * mu - t1, n * mu + t1, n * mu - t2, n * mu + t2];
                let edges = [(0, 2), (0, 3), (1, 2), (1, 3)];
                let mut open: Vec<Vec<(Vector3<f64>, f64)>> = vec![vec![]];
                open.extend(faces.iter().map(|&f| vec![z(f)]));
                open.extend(edges.iter().map(|&(a, b)| vec![z(faces[a]), z(faces[b])]));
                if let Some(cap) = c.max_normal_force {
                    for s in &open {
                        let mut with_cap = s.clone();
                        with_cap.push((n, cap));
                        sets.push(with_cap);
                    }
                }
                sets.extend(open);
            } else {
                sets.push(vec![z(t1), z(t2)]);
                if let Some(cap) = c.max_normal_force {
                    sets.push(vec![z(t1), z(t2), (n, cap)]);
                }
            }
            sets.push(apex);
            Foot {
                block,
                faces: sets.iter().filter_map(|rows| face_from_rows(rows, &block)).collect(),
                n,
                t1,
                t2,
                mu,
                cap: c.max_normal_force,
            }
        })
        .collect()
}

fn pinv_solve(g: &Matrix6<f64>, r: &Vector6<f64>) -> Vector6<f64> {
    let eig = SymmetricEigen::new(*g);
    let top = eig.eigenvalues.amax();
    let mut out = Vector6::zeros();
    for k in 0..6 {
        let ev = eig.eigenvalues[k];
        if ev > 1e-12 * top && ev > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += v * (v.dot(r) / ev);
        }
    }
    out
}

/// Best feasible face combination for an exactly imposed wrench.
fn best_combination(feet: &[Foot], w: &Wrench, scale: f64) -> Option<(f64, Vec<Vector3<f64>>)> {
    let total: usize = feet.iter().map(|f| f.faces.len()).product();
    let tol = 1e-9 * scale;
    (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut choice = Vec::with_capacity(feet.len());
            for f in feet {
                choice.push(&f.faces[code % f.faces.len()]);
                code /= f.faces.len();
            }
            let mut g = Matrix6::zeros();
            let mut r = *w;
            for face in &choice {
                g += face.q;
                r -= face.a_f0;
            }
            let lambda = pinv_solve(&g, &r);
            if (g * lambda - r).norm() > tol {
                return None;
            }
            let mut forces = Vec::with_capacity(feet.len());
            let mut obj = 0.0;
            for (foot, face) in feet.iter().zip(&choice) {
                let f = face.f0 + face.proj * foot.block.transpose() * lambda;
                if !foot.admissible(&f, tol) {
                    return None;
                }
                obj += f.norm_squared();
                forces.push(f);
            }
            Some((obj, forces))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn binomial_prefix(m: usize, k: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for j in 0..=k.min(m) {
        total = total.saturating_add(c);
        c = c.saturating_mul(m - j) / (j + 1);
    }
    total
}

/// Closest achievable wrench by enumerating generator subsets of size ≤ 6.
fn closest_by_subsets(model: &Model, w: &Wrench) -> Wrench {
    let g = model.generator_matrix();
    let cols: DMatrix<f64> = &model.wrench_map * &g;
    let m = cols.ncols();
    let target = nalgebra::DVector::from_column_slice(w.as_slice());
    let mut best = (w.norm(), Wrench::zeros());
    let mut subset: Vec<usize> = Vec::new();
    // Iterative lexicographic enumeration of all subsets of size 1..=6.
    fn advance(subset: &mut Vec<usize>, m: usize, kmax: usize) -> bool {
        if subset.len() < kmax {
            let next = subset.last().map_or(0, |&l| l + 1);
            if next < m {
                subset.push(next);
                return true;
            }
        }
        while let Some(l) = subset.pop() {
            if l + 1 < m {
                subset.push(l + 1);
                return true;
            }
        }
        false
    }
    while advance(&mut subset, m, 6) {
        let sub = cols.select_columns(subset.iter());
        let gram = sub.transpose() * &sub;
        let Some(chol) = gram.clone().cholesky() else { continue };
        if gram.diagonal().iter().zip(chol.l().diagonal().iter()).any(|(d, l)| l * l < 1e-12 * d) {
            continue;
        }
        let lambda = chol.solve(&(sub.transpose() * &target));
        if lambda.iter().any(|&v| v < -1e-12 * lambda.amax().max(1.0)) {
            continue;
        }
        let achieved = &sub * lambda.map(|v| v.max(0.0));
        let res = (&target - &achieved).norm();
        if res < best.0 {
            best = (res, Wrench::from_column_slice(achieved.as_slice()));
        }
    }
    best.1
}

/// Globally optimal solution by enumeration; for small instances only.
pub fn enumerate_oracle(problem: &StanceProblem) -> Result<StanceSolution, StanceError> {
    problem.validate()?;
    let model = Model::build(problem);
    let feet = build_feet(problem, &model);
    let total = feet
        .iter()
        .map(|f| f.faces.len())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if total > MAX_ORACLE_PATTERNS {
        return Err(StanceError::TooLarge {
            needed: total,
            limit: MAX_ORACLE_PATTERNS,
        });
    }
    let desired = problem.desired_wrench();
    let scale = model.scale;

    let found = match best_combination(&feet, &desired, scale) {
        Some(hit) => hit,
        None => {
            if feet.iter().any(|f| f.cap.is_some()) {
                return Err(StanceError::OracleUnsupported);
            }
            let subsets = binomial_prefix(model.generators.len(), 6);
            if subsets > MAX_ORACLE_SUBSETS {
                return Err(StanceError::TooLarge {
                    needed: subsets,
                    limit: MAX_ORACLE_SUBSETS,
                });
            }
            let projected = closest_by_subsets(&model, &desired);
            best_combination(&feet, &projected, scale).unwrap_or_else(|| (0.0, vec![Vector3::zeros(); feet.len()]))
        }
    };

    let mut forces = vec![Vector3::zeros(); problem.feet.len()];
    for (b, &i) in model.contact.iter().enumerate() {
        forces[i] = found.1[b];
    }
    let achieved = super::net_wrench(&problem.feet, &forces)?;
    let x = nalgebra::DVector::from_iterator(model.num_vars(), found.1.iter().flat_map(|f| f.iter().copied()));
    let tol = 1e-9 * scale;
    let active = model
        .inequalities
        .iter()
        .filter(|(_, row, rhs)| (row.dot(&x) - rhs).abs() <= tol)
        .map(|(id, _, _)| *id)
        .collect::<Vec<ConstraintId>>();
    Ok(StanceSolution {
        objective_value: (1.0 + problem.regularization) * found.1.iter().map(|f| f.norm_squared()).sum::<f64>(),
        residual_wrench: desired - achieved,
        forces,
        active_constraints: active,
        iterations: total,
    })
}

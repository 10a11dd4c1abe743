//! Ground-reaction force distribution over foot contacts, and virtual
//! suspension wrenches that feed it.
//!
//! The distribution problem is
//!
//! ```text
//! minimize   (1 + reg) · Σ |f_i|²
//! subject to Σ f_i = F,  Σ p_i × f_i = M
//!            |t1·f_i| ≤ μ_i n_i·f_i,  |t2·f_i| ≤ μ_i n_i·f_i
//!            n_i·f_i ≤ cap_i            (optional)
//! ```
//!
//! where `(t1, t2)` is a tangent frame aligned with the body x/y axes. With
//! μ = 0 the pyramid degenerates to the normal ray and the tangential
//! components become equalities. When no admissible force set reproduces the
//! wrench exactly, the solver first finds the closest achievable wrench and
//! then the minimum-norm forces that produce it.

mod linalg;
mod nnls;
mod oracle;
mod qp;

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use thiserror::Error;

pub use oracle::{enumerate_oracle, MAX_ORACLE_PATTERNS, MAX_ORACLE_SUBSETS};

/// Wrench as `(force, moment)` stacked into a 6-vector.
pub type Wrench = Vector6<f64>;

/// Outer iteration cap of the active-set solver, per constraint.
pub const ITERATIONS_PER_CONSTRAINT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StanceError {
    #[error("no foot is in contact")]
    NoContact,
    #[error("expected {expected} force vectors, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("foot {index}: {reason}")]
    InvalidFoot { index: usize, reason: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("solver did not converge in {iterations} iterations")]
    NotConverged {
        iterations: usize,
        best: Box<StanceSolution>,
    },
    #[error("oracle limited to {limit} cases, instance needs {needed}")]
    TooLarge { needed: usize, limit: usize },
    #[error("oracle does not handle force caps on an infeasible wrench")]
    OracleUnsupported,
    #[error("orientation {0:?} rad is outside the small-angle regime")]
    LargeAngle([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootContact {
    /// Body frame, m.
    pub position: Vector3<f64>,
    /// Unit contact normal pointing into the body.
    pub normal: Vector3<f64>,
    pub friction_coefficient: f64,
    pub in_contact: bool,
    /// Optional cap on the normal force, N.
    pub max_normal_force: Option<f64>,
}

impl FootContact {
    pub fn new(position: Vector3<f64>, normal: Vector3<f64>, friction_coefficient: f64) -> Self {
        Self {
            position,
            normal,
            friction_coefficient,
            in_contact: true,
            max_normal_force: None,
        }
    }

    /// Foot on flat ground with normal `+z`.
    pub fn flat(x: f64, y: f64, z: f64, friction_coefficient: f64) -> Self {
        Self::new(Vector3::new(x, y, z), Vector3::z(), friction_coefficient)
    }

    fn validate(&self, index: usize) -> Result<(), StanceError> {
        let bad = |reason: &str| {
            Err(StanceError::InvalidFoot {
                index,
                reason: reason.to_string(),
            })
        };
        if self.position.iter().chain(self.normal.iter()).any(|v| !v.is_finite()) {
            return bad("non-finite position or normal");
        }
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return bad("normal must have unit length");
        }
        if !(self.friction_coefficient >= 0.0) || !self.friction_coefficient.is_finite() {
            return bad("friction coefficient must be finite and >= 0");
        }
        if let Some(cap) = self.max_normal_force {
            if !(cap > 0.0) || !cap.is_finite() {
                return bad("normal force cap must be > 0");
            }
        }
        Ok(())
    }

    /// Tangent frame of the friction pyramid: `t1` is the body x axis
    /// projected onto the contact plane (y when x is parallel to the
    /// normal), `t2 = n × t1`.
    pub fn tangents(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal;
        let mut t1 = Vector3::x() - n * n.x;
        if t1.norm() < 1e-6 {
            t1 = Vector3::y() - n * n.y;
        }
        let t1 = t1.normalize();
        (t1, n.cross(&t1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StanceProblem {
    pub feet: Vec<FootContact>,
    pub desired_force: Vector3<f64>,
    /// About the body origin.
    pub desired_moment: Vector3<f64>,
    pub regularization: f64,
}

impl StanceProblem {
    pub fn new(feet: Vec<FootContact>, desired_force: Vector3<f64>, desired_moment: Vector3<f64>) -> Self {
        Self {
            feet,
            desired_force,
            desired_moment,
            regularization: 0.0,
        }
    }

    pub fn desired_wrench(&self) -> Wrench {
        stack(&self.desired_force, &self.desired_moment)
    }

    pub fn validate(&self) -> Result<(), StanceError> {
        for (i, f) in self.feet.iter().enumerate() {
            f.validate(i)?;
        }
        if !self.feet.iter().any(|f| f.in_contact) {
            return Err(StanceError::NoContact);
        }
        if !(self.regularization >= 0.0) || !self.regularization.is_finite() {
            return Err(StanceError::InvalidProblem("regularization must be >= 0".into()));
        }
        if self.desired_wrench().iter().any(|v| !v.is_finite()) {
            return Err(StanceError::InvalidProblem("non-finite desired wrench".into()));
        }
        Ok(())
    }
}

/// Identifies one inequality of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintId {
    /// `n·f ≥ 0` (only used when μ = 0; otherwise implied by the faces).
    Normal { foot: usize },
    /// Pyramid face `s·f ≤ μ n·f` with `s` = +t1, −t1, +t2, −t2 for `face` 0..4.
    Face { foot: usize, face: u8 },
    /// `n·f ≤ cap`.
    Cap { foot: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StanceSolution {
    /// One vector per foot in problem order; zero for feet out of contact.
    pub forces: Vec<Vector3<f64>>,
    /// `desired − achieved`.
    pub residual_wrench: Wrench,
    pub active_constraints: Vec<ConstraintId>,
    /// `(1 + reg) · Σ |f_i|²`, N².
    pub objective_value: f64,
    pub iterations: usize,
}

impl StanceSolution {
    pub fn normal_components(&self, problem: &StanceProblem) -> Vec<f64> {
        self.forces.iter().zip(&problem.feet).map(|(f, c)| c.normal.dot(f)).collect()
    }

    /// Per-foot `(|t1·f|, |t2·f|)`.
    pub fn tangential_components(&self, problem: &StanceProblem) -> Vec<(f64, f64)> {
        self.forces
            .iter()
            .zip(&problem.feet)
            .map(|(f, c)| {
                let (t1, t2) = c.tangents();
                (t1.dot(f).abs(), t2.dot(f).abs())
            })
            .collect()
    }

    /// Checks the per-foot cone invariants with slack `tol`.
    pub fn satisfies_constraints(&self, problem: &StanceProblem, tol: f64) -> bool {
        self.forces.iter().zip(&problem.feet).all(|(f, c)| {
            let (t1, t2) = c.tangents();
            let fn_ = c.normal.dot(f);
            let cap_ok = c.max_normal_force.map_or(true, |cap| fn_ <= cap + tol);
            fn_ >= -tol
                && t1.dot(f).abs() <= c.friction_coefficient * fn_ + tol
                && t2.dot(f).abs() <= c.friction_coefficient * fn_ + tol
                && cap_ok
        })
    }
}

fn stack(a: &Vector3<f64>, b: &Vector3<f64>) -> Wrench {
    Wrench::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

/// `(Σ f_i, Σ p_i × f_i)` over all listed feet.
pub fn net_wrench(feet: &[FootContact], forces: &[Vector3<f64>]) -> Result<Wrench, StanceError> {
    if feet.len() != forces.len() {
        return Err(StanceError::LengthMismatch {
            expected: feet.len(),
            got: forces.len(),
        });
    }
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    for (c, f) in feet.iter().zip(forces) {
        force += f;
        moment += c.position.cross(f);
    }
    Ok(stack(&force, &moment))
}

/// Linear model shared by the solver and the oracle. Variables are the
/// stacked forces of the feet in contact.
#[derive(Debug, Clone)]
pub(crate) struct Model {
    /// Problem indices of the feet in contact, in variable order.
    pub contact: Vec<usize>,
    /// 6 × 3k wrench map.
    pub wrench_map: DMatrix<f64>,
    /// Tangential equalities for frictionless feet, one row each.
    pub tangent_rows: Vec<DVector<f64>>,
    pub inequalities: Vec<(ConstraintId, DVector<f64>, f64)>,
    /// Extreme rays of each foot's pyramid, with the owning variable block.
    pub generators: Vec<(usize, Vector3<f64>)>,
    /// Characteristic force scale for tolerances.
    pub scale: f64,
}

impl Model {
    pub fn build(problem: &StanceProblem) -> Self {
        let contact: Vec<usize> = (0..problem.feet.len()).filter(|&i| problem.feet[i].in_contact).collect();
        let nv = 3 * contact.len();
        let mut wrench_map = DMatrix::zeros(6, nv);
        let mut tangent_rows = Vec::new();
        let mut inequalities = Vec::new();
        let mut generators = Vec::new();
        let row = |block: usize, v: Vector3<f64>| {
            let mut r = DVector::zeros(nv);
            r.fixed_rows_mut::<3>(3 * block).copy_from(&v);
            r
        };
        for (b, &i) in contact.iter().enumerate() {
            let c = &problem.feet[i];
            let p = c.position;
            for a in 0..3 {
                wrench_map[(a, 3 * b + a)] = 1.0;
            }
            // p × f as a matrix acting on f.
            let cross = nalgebra::Matrix3::new(0.0, -p.z, p.y, p.z, 0.0, -p.x, -p.y, p.x, 0.0);
            wrench_map.view_mut((3, 3 * b), (3, 3)).copy_from(&cross);

            let (t1, t2) = c.tangents();
            let n = c.normal;
            let mu = c.friction_coefficient;
            if mu > 0.0 {
                let norm = (1.0 + mu * mu).sqrt();
                for (k, s) in [t1, -t1, t2, -t2].into_iter().enumerate() {
                    inequalities.push((ConstraintId::Face { foot: i, face: k as u8 }, row(b, (n * mu - s) / norm), 0.0));
                }
                for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    generators.push((b, n + (t1 * s1 + t2 * s2) * mu));
                }
            } else {
                tangent_rows.push(row(b, t1));
                tangent_rows.push(row(b, t2));
                inequalities.push((ConstraintId::Normal { foot: i }, row(b, n), 0.0));
                generators.push((b, n));
            }
            if let Some(cap) = c.max_normal_force {
                inequalities.push((ConstraintId::Cap { foot: i }, row(b, -n), -cap));
            }
        }
        let scale = problem.desired_wrench().norm().max(1.0);
        Self {
            contact,
            wrench_map,
            tangent_rows,
            inequalities,
            generators,
            scale,
        }
    }

    pub fn num_vars(&self) -> usize {
        3 * self.contact.len()
    }

    /// All equality rows: wrench rows followed by tangential rows.
    pub fn equalities(&self, wrench: &Wrench) -> (DMatrix<f64>, DVector<f64>) {
        let m = 6 + self.tangent_rows.len();
        let mut a = DMatrix::zeros(m, self.num_vars());
        let mut b = DVector::zeros(m);
        a.rows_mut(0, 6).copy_from(&self.wrench_map);
        b.rows_mut(0, 6).copy_from(wrench);
        for (k, r) in self.tangent_rows.iter().enumerate() {
            a.row_mut(6 + k).copy_from(&r.transpose());
        }
        (a, b)
    }

    /// Scatters the variable vector into per-foot forces.
    pub fn forces(&self, x: &DVector<f64>, num_feet: usize) -> Vec<Vector3<f64>> {
        let mut out = vec![Vector3::zeros(); num_feet];
        for (b, &i) in self.contact.iter().enumerate() {
            out[i] = x.fixed_rows::<3>(3 * b).into_owned();
        }
        out
    }

    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.num_vars(), self.generators.len());
        for (j, (b, v)) in self.generators.iter().enumerate() {
            g.view_mut((3 * b, j), (3, 1)).copy_from(v);
        }
        g
    }
}

/// Orthonormal basis for the row space of `a` with the matching right-hand
/// side, plus the part of `b` that no combination of rows reaches.
pub(crate) fn reduce_equalities(a: &DMatrix<f64>, b: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, f64) {
    linalg::row_basis(a, b)
}

fn finish(problem: &StanceProblem, model: &Model, x: &DVector<f64>, active: Vec<ConstraintId>, iterations: usize) -> StanceSolution {
    let forces = model.forces(x, problem.feet.len());
    let achieved = net_wrench(&problem.feet, &forces).expect("lengths match by construction");
    StanceSolution {
        objective_value: (1.0 + problem.regularization) * x.norm_squared(),
        residual_wrench: problem.desired_wrench() - achieved,
        forces,
        active_constraints: active,
        iterations,
    }
}

/// Minimum-norm foot forces reproducing the desired wrench inside the
/// friction pyramids, or the closest achievable wrench when it is out of
/// reach.
pub fn distribute_forces(problem: &StanceProblem) -> Result<StanceSolution, StanceError> {
    problem.validate()?;
    let model = Model::build(problem);
    let max_iter = ITERATIONS_PER_CONSTRAINT * (model.inequalities.len() + model.num_vars()) + 50;

    let mut iterations = 0;
    let target = problem.desired_wrench();
    let attempt = qp_for(&model, &target, max_iter);
    match attempt {
        Attempt::Solved(x, active, it) => return Ok(finish(problem, &model, &x, active, it)),
        Attempt::NotConverged(x, it) => return Err(not_converged(problem, &model, &x, it)),
        Attempt::Infeasible(it) => iterations += it,
    }

    // Closest achievable wrench, then the minimum-norm forces producing it.
    let projected = closest_wrench(&model, &target);
    let x_fallback = projected.1;
    iterations += projected.2;
    match qp_for(&model, &projected.0, max_iter) {
        Attempt::Solved(x, active, it) => Ok(finish(problem, &model, &x, active, iterations + it)),
        Attempt::NotConverged(x, it) => Err(not_converged(problem, &model, &x, iterations + it)),
        // Boundary round-off: the cone-combination point is admissible.
        Attempt::Infeasible(it) => Ok(finish(problem, &model, &x_fallback, Vec::new(), iterations + it)),
    }
}

fn not_converged(problem: &StanceProblem, model: &Model, x: &DVector<f64>, iterations: usize) -> StanceError {
    StanceError::NotConverged {
        iterations,
        best: Box::new(finish(problem, model, x, Vec::new(), iterations)),
    }
}

enum Attempt {
    Solved(DVector<f64>, Vec<ConstraintId>, usize),
    Infeasible(usize),
    NotConverged(DVector<f64>, usize),
}

fn qp_for(model: &Model, wrench: &Wrench, max_iter: usize) -> Attempt {
    let (a, b) = model.equalities(wrench);
    let (rows, rhs, unreachable) = reduce_equalities(&a, &b);
    if unreachable > 1e-9 * model.scale {
        return Attempt::Infeasible(0);
    }
    let tol = 1e-13 * model.scale;
    let ineq: Vec<(DVector<f64>, f64)> = model.inequalities.iter().map(|(_, r, b)| (r.clone(), *b)).collect();
    match qp::min_norm(model.num_vars(), &rows, &rhs, &ineq, tol, max_iter) {
        Ok(out) => {
            let mut active: Vec<ConstraintId> = out.active.iter().map(|&k| model.inequalities[k].0).collect();
            active.sort();
            Attempt::Solved(out.x, active, out.iterations)
        }
        Err(qp::QpFailure::Infeasible { iterations }) => Attempt::Infeasible(iterations),
        Err(qp::QpFailure::NotConverged { x, iterations }) => Attempt::NotConverged(x, iterations),
    }
}

/// Achievable wrench closest to `target` and one force vector producing it.
fn closest_wrench(model: &Model, target: &Wrench) -> (Wrench, DVector<f64>, usize) {
    let g = model.generator_matrix();
    let m = &model.wrench_map * &g;
    let caps: Vec<(Vec<usize>, f64)> = model
        .contact
        .iter()
        .enumerate()
        .filter_map(|(b, _)| {
            let cap = model.inequalities.iter().find_map(|(id, r, rhs)| match id {
                ConstraintId::Cap { .. } if r.fixed_rows::<3>(3 * b).norm() > 0.0 => Some(-rhs),
                _ => None,
            })?;
            let cols = (0..model.generators.len()).filter(|&j| model.generators[j].0 == b).collect();
            Some((cols, cap))
        })
        .collect();
    let (lambda, iterations) = if caps.is_empty() {
        nnls::nnls(&m, &DVector::from_column_slice(target.as_slice()))
    } else {
        nnls::nnls_with_caps(&m, &DVector::from_column_slice(target.as_slice()), &caps)
    };
    let x = &g * &lambda;
    let w = &model.wrench_map * &x;
    (Wrench::from_column_slice(w.as_slice()), x, iterations)
}

/// Restoring-wrench gains and setpoint. All gain vectors act componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualSuspension {
    pub linear_stiffness: Vector3<f64>,
    pub linear_damping: Vector3<f64>,
    pub angular_stiffness: Vector3<f64>,
    pub angular_damping: Vector3<f64>,
    pub setpoint_position: Vector3<f64>,
    /// Roll, pitch, yaw, rad.
    pub setpoint_rpy: Vector3<f64>,
}

/// Body pose and twist in the frame the suspension setpoint is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub position: Vector3<f64>,
    pub rpy: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

pub fn suspension_wrench(susp: &VirtualSuspension, body: &BodyState) -> Result<Wrench, StanceError> {
    let gains = [
        susp.linear_stiffness,
        susp.linear_damping,
        susp.angular_stiffness,
        susp.angular_damping,
    ];
    if gains.iter().any(|g| g.iter().any(|v| !(*v >= 0.0) || !v.is_finite())) {
        return Err(StanceError::InvalidProblem("suspension gains must be finite and >= 0".into()));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    for rpy in [body.rpy, susp.setpoint_rpy] {
        if rpy.iter().any(|a| !(a.abs() < half_pi)) {
            return Err(StanceError::LargeAngle([rpy.x, rpy.y, rpy.z]));
        }
    }
    let force = susp.linear_stiffness.component_mul(&(susp.setpoint_position - body.position))
        - susp.linear_damping.component_mul(&body.velocity);
    let moment = susp.angular_stiffness.component_mul(&(susp.setpoint_rpy - body.rpy))
        - susp.angular_damping.component_mul(&body.angular_velocity);
    Ok(stack(&force, &moment))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn wrench_of_single_feet() {
        let feet = [FootContact::flat(0.0, 0.0, 0.0, 0.5)];
        let w = net_wrench(&feet, &[v(0.0, 0.0, 100.0)]).unwrap();
        assert_eq!(w, Wrench::new(0.0, 0.0, 100.0, 0.0, 0.0, 0.0));
        let feet = [FootContact::flat(1.0, 0.0, 0.0, 0.5)];
        let w = net_wrench(&feet, &[v(0.0, 0.0, 100.0)]).unwrap();
        assert_eq!(w, Wrench::new(0.0, 0.0, 100.0, 0.0, -100.0, 0.0));
        assert_eq!(net_wrench(&feet, &[Vector3::zeros()]).unwrap(), Wrench::zeros());
        assert!(matches!(net_wrench(&feet, &[]), Err(StanceError::LengthMismatch { .. })));
    }

    #[test]
    fn two_feet_share_equally() {
        let p = StanceProblem::new(
            vec![FootContact::flat(-0.5, 0.0, 0.0, 0.5), FootContact::flat(0.5, 0.0, 0.0, 0.5)],
            v(0.0, 0.0, 1000.0),
            Vector3::zeros(),
        );
        let s = distribute_forces(&p).unwrap();
        for f in &s.forces {
            assert!((f - v(0.0, 0.0, 500.0)).norm() < 1e-9);
        }
        assert!(s.residual_wrench.norm() < 1e-9);
    }

    #[test]
    fn single_foot_takes_everything() {
        let p = StanceProblem::new(vec![FootContact::flat(0.0, 0.0, 0.0, 0.0)], v(0.0, 0.0, 250.0), Vector3::zeros());
        let s = distribute_forces(&p).unwrap();
        assert!((s.forces[0] - v(0.0, 0.0, 250.0)).norm() < 1e-9);
        assert!(s.residual_wrench.norm() < 1e-9);
    }

    #[test]
    fn no_contact_rejected() {
        let mut foot = FootContact::flat(0.0, 0.0, 0.0, 0.5);
        foot.in_contact = false;
        let p = StanceProblem::new(vec![foot], v(0.0, 0.0, 1.0), Vector3::zeros());
        assert_eq!(distribute_forces(&p), Err(StanceError::NoContact));
    }

    #[test]
    fn out_of_cone_request_reports_residual() {
        // Pure sideways push on frictionless feet: nothing can be delivered.
        let p = StanceProblem::new(
            vec![FootContact::flat(-0.5, 0.0, 0.0, 0.0), FootContact::flat(0.5, 0.0, 0.0, 0.0)],
            v(100.0, 0.0, 0.0),
            Vector3::zeros(),
        );
        let s = distribute_forces(&p).unwrap();
        assert!(s.satisfies_constraints(&p, 1e-9));
        assert!((s.residual_wrench - Wrench::new(100.0, 0.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-9);
        assert!(s.objective_value < 1e-12);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let c = FootContact::new(v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), 0.5);
        let (t1, t2) = c.tangents();
        assert!(t1.dot(&c.normal).abs() < 1e-12 && t2.dot(&c.normal).abs() < 1e-12);
        assert!((t1.norm() - 1.0).abs() < 1e-12 && t1.dot(&t2).abs() < 1e-12);
    }

    #[test]
    fn suspension_examples() {
        let mut s = VirtualSuspension {
            linear_stiffness: v(0.0, 0.0, 20000.0),
            setpoint_position: v(0.0, 0.0, 0.05),
            ..Default::default()
        };
        let w = suspension_wrench(&s, &BodyState::default()).unwrap();
        assert_eq!(w, Wrench::new(0.0, 0.0, 1000.0, 0.0, 0.0, 0.0));

        s.setpoint_position = Vector3::zeros();
        assert_eq!(suspension_wrench(&s, &BodyState::default()).unwrap(), Wrench::zeros());

        let s = VirtualSuspension {
            angular_stiffness: v(500.0, 500.0, 500.0),
            ..Default::default()
        };
        let body = BodyState {
            rpy: v(-0.1, 0.0, 0.0),
            ..Default::default()
        };
        let w = suspension_wrench(&s, &body).unwrap();
        assert!((w - Wrench::new(0.0, 0.0, 0.0, 50.0, 0.0, 0.0)).norm() < 1e-12);

        let tipped = BodyState {
            rpy: v(2.0, 0.0, 0.0),
            ..Default::default()
        };
        assert!(matches!(suspension_wrench(&s, &tipped), Err(StanceError::LargeAngle(_))));
    }
}

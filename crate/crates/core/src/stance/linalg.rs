//! Column-pivoted QR helpers. The SVD in nalgebra loses about nine digits on
//! some small wide systems here, which is enough to break the 1e-9 checks.

use nalgebra::{DMatrix, DVector};

/// Diagonal entries of R below this fraction of the largest one count as zero.
const RANK_TOL: f64 = 1e-10;

/// `Q`, `R` and the explicit permutation `P` with `m P = Q R`.
fn pivoted_qr(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, usize) {
    let qr = m.clone().col_piv_qr();
    let mut perm = DMatrix::identity(m.ncols(), m.ncols());
    qr.p().permute_columns(&mut perm);
    let (q, r) = (qr.q(), qr.r());
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let lead = diag.iter().fold(1.0f64, |a, &v| a.max(v));
    let rank = diag.iter().take_while(|&&v| v > RANK_TOL * lead).count();
    (q, r, perm, rank)
}

/// Solves `L y = b` for lower-triangular `L`.
fn forward(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut y = b.clone();
    for i in 0..y.len() {
        for j in 0..i {
            y[i] -= l[(i, j)] * y[j];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Orthonormal rows spanning the row space of `a`, the right-hand side that
/// makes them equivalent to `a x = b` on its consistent part, and the norm of
/// the part of `b` no `x` reaches.
pub(crate) fn row_basis(a: &DMatrix<f64>, b: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, f64) {
    if a.nrows() == 0 {
        return (DMatrix::zeros(0, a.ncols()), DVector::zeros(0), 0.0);
    }
    // aᵀ P = Q R, so (Pᵀ a) has leading rows R₁₁ᵀ Q₁ᵀ.
    let (q, r, perm, rank) = pivoted_qr(&a.transpose());
    let bp = perm.transpose() * b;
    let r11t = r.view((0, 0), (rank, rank)).transpose();
    let rhs = forward(&r11t, &bp.rows(0, rank).into_owned());
    let rows = q.columns(0, rank).transpose();
    let x0 = rows.transpose() * &rhs;
    let unreachable = (b - a * x0).norm();
    (rows, rhs, unreachable)
}

/// Minimum-norm solution of the consistent part of `a x = b`.
pub(crate) fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, rhs, _) = row_basis(a, b);
    rows.transpose() * rhs
}

/// Least squares `argmin |a x − b|`; dependent columns get zero weight.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(a.ncols());
    if a.nrows() == 0 || a.ncols() == 0 {
        return x;
    }
    let (q, r, perm, rank) = pivoted_qr(a);
    let qtb = q.columns(0, rank).transpose() * b;
    let mut y = qtb;
    for i in (0..rank).rev() {
        for j in i + 1..rank {
            y[i] -= r[(i, j)] * y[j];
        }
        y[i] /= r[(i, i)];
    }
    x.rows_mut(0, rank).copy_from(&y);
    perm * x
}

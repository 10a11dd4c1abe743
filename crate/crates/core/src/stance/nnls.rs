//! Lawson–Hanson non-negative least squares.

use nalgebra::{DMatrix, DVector};

use super::linalg::lstsq;

/// `argmin |A λ − b|` over `λ ≥ 0`, with the outer iteration count.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let max_outer = 3 * n + 10;
    let mut iterations = 0;

    while iterations < max_outer {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = next else { break };
        passive[j] = true;
        iterations += 1;

        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = a.select_columns(cols.iter());
            let s_p = lstsq(&sub, b);
            let mut s = DVector::zeros(n);
            for (k, &c) in cols.iter().enumerate() {
                s[c] = s_p[k];
            }
            if cols.iter().all(|&c| s[c] > 0.0) {
                x = s;
                break;
            }
            // Step toward s until the first passive variable hits zero.
            let alpha = cols
                .iter()
                .filter(|&&c| s[c] <= 0.0)
                .map(|&c| x[c] / (x[c] - s[c]))
                .fold(f64::INFINITY, f64::min);
            x += (&s - &x) * alpha;
            for &c in &cols {
                if x[c] <= 1e-15 * x.amax().max(1.0) {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    (x, iterations)
}

/// NNLS with per-group sum caps `Σ_{j∈group} λ_j ≤ cap`, enforced through a
/// slack column and a heavily weighted equality row per group.
pub(crate) fn nnls_with_caps(a: &DMatrix<f64>, b: &DVector<f64>, caps: &[(Vec<usize>, f64)]) -> (DVector<f64>, usize) {
    let (m, n) = a.shape();
    let weight = 1e6 * a.column_iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut big = DMatrix::zeros(m + caps.len(), n + caps.len());
    let mut rhs = DVector::zeros(m + caps.len());
    big.view_mut((0, 0), (m, n)).copy_from(a);
    rhs.rows_mut(0, m).copy_from(b);
    for (g, (cols, cap)) in caps.iter().enumerate() {
        for &c in cols {
            big[(m + g, c)] = weight;
        }
        big[(m + g, n + g)] = weight;
        rhs[m + g] = weight * cap;
    }
    let (x, it) = nnls(&big, &rhs);
    let mut lambda = x.rows(0, n).into_owned();
    // Remove the penalty's residual overshoot so the caps hold exactly.
    for (cols, cap) in caps {
        let sum: f64 = cols.iter().map(|&c| lambda[c]).sum();
        if sum > *cap {
            for &c in cols {
                lambda[c] *= cap / sum;
            }
        }
    }
    (lambda, it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_unconstrained_when_interior() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let (x, _) = nnls(&a, &DVector::from_column_slice(&[2.0, 3.0]));
        assert!((x - DVector::from_column_slice(&[2.0, 3.0])).norm() < 1e-12);
    }

    #[test]
    fn clips_negative_direction() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let (x, _) = nnls(&a, &DVector::from_column_slice(&[2.0, -3.0]));
        assert!((x - DVector::from_column_slice(&[2.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn cap_limits_group_sum() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let (x, _) = nnls_with_caps(&a, &DVector::from_column_slice(&[10.0]), &[(vec![0, 1], 4.0)]);
        assert!((x.sum() - 4.0).abs() < 1e-6);
        assert!(x.sum() <= 4.0);
    }
}

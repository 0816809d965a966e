//! Small dense linear-algebra helpers shared across modules.
//!
//! The subset rank tests enumerate millions of tiny matrices, so singular
//! values for narrow matrices are computed with a one-sided Jacobi sweep
//! instead of a general SVD. Jacobi keeps high relative accuracy on the
//! smallest singular value, which is what a tolerance-based rank decision
//! consumes.

use nalgebra::{DMatrix, DVector};

use crate::error::{BcsError, Result};

/// Singular values of `m`, descending. One-sided Jacobi on the narrower
/// side; falls back to nalgebra's SVD when both sides are wide.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let (r, c) = m.shape();
    if c <= r && c <= 12 {
        return jacobi_singular_values(m.clone());
    }
    if r < c && r <= 12 {
        return jacobi_singular_values(m.transpose());
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// One-sided Jacobi: orthogonalize column pairs until all mutual angles
/// vanish; column norms are then the singular values.
fn jacobi_singular_values(mut m: DMatrix<f64>) -> Vec<f64> {
    let c = m.ncols();
    if c == 0 {
        return Vec::new();
    }
    if c == 1 {
        return vec![m.column(0).norm()];
    }
    let eps = 1e-15;
    for _sweep in 0..40 {
        let mut off = false;
        for i in 0..c - 1 {
            for j in i + 1..c {
                let (mut a, mut b, mut g) = (0.0, 0.0, 0.0);
                for r in 0..m.nrows() {
                    let x = m[(r, i)];
                    let y = m[(r, j)];
                    a += x * x;
                    b += y * y;
                    g += x * y;
                }
                if g.abs() <= eps * (a * b).sqrt() || g == 0.0 {
                    continue;
                }
                off = true;
                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..m.nrows() {
                    let x = m[(r, i)];
                    let y = m[(r, j)];
                    m[(r, i)] = cs * x - sn * y;
                    m[(r, j)] = sn * x + cs * y;
                }
            }
        }
        if !off {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..c).map(|i| m.column(i).norm()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Number of singular values above `tol * sigma_max`. Zero matrices have
/// rank 0.
pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Least squares `argmin_x ||a x - b||` via QR; falls back to SVD when the
/// triangular factor looks rank-deficient or the system is underdetermined.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = a.shape();
    if rows >= cols && cols > 0 {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
        let diag_min = (0..cols).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if diag_max > 0.0 && diag_min > 1e-12 * diag_max {
            let qtb = qr.q().transpose() * b;
            if let Some(x) = r.solve_upper_triangular(&qtb) {
                return x;
            }
        }
    }
    lstsq_svd(a, b)
}

/// Minimum-norm least squares through the SVD pseudo-inverse.
pub fn lstsq_svd(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-12 * svd.singular_values.max())
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Eigen-decomposition of a symmetric matrix with pairs sorted by
/// descending eigenvalue.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Orthonormal basis for the column space of `m` (thin QR). Errors when a
/// column is numerically dependent on its predecessors.
pub fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(BcsError::shape(format!(
            "cannot orthonormalize {cols} columns in dimension {rows}"
        )));
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    for i in 0..cols {
        if r[(i, i)].abs() <= 1e-12 * diag_max.max(1e-300) {
            return Err(BcsError::Singular(format!(
                "column {i} is numerically dependent"
            )));
        }
    }
    Ok(qr.q())
}

/// Normalize every column to unit Euclidean norm. Errors on a zero column.
pub fn unit_normalize_columns(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = m.clone();
    for j in 0..out.ncols() {
        let norm = out.column(j).norm();
        if norm == 0.0 {
            return Err(BcsError::Degenerate(format!("column {j} has zero norm")));
        }
        out.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = crate::rng::rng_from_seed(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn jacobi_matches_nalgebra_svd() {
        for seed in 0..50 {
            let rows = 3 + (seed as usize % 6);
            let cols = 1 + (seed as usize % 4);
            let m = random_matrix(rows, cols, seed);
            let fast = singular_values(&m);
            let mut slow: Vec<f64> =
                m.clone().svd(false, false).singular_values.iter().copied().collect();
            slow.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_eq!(fast.len(), slow.len());
            for (f, s) in fast.iter().zip(slow.iter()) {
                assert_relative_eq!(f, s, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_resolves_tiny_singular_values() {
        // Columns: two independent, third = sum (exactly dependent).
        let mut m = random_matrix(8, 2, 99);
        let sum = m.column(0) + m.column(1);
        m = DMatrix::from_columns(&[m.column(0).into(), m.column(1).into(), sum.into()]);
        let sv = singular_values(&m);
        assert!(sv[2] <= 1e-14 * sv[0], "sv = {sv:?}");
    }

    #[test]
    fn rank_counts() {
        assert_eq!(rank_from_singular_values(&[0.0, 0.0], 1e-8), 0);
        assert_eq!(rank_from_singular_values(&[2.0, 1.0, 1e-12], 1e-8), 2);
        assert_eq!(rank_from_singular_values(&[], 1e-8), 0);
    }

    #[test]
    fn lstsq_solves_overdetermined() {
        let a = random_matrix(10, 4, 3);
        let x_true = DVector::from_fn(4, |i, _| i as f64 + 0.5);
        let b = &a * &x_true;
        let x = lstsq(&a, &b);
        assert_relative_eq!((x - x_true).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = random_matrix(6, 6, 11);
        let sym = &m * m.transpose();
        let (vals, vecs) = symmetric_eigen_sorted(&sym);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        // residual check on the leading pair
        let v0 = vecs.column(0).clone_owned();
        assert_relative_eq!((&sym * &v0 - vals[0] * &v0).norm(), 0.0, epsilon = 1e-8);
    }
}

//! Small dense helpers shared by the modules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{PencilError, Result};
use crate::pencil::JacobiMatrix;

/// Gauss rule (nodes, weights) of the leading `n x n` block of a Jacobi
/// matrix: eigenvalues and squared first eigenvector components.
pub fn golub_welsch(j3: &JacobiMatrix, n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(PencilError::InvalidParameter(
            "Gauss rule of order 0".into(),
        ));
    }
    let dense = j3.dense(n)?;
    let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 10_000).ok_or_else(|| {
        PencilError::NumericalFailure(format!(
            "tridiagonal eigensolver did not converge (n = {n})"
        ))
    })?;
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    rule.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = rule.iter().map(|&(_, w)| w).sum();
    for node in &mut rule {
        node.1 /= total;
    }
    Ok(rule)
}

/// Determinant by LU factorization with partial pivoting.
pub fn lu_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        if a[(pivot, k)] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap_rows(pivot, k);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    det
}

/// True when the symmetric matrix admits a Cholesky factorization.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

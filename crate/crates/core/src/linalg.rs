//! Thin wrappers over faer's dense Hermitian eigensolver.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("Hermitian eigensolver did not converge on a {dim}x{dim} block")]
pub struct EigenFailure {
    pub dim: usize,
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

fn to_mat(matrix: &[Vec<C64>]) -> Mat<C64> {
    let n = matrix.len();
    Mat::from_fn(n, n, |i, j| matrix[i][j])
}

pub fn hermitian_eigen(matrix: &[Vec<C64>]) -> Result<HermitianEigen, EigenFailure> {
    let n = matrix.len();
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: Vec::new() });
    }
    let evd = to_mat(matrix).self_adjoint_eigen(Side::Lower).map_err(|_| EigenFailure { dim: n })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|k| s[k].re).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| u[(i, k)]).collect()).collect();
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(matrix: &[Vec<C64>]) -> Result<Vec<f64>, EigenFailure> {
    let n = matrix.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let values = to_mat(matrix).self_adjoint_eigenvalues(Side::Lower).map_err(|_| EigenFailure { dim: n })?;
    Ok(values)
}

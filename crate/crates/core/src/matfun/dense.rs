//! Dense eigendecomposition oracle for small problems.

use faer::{Mat, Side};

use super::ExpansionKind;
use crate::{Error, Result};

/// Largest matrix dimension the dense oracle accepts.
pub const DENSE_CUTOFF: usize = 4096;

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn dense_eigh(h: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = h.nrows();
    if n > DENSE_CUTOFF {
        return Err(Error::TooLargeForDense { n, cutoff: DENSE_CUTOFF });
    }
    if h.ncols() != n {
        return Err(Error::InvalidParameter(format!("matrix is {}x{}, not square", n, h.ncols())));
    }
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidParameter(format!("eigendecomposition failed: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// `U diag(φ(λ)) Uᵀ`.
pub fn spectral_function(values: &[f64], vectors: &Mat<f64>, phi: impl Fn(f64) -> f64) -> Mat<f64> {
    let n = vectors.nrows();
    let scaled = Mat::from_fn(n, values.len(), |i, j| vectors[(i, j)] * phi(values[j]));
    &scaled * vectors.transpose()
}

/// `φ(H)` for one of the Fermi-Dirac functions. `Entropy` gives
/// `X log X + (I - X) log(I - X)` for `X = f_β(H)`, with `0·log 0 = 0`.
pub fn dense_matrix_function(h: &Mat<f64>, beta: f64, which: ExpansionKind) -> Result<Mat<f64>> {
    let (values, vectors) = dense_eigh(h)?;
    Ok(spectral_function(&values, &vectors, |x| which.eval_real(x, beta)))
}

/// Diagonal of `U diag(φ(λ)) Uᵀ` without forming the matrix.
pub fn spectral_diagonal(values: &[f64], vectors: &Mat<f64>, phi: impl Fn(f64) -> f64) -> Vec<f64> {
    let weights: Vec<f64> = values.iter().map(|&x| phi(x)).collect();
    (0..vectors.nrows())
        .map(|i| (0..values.len()).map(|j| vectors[(i, j)].powi(2) * weights[j]).sum())
        .collect()
}

use nalgebra::{DMatrix, SymmetricEigen};

use super::basis::MAX_DIMENSION;
use crate::error::{Error, Result};

/// Anything that exposes a real symmetric matrix in MHz.
pub trait HermitianOperator {
    fn matrix(&self) -> &DMatrix<f64>;
}

impl HermitianOperator for DMatrix<f64> {
    fn matrix(&self) -> &DMatrix<f64> {
        self
    }
}

impl HermitianOperator for super::SiteHamiltonian {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl HermitianOperator for super::JcChain {
    fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k belongs to `values[k]`.
    pub vectors: Option<DMatrix<f64>>,
    /// max_k ‖Hv_k − λ_k v_k‖, when vectors were requested.
    pub max_residual: Option<f64>,
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Fails unless max|H − Hᵀ| ≤ 1e-12·max|H| and every entry is finite.
pub fn check_hermitian(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain("eigenspectrum", "matrix is not square"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("eigenspectrum", "matrix has non-finite entries"));
    }
    let scale = max_abs(m);
    let n = m.nrows();
    let mut asymmetry = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asymmetry > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian { asymmetry, scale });
    }
    Ok(())
}

pub fn eigenspectrum<H: HermitianOperator + ?Sized>(h: &H, with_vectors: bool) -> Result<Spectrum> {
    let m = h.matrix();
    if m.nrows() > MAX_DIMENSION {
        return Err(Error::Dimension {
            dim: m.nrows(),
            limit: MAX_DIMENSION,
        });
    }
    check_hermitian(m)?;
    if m.nrows() == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            vectors: with_vectors.then(|| DMatrix::zeros(0, 0)),
            max_residual: with_vectors.then_some(0.0),
        });
    }
    if !with_vectors {
        let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok(Spectrum {
            values,
            vectors: None,
            max_residual: None,
        });
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);

    let residuals = m * &vectors - &vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&values));
    let max_residual = residuals.column_iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let limit = RESIDUAL_TOLERANCE * m.norm().max(f64::MIN_POSITIVE);
    if max_residual > limit {
        return Err(Error::Eigensolver {
            residual: max_residual,
            limit,
        });
    }
    Ok(Spectrum {
        values,
        vectors: Some(vectors),
        max_residual: Some(max_residual),
    })
}

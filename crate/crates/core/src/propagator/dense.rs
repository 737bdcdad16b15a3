use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{validate_times, Trajectory};
use crate::error::{Error, Result};
use crate::model::SparseOperator;
use crate::state::StateVector;

pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Full eigendecomposition `H = Q diag(E) Q^T` of a real symmetric operator.
pub struct DenseSpectrum {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn new(h: &SparseOperator, cap: usize) -> Result<Self> {
        if h.dim() > cap {
            return Err(Error::DimTooLarge { dim: h.dim(), cap });
        }
        h.check_hermitian()?;
        let eig = SymmetricEigen::new(h.to_dense());
        Ok(DenseSpectrum { energies: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    /// Eigenvalues in ascending order.
    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.energies.iter().copied().collect();
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }

    /// `Q^T psi`
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        let q = &self.vectors;
        (0..q.ncols()).map(|k| (0..q.nrows()).fold(C64::new(0.0, 0.0), |acc, i| acc + psi[i] * q[(i, k)])).collect()
    }

    pub fn propagate_coefficients(&self, coeffs: &[C64], t: f64) -> StateVector {
        let q = &self.vectors;
        let phased: Vec<C64> =
            coeffs.iter().enumerate().map(|(k, c)| c * C64::from_polar(1.0, -self.energies[k] * t)).collect();
        let mut out = StateVector::zeros(q.nrows());
        for (k, c) in phased.iter().enumerate() {
            for i in 0..q.nrows() {
                out[i] += c * q[(i, k)];
            }
        }
        out
    }

    pub fn propagate(&self, psi: &[C64], t: f64) -> StateVector {
        self.propagate_coefficients(&self.coefficients(psi), t)
    }
}

/// Spectral-decomposition propagation; exact up to roundoff.
pub fn full_diag_reference(h: &SparseOperator, psi0: &StateVector, times: &[f64], cap: usize) -> Result<Trajectory> {
    validate_times(times)?;
    if h.dim() != psi0.len() {
        return Err(Error::BasisMismatch(format!("operator dim {} vs state dim {}", h.dim(), psi0.len())));
    }
    let spec = DenseSpectrum::new(h, cap)?;
    let c0 = spec.coefficients(psi0);
    let states = times.iter().map(|&t| spec.propagate_coefficients(&c0, t)).collect();
    Ok(Trajectory { times: times.to_vec(), states, ..Default::default() })
}

//! Pure states and density matrices.

use num_complex::Complex64;

use crate::eig::eig_hermitian;
use crate::error::{QopError, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};
use crate::tolerance::Tolerances;

/// A unit vector in a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QopError::ShapeMismatch("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QopError::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Tolerances::DEFAULT.norm {
            return Err(QopError::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Scales a non-zero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QopError::NotNormalized(norm));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes)
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// |ψ⟩⟨ψ|.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QopError::ShapeMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(QopError::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(QopError::BadTrace(tr.re));
        }
        let min_eig = eig_hermitian(&matrix)?.values.last().copied().unwrap_or(0.0);
        if min_eig < -tol.psd {
            return Err(QopError::NotPositive(min_eig));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a state, symmetrizing away
    /// rounding noise.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// diag(p) for a probability vector `p`.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        check_distribution(probabilities, Tolerances::DEFAULT.distribution)?;
        Ok(Self {
            matrix: ComplexMatrix::from_real_diagonal(probabilities),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn is_pure(&self) -> bool {
        is_pure(self)
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let rho_psi = self.matrix.matvec(psi);
        psi.iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }
}

/// tr(ρ²), in `[1/dim, 1]` for valid states.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_pure(rho: &DensityMatrix) -> bool {
    purity(rho) >= 1.0 - Tolerances::DEFAULT.purity
}

pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(QopError::NotADistribution("empty".into()));
    }
    if let Some(bad) = p.iter().find(|&&x| !x.is_finite() || x < 0.0) {
        return Err(QopError::NotADistribution(format!("negative or non-finite weight {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(QopError::NotADistribution(format!("weights sum to {sum}")));
    }
    Ok(())
}

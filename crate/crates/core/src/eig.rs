//! Hermitian eigendecomposition.
//!
//! The heavy lifting is delegated to nalgebra's Hermitian (complex
//! symmetric) solver; this module fixes the ordering and phase conventions
//! so that output is deterministic.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{QopError, Result};
use crate::matrix::ComplexMatrix;
use crate::tolerance::Tolerances;

/// Eigenvalues sorted descending with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col_vec(k)
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            for r in 0..n {
                scaled[(r, c)] *= self.values[c];
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in descending order. Each eigenvector is rotated so
/// its first non-negligible component is real and positive; eigenvalues
/// that tie (within 1e-10) are ordered by those normalized vectors,
/// compared lexicographically on `(re, im)` and descending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(QopError::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let herm_err = m.hermiticity_error();
    if herm_err > Tolerances::DEFAULT.eig_hermiticity {
        return Err(QopError::NotHermitian(herm_err));
    }
    let n = m.rows();
    let eig = nalgebra::SymmetricEigen::new(m.hermitian_part().to_nalgebra());

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            (eig.eigenvalues[k], phase_normalize(v))
        })
        .collect();
    pairs.sort_by(|a, b| {
        let scale = 1.0f64.max(a.0.abs()).max(b.0.abs());
        if (a.0 - b.0).abs() <= 1e-10 * scale {
            lexicographic_desc(&a.1, &b.1)
        } else {
            b.0.total_cmp(&a.0)
        }
    });

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, (val, vec)) in pairs.into_iter().enumerate() {
        values.push(val);
        vectors.set_col(k, &vec);
    }
    Ok(HermitianEigen { values, vectors })
}

fn phase_normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        for z in &mut v {
            *z *= phase;
        }
    }
    v
}

fn lexicographic_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// exp(iH) for Hermitian H, computed spectrally so the result is unitary to
/// working precision.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for c in 0..n {
        let phase = Complex64::from_polar(1.0, eig.values[c]);
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    Ok(scaled.matmul(&eig.vectors.adjoint()))
}

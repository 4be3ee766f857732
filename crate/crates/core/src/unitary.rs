//! Orthonormalization and unitary completion.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QopError, Result};
use crate::matrix::{ComplexMatrix, ZERO};

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components of `v` along each (orthonormal) vector in
/// `basis`, twice for stability.
fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let coeff = inner(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= coeff * y;
            }
        }
    }
}

/// Extends a partial isometry to a full `n × n` unitary.
///
/// `fixed` pins column `col` to the given vector; the pinned vectors must
/// already be orthonormal. The free columns are filled in increasing index
/// order. With `rng = None` the candidates are standard basis vectors (the
/// one with the largest residual after projection wins, lowest index on
/// ties); with an RNG they are Gaussian random vectors.
pub fn complete_to_unitary<R: Rng + ?Sized>(
    n: usize,
    fixed: &[(usize, Vec<Complex64>)],
    mut rng: Option<&mut R>,
) -> Result<ComplexMatrix> {
    let mut taken = vec![false; n];
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (col, v) in fixed {
        if *col >= n || v.len() != n {
            return Err(QopError::ShapeMismatch(format!(
                "pinned column {col} of length {} does not fit a {n}x{n} unitary",
                v.len()
            )));
        }
        if taken[*col] {
            return Err(QopError::InvalidArgument(format!("column {col} pinned twice")));
        }
        for b in &basis {
            let overlap = inner(b, v).norm();
            if overlap > 1e-9 {
                return Err(QopError::NotUnitary(overlap));
            }
        }
        let nv = norm(v);
        if (nv - 1.0).abs() > 1e-9 {
            return Err(QopError::NotUnitary((nv - 1.0).abs()));
        }
        taken[*col] = true;
        basis.push(v.clone());
    }

    let mut out = ComplexMatrix::zeros(n, n);
    for (col, v) in fixed {
        out.set_col(*col, v);
    }
    let free: Vec<usize> = (0..n).filter(|&c| !taken[c]).collect();
    for col in free {
        let next = match rng.as_deref_mut() {
            Some(rng) => loop {
                let mut v: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                project_out(&mut v, &basis);
                let nv = norm(&v);
                if nv > 1e-6 {
                    break v.into_iter().map(|z| z / nv).collect::<Vec<_>>();
                }
            },
            None => {
                let mut best: Option<(f64, Vec<Complex64>)> = None;
                for k in 0..n {
                    let mut v = vec![ZERO; n];
                    v[k] = Complex64::new(1.0, 0.0);
                    project_out(&mut v, &basis);
                    let nv = norm(&v);
                    if best.as_ref().is_none_or(|(bn, _)| nv > *bn + 1e-12) {
                        best = Some((nv, v));
                    }
                }
                let (nv, v) = best.expect("n > 0");
                v.into_iter().map(|z| z / nv).collect()
            }
        };
        out.set_col(col, &next);
        basis.push(next);
    }
    Ok(out)
}

/// Haar-random unitary via Gram–Schmidt on a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        project_out(&mut v, &basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.into_iter().map(|z| z / nv).collect());
        }
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (c, v) in basis.iter().enumerate() {
        u.set_col(c, v);
    }
    u
}

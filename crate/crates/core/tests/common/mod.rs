#![allow(dead_code)]

use qop_core::{Complex64, ComplexMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Numerical rank by Gaussian elimination with full pivoting.
pub fn rank_by_elimination(rows: &[Vec<Complex64>], tol: f64) -> usize {
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    if m.is_empty() {
        return 0;
    }
    let ncols = m[0].len();
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut rank = 0;
    let mut used_cols = vec![false; ncols];
    while rank < m.len() {
        let mut best = (0.0, 0, 0);
        for (r, row) in m.iter().enumerate().skip(rank) {
            for (col, z) in row.iter().enumerate() {
                if !used_cols[col] && z.norm() > best.0 {
                    best = (z.norm(), r, col);
                }
            }
        }
        if best.0 <= tol * scale {
            break;
        }
        let (_, pr, pc) = best;
        m.swap(rank, pr);
        used_cols[pc] = true;
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[pc] / pivot_row[pc];
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= p * f;
            }
        }
        rank += 1;
    }
    rank
}

pub fn matrix_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let rows: Vec<Vec<Complex64>> = (0..m.rows()).map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect()).collect();
    rank_by_elimination(&rows, tol)
}

/// Channel action read straight off the Choi matrix:
/// `Φ(ρ)[a, b] = Σ_ij C[(i, a), (j, b)] ρ[i, j]`.
pub fn apply_via_choi(choi: &ComplexMatrix, d_in: usize, d_out: usize, rho: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_out, d_out, |a, b| {
        let mut s = c(0.0, 0.0);
        for i in 0..d_in {
            for j in 0..d_in {
                s += choi[(i * d_out + a, j * d_out + b)] * rho[(i, j)];
            }
        }
        s
    })
}

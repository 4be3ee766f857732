//! Residual and Jacobian of the mixed-environment fitting problem.
//!
//! For a joint unitary `U` on `initial ⊗ final` and a final-system initial
//! state `diag(p)`, the induced Choi matrix is `Σ_{j,k} p_k u_jk u_jk†`
//! where `u_jk[(i, a)] = U[(j, a), (i, k)]` (`j` is the traced-out initial
//! index, `k` the initial level of the final system).

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix, ZERO};

/// A fixed target channel and its dimensions.
#[derive(Debug, Clone)]
pub struct MixedEnvProblem {
    pub d: usize,
    pub d_fin: usize,
    target: Vec<Complex64>,
}

impl MixedEnvProblem {
    pub fn new(d: usize, d_fin: usize, target_choi: &ComplexMatrix) -> Self {
        assert_eq!(target_choi.rows(), d * d_fin);
        Self {
            d,
            d_fin,
            target: target_choi.as_slice().to_vec(),
        }
    }

    /// Side of the joint unitary (and of the Choi matrix).
    pub fn side(&self) -> usize {
        self.d * self.d_fin
    }

    /// Number of local step coordinates: one per Hermitian generator plus
    /// one logit per final-system level.
    pub fn n_params(&self) -> usize {
        self.side() * self.side() + self.d_fin
    }

    /// Length of the real residual vector (real parts, then imaginary).
    pub fn n_residuals(&self) -> usize {
        2 * self.side() * self.side()
    }

    fn u_vectors(&self, u: &ComplexMatrix) -> Vec<Vec<Complex64>> {
        let (d, df) = (self.d, self.d_fin);
        let mut out = Vec::with_capacity(d * df);
        for j in 0..d {
            for k in 0..df {
                let mut v = vec![ZERO; d * df];
                for i in 0..d {
                    for a in 0..df {
                        v[i * df + a] = u[(j * df + a, i * df + k)];
                    }
                }
                out.push(v);
            }
        }
        out
    }

    /// Per-level Choi pieces `C_k = Σ_j u_jk u_jk†`.
    fn level_chois(&self, vecs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let n = self.side();
        let df = self.d_fin;
        let mut out = vec![vec![ZERO; n * n]; df];
        for (idx, v) in vecs.iter().enumerate() {
            let k = idx % df;
            let ck = &mut out[k];
            for r in 0..n {
                if v[r] == ZERO {
                    continue;
                }
                for c in 0..n {
                    ck[r * n + c] += v[r] * v[c].conj();
                }
            }
        }
        out
    }

    pub fn choi(&self, u: &ComplexMatrix, p: &[f64]) -> ComplexMatrix {
        let n = self.side();
        let vecs = self.u_vectors(u);
        let levels = self.level_chois(&vecs);
        let mut data = vec![ZERO; n * n];
        for (ck, &pk) in levels.iter().zip(p) {
            for (x, y) in data.iter_mut().zip(ck) {
                *x += y * pk;
            }
        }
        ComplexMatrix::from_fn(n, n, |r, c| data[r * n + c])
    }

    /// Frobenius distance of the induced Choi matrix from the target.
    pub fn residual_norm(&self, u: &ComplexMatrix, p: &[f64]) -> f64 {
        self.choi(u, p)
            .as_slice()
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Real residual vector at (U, p).
    pub fn residuals(&self, u: &ComplexMatrix, p: &[f64]) -> Vec<f64> {
        let c = self.choi(u, p);
        let nn = self.side() * self.side();
        let mut r = vec![0.0; 2 * nn];
        for (idx, (a, b)) in c.as_slice().iter().zip(&self.target).enumerate() {
            let z = a - b;
            r[idx] = z.re;
            r[nn + idx] = z.im;
        }
        r
    }

    /// Residuals and the Jacobian (row-major, `n_residuals × n_params`) with
    /// respect to the local coordinates `U ← U exp(iH(h))` at `h = 0` and
    /// the logits `θ` with `p = softmax(θ)`.
    pub fn residuals_and_jacobian(&self, u: &ComplexMatrix, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.side();
        let nn = n * n;
        let (d, df) = (self.d, self.d_fin);
        let np = self.n_params();
        let vecs = self.u_vectors(u);
        let levels = self.level_chois(&vecs);

        let mut res = vec![0.0; 2 * nn];
        {
            let mut c = vec![ZERO; nn];
            for (ck, &pk) in levels.iter().zip(p) {
                for (x, y) in c.iter_mut().zip(ck) {
                    *x += y * pk;
                }
            }
            for idx in 0..nn {
                let z = c[idx] - self.target[idx];
                res[idx] = z.re;
                res[nn + idx] = z.im;
            }
        }

        let mut jac = vec![0.0; 2 * nn * np];
        let mut delta = vec![ZERO; nn];
        let i_unit = Complex64::new(0.0, 1.0);

        for (g, (l, m)) in generators(n).enumerate() {
            // columns of δU = U·iG that are non-zero, as (column, vector)
            let cols: Vec<(usize, Vec<Complex64>)> = match (l, m) {
                (l, m) if l == m => vec![(l, u.col_vec(l).into_iter().map(|z| z * i_unit).collect())],
                (l, m) if l < m => vec![
                    // G = E_lm + E_ml
                    (m, u.col_vec(l).into_iter().map(|z| z * i_unit).collect()),
                    (l, u.col_vec(m).into_iter().map(|z| z * i_unit).collect()),
                ],
                (hi, lo) => vec![
                    // G = i(E_lo,hi − E_hi,lo)
                    (hi, u.col_vec(lo).into_iter().map(|z| -z).collect()),
                    (lo, u.col_vec(hi)),
                ],
            };
            delta.iter_mut().for_each(|z| *z = ZERO);
            for (col, du) in &cols {
                let (i, k) = (col / df, col % df);
                let pk = p[k];
                for j in 0..d {
                    let v = &vecs[j * df + k];
                    for a in 0..df {
                        let x = du[j * df + a] * pk;
                        if x == ZERO {
                            continue;
                        }
                        let pos = i * df + a;
                        for q in 0..n {
                            let t = x * v[q].conj();
                            delta[pos * n + q] += t;
                            delta[q * n + pos] += t.conj();
                        }
                    }
                }
            }
            for idx in 0..nn {
                jac[idx * np + g] = delta[idx].re;
                jac[(nn + idx) * np + g] = delta[idx].im;
            }
        }

        for mth in 0..df {
            let col = nn + mth;
            for (k, ck) in levels.iter().enumerate() {
                let w = p[k] * (if k == mth { 1.0 } else { 0.0 } - p[mth]);
                if w == 0.0 {
                    continue;
                }
                for idx in 0..nn {
                    jac[idx * np + col] += ck[idx].re * w;
                    jac[(nn + idx) * np + col] += ck[idx].im * w;
                }
            }
        }
        (res, jac)
    }
}

/// Enumerates the Hermitian generator basis as index pairs: `(l, l)` is
/// `E_ll`, `(l, m)` with `l < m` is `E_lm + E_ml`, and `(m, l)` is
/// `i(E_lm − E_ml)` for the same `l < m`.
pub fn generators(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |l| (0..n).map(move |m| (l, m)))
}

/// The Hermitian matrix `Σ_g h_g G_g`.
pub fn hermitian_from_coords(n: usize, h: &[f64]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for ((l, m), &x) in generators(n).zip(h) {
        if l == m {
            out[(l, l)] += Complex64::new(x, 0.0);
        } else if l < m {
            out[(l, m)] += Complex64::new(x, 0.0);
            out[(m, l)] += Complex64::new(x, 0.0);
        } else {
            let (lo, hi) = (m, l);
            out[(lo, hi)] += Complex64::new(0.0, x);
            out[(hi, lo)] += Complex64::new(0.0, -x);
        }
    }
    out
}

/// Numerically safe softmax.
pub fn softmax(theta: &[f64]) -> Vec<f64> {
    let top = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - top).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

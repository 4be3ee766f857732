//! Unitary dilations: channels induced by a joint unitary on
//! `[initial, final, environment]` followed by tracing out everything but
//! the final system.
//!
//! With `d_env == 0` there is no auxiliary environment and the final system
//! alone carries the (possibly mixed) initial state; otherwise `env_state`
//! lives on `final ⊗ environment`.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::channel::{Channel, KrausSet};
use crate::eig::eig_hermitian;
use crate::error::{QopError, Result};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::state::{DensityMatrix, PureState};
use crate::tolerance::Tolerances;
use crate::unitary::complete_to_unitary;

/// A joint unitary plus the initial state of the non-input factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    d_in: usize,
    d_fin: usize,
    d_env: usize,
    unitary: ComplexMatrix,
    env_state: DensityMatrix,
}

impl Dilation {
    pub fn new(
        d_in: usize,
        d_fin: usize,
        d_env: usize,
        unitary: ComplexMatrix,
        env_state: DensityMatrix,
    ) -> Result<Self> {
        if d_in == 0 || d_fin == 0 {
            return Err(QopError::ShapeMismatch("system dimensions must be positive".into()));
        }
        let side = d_in
            .checked_mul(d_fin)
            .and_then(|n| n.checked_mul(d_env.max(1)))
            .unwrap_or(usize::MAX);
        if side > Tolerances::DEFAULT.max_dim {
            return Err(QopError::DimensionOverflow(side, Tolerances::DEFAULT.max_dim));
        }
        if unitary.rows() != side || unitary.cols() != side {
            return Err(QopError::ShapeMismatch(format!(
                "joint unitary must be {side}x{side}, got {}x{}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        if env_state.dim() != d_fin * d_env.max(1) {
            return Err(QopError::ShapeMismatch(format!(
                "initialized state has dimension {}, expected {}",
                env_state.dim(),
                d_fin * d_env.max(1)
            )));
        }
        let err = unitary.unitarity_error();
        if err > Tolerances::DEFAULT.unitarity {
            return Err(QopError::NotUnitary(err));
        }
        Ok(Self {
            d_in,
            d_fin,
            d_env,
            unitary,
            env_state,
        })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_fin(&self) -> usize {
        self.d_fin
    }

    /// Auxiliary environment dimension; 0 when absent.
    pub fn d_env(&self) -> usize {
        self.d_env
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn env_state(&self) -> &DensityMatrix {
        &self.env_state
    }

    /// Subsystem dims of the joint space, `[initial, final]` or
    /// `[initial, final, environment]`.
    pub fn joint_dims(&self) -> Vec<usize> {
        if self.d_env == 0 {
            vec![self.d_in, self.d_fin]
        } else {
            vec![self.d_in, self.d_fin, self.d_env]
        }
    }

    fn with_env_state(&self, env_state: DensityMatrix) -> Self {
        Self {
            env_state,
            ..self.clone()
        }
    }

    /// Kraus operators of the induced map, one per (environment eigenvector,
    /// traced-out basis state).
    fn kraus_operators(&self) -> Result<Vec<ComplexMatrix>> {
        let block = self.d_fin * self.d_env.max(1);
        let env_dim = self.d_env.max(1);
        let eig = eig_hermitian(self.env_state.matrix())?;
        let mut ops = Vec::new();
        for (k, &p) in eig.values.iter().enumerate() {
            if p <= Tolerances::DEFAULT.env_weight {
                continue;
            }
            let e = eig.vector(k);
            // images[i] = U (|i⟩ ⊗ |e_k⟩)
            let images: Vec<Vec<Complex64>> = (0..self.d_in)
                .map(|i| {
                    let mut col = vec![ZERO; self.unitary.rows()];
                    for (f, &amp) in e.iter().enumerate() {
                        if amp == ZERO {
                            continue;
                        }
                        let c = i * block + f;
                        for (r, out) in col.iter_mut().enumerate() {
                            *out += self.unitary[(r, c)] * amp;
                        }
                    }
                    col
                })
                .collect();
            let s = p.sqrt();
            for j in 0..self.d_in {
                for m in 0..env_dim {
                    ops.push(ComplexMatrix::from_fn(self.d_fin, self.d_in, |a, i| {
                        images[i][(j * self.d_fin + a) * env_dim + m] * s
                    }));
                }
            }
        }
        Ok(ops)
    }
}

/// The channel ρ ↦ tr_{initial, env}[U (ρ ⊗ env_state) U†].
pub fn channel_from_dilation(d: &Dilation) -> Result<Channel> {
    let err = d.unitary.unitarity_error();
    if err > Tolerances::DEFAULT.unitarity {
        return Err(QopError::NotUnitary(err));
    }
    Channel::from_kraus(KrausSet::new(d.d_in, d.d_fin, d.kraus_operators()?)?)
}

/// Pure-environment dilation of a (minimal) Kraus set.
///
/// The input is mapped by `|i⟩|0'⟩|0⟩ ↦ |0⟩ ⊗ Σ_m E_m|i⟩ ⊗ |m⟩`, so the
/// environment has one level per Kraus operator. The isometry is completed
/// to a unitary deterministically from the standard basis.
pub fn stinespring_from_kraus(k: &KrausSet) -> Result<Dilation> {
    stinespring_with_completion(k, None)
}

/// [`stinespring_from_kraus`] with the unused columns filled from a seeded
/// random source instead of the standard basis.
pub fn stinespring_from_kraus_seeded(k: &KrausSet, seed: u64) -> Result<Dilation> {
    let mut rng = crate::random::stream_rng(seed, 0);
    stinespring_with_completion(k, Some(&mut rng))
}

fn stinespring_with_completion(k: &KrausSet, rng: Option<&mut ChaCha8Rng>) -> Result<Dilation> {
    let (d_in, d_fin, r) = (k.d_in(), k.d_out(), k.len());
    let n = d_in * d_fin * r;
    if n > Tolerances::DEFAULT.max_dim {
        return Err(QopError::DimensionOverflow(n, Tolerances::DEFAULT.max_dim));
    }
    let fixed: Vec<(usize, Vec<Complex64>)> = (0..d_in)
        .map(|i| {
            let mut v = vec![ZERO; n];
            for (m, e) in k.operators().iter().enumerate() {
                for a in 0..d_fin {
                    v[a * r + m] = e[(a, i)];
                }
            }
            (i * d_fin * r, v)
        })
        .collect();
    let unitary = complete_to_unitary(n, &fixed, rng)?;
    let env_state = PureState::basis(d_fin * r, 0).density();
    Dilation::new(d_in, d_fin, r, unitary, env_state)
}

/// One pure-environment branch of a mixed-environment dilation.
#[derive(Debug, Clone)]
pub struct SpectralComponent {
    pub weight: f64,
    pub env_basis_state: PureState,
    pub channel: Channel,
}

/// Splits a dilation by the spectral decomposition of its initialized
/// state; the weighted mixture of the component channels is the original
/// channel. Eigenvalues at or below 1e-12 are dropped and the remaining
/// weights renormalized.
pub fn decompose_mixed_env(d: &Dilation) -> Result<Vec<SpectralComponent>> {
    let eig = eig_hermitian(d.env_state.matrix())?;
    let kept: Vec<(f64, Vec<Complex64>)> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > Tolerances::DEFAULT.env_weight)
        .map(|(k, &p)| (p, eig.vector(k)))
        .collect();
    let total: f64 = kept.iter().map(|(p, _)| p).sum();
    kept.into_iter()
        .map(|(p, v)| {
            let state = PureState::normalized(v)?;
            let channel = channel_from_dilation(&d.with_env_state(state.density()))?;
            Ok(SpectralComponent {
                weight: p / total,
                env_basis_state: state,
                channel,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{distance, mix};
    use crate::matrix::swap;

    #[test]
    fn identity_unitary_gives_reset_channel() {
        let d = Dilation::new(2, 2, 0, ComplexMatrix::identity(4), PureState::basis(2, 0).density()).unwrap();
        let ch = channel_from_dilation(&d).unwrap();
        let out = ch.apply(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(out.matrix().distance(PureState::basis(2, 0).density().matrix()) < 1e-14);
        let out = ch.apply(&PureState::basis(2, 1).density()).unwrap();
        assert!(out.matrix().distance(PureState::basis(2, 0).density().matrix()) < 1e-14);
    }

    #[test]
    fn swap_gives_identity_channel() {
        let d = Dilation::new(2, 2, 0, swap(2), PureState::basis(2, 0).density()).unwrap();
        let ch = channel_from_dilation(&d).unwrap();
        assert!(distance(&ch, &Channel::identity(2)).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let mut u = ComplexMatrix::identity(4);
        u[(0, 0)] = Complex64::new(2.0, 0.0);
        let err = Dilation::new(2, 2, 0, u, PureState::basis(2, 0).density()).unwrap_err();
        assert!(err.to_string().contains("not unitary"));
    }

    #[test]
    fn identity_channel_needs_one_env_level() {
        let d = stinespring_from_kraus(Channel::identity(2).kraus()).unwrap();
        assert_eq!(d.d_env(), 1);
        let back = channel_from_dilation(&d).unwrap();
        assert!(distance(&back, &Channel::identity(2)).unwrap() < 1e-12);
    }

    #[test]
    fn pure_env_single_component() {
        let d = Dilation::new(2, 2, 0, swap(2), PureState::basis(2, 1).density()).unwrap();
        let comps = decompose_mixed_env(&d).unwrap();
        assert_eq!(comps.len(), 1);
        assert!((comps[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_env_with_identity_splits_into_resets() {
        let d = Dilation::new(2, 3, 0, ComplexMatrix::identity(6), DensityMatrix::maximally_mixed(3)).unwrap();
        let comps = decompose_mixed_env(&d).unwrap();
        assert_eq!(comps.len(), 3);
        let probe = DensityMatrix::maximally_mixed(2);
        for c in &comps {
            assert!((c.weight - 1.0 / 3.0).abs() < 1e-14);
            // constant channel onto the component's own basis projector
            let out = c.channel.apply(&probe).unwrap();
            assert!(out.matrix().distance(c.env_basis_state.density().matrix()) < 1e-12);
        }
        let channels: Vec<Channel> = comps.iter().map(|c| c.channel.clone()).collect();
        let weights: Vec<f64> = comps.iter().map(|c| c.weight).collect();
        let m = mix(&channels, &weights).unwrap();
        assert!(distance(&m, &channel_from_dilation(&d).unwrap()).unwrap() < 1e-12);
    }
}

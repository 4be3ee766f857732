//! Seeded random states, channels and dilations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{Channel, KrausSet};
use crate::matrix::ComplexMatrix;
use crate::state::{DensityMatrix, PureState};
use crate::unitary::haar_unitary;

/// Deterministic generator for stream `stream` of base seed `seed`.
///
/// Independent streams let parallel workers reproduce a serial run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniformly (Haar) distributed pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Induced-measure mixed state: G G† / tr for a `dim × rank` Ginibre G.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, rank.max(1), |_, _| gaussian(rng));
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    DensityMatrix::from_trusted(gg.scale_real(1.0 / tr))
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Kraus operators of a Haar-induced random channel: the first `d_in`
/// columns of a Haar unitary on `d_out · n_kraus`, read as an isometry into
/// output ⊗ environment.
pub fn random_kraus<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> KrausSet {
    assert!(d_out * n_kraus >= d_in, "isometry needs d_out * n_kraus >= d_in");
    let u = haar_unitary(d_out * n_kraus, rng);
    let ops = (0..n_kraus)
        .map(|m| ComplexMatrix::from_fn(d_out, d_in, |a, i| u[(a * n_kraus + m, i)]))
        .collect();
    KrausSet::new(d_in, d_out, ops).expect("isometry columns give a trace-preserving set")
}

/// Haar-induced random channel with the generic Kraus rank `d_in · d_out`.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Channel {
    Channel::from_kraus(random_kraus(d_in, d_out, d_in * d_out, rng))
        .expect("random Kraus set is valid")
}

mod common;

use common::{apply_via_choi, c, matrix_rank, rank_by_elimination};
use proptest::prelude::*;
use qop_core::random::{random_channel, random_density_matrix, random_distribution, random_kraus, random_pure_state, stream_rng};
use qop_core::unitary::{complete_to_unitary, haar_unitary};
use qop_core::{
    build_counterexample, choi_to_kraus, is_extremal, kraus_to_choi, mix, purity, Channel, ChoiMatrix, Complex64,
    ComplexMatrix, CounterexampleParams, DensityMatrix, KrausSet,
};

/// Channel that sends `|φ⟩⟨φ|` to `|ψ⟩⟨ψ|` but acts randomly elsewhere:
/// `ρ ↦ W Q(V† ρ V) W†` where `Q` fixes `|0⟩⟨0|`, `V|0⟩ = |φ⟩`, `W|0⟩ = |ψ⟩`.
fn channel_fixing<R: rand::Rng>(phi: &[Complex64], psi: &[Complex64], n_kraus: usize, rng: &mut R) -> Channel {
    let d = phi.len();
    let n = d * n_kraus;
    let mut e0 = vec![c(0.0, 0.0); n];
    e0[0] = c(1.0, 0.0);
    let iso = complete_to_unitary(n, &[(0, e0)], Some(rng)).unwrap();
    let v = complete_to_unitary(d, &[(0, phi.to_vec())], Some(rng)).unwrap();
    let w = complete_to_unitary(d, &[(0, psi.to_vec())], Some(rng)).unwrap();
    let ops = (0..n_kraus)
        .map(|m| {
            let q = ComplexMatrix::from_fn(d, d, |a, i| iso[(a * n_kraus + m, i)]);
            w.matmul(&q).matmul(&v.adjoint())
        })
        .collect();
    Channel::from_kraus(KrausSet::new(d, d, ops).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn choi_round_trip(seed in any::<u64>(), d_in in 1usize..4, d_out in 1usize..4, extra in 0usize..4) {
        let mut rng = stream_rng(seed, 0);
        let n_kraus = d_in.div_ceil(d_out) + extra;
        let k = random_kraus(d_in, d_out, n_kraus, &mut rng);
        let choi = kraus_to_choi(&k);
        choi.validate().unwrap();
        let back = choi_to_kraus(&choi).unwrap();
        prop_assert!(back.len() <= d_in * d_out);
        prop_assert!(kraus_to_choi(&back).matrix().distance(choi.matrix()) < 1e-9);
        prop_assert_eq!(back.len(), matrix_rank(choi.matrix(), 1e-9));
    }

    #[test]
    fn kraus_action_matches_choi_contraction(seed in any::<u64>(), d_in in 1usize..4, d_out in 1usize..4) {
        let mut rng = stream_rng(seed, 1);
        let ch = random_channel(d_in, d_out, &mut rng);
        let rho = random_density_matrix(d_in, d_in, &mut rng);
        let out = ch.apply(&rho).unwrap();
        let oracle = apply_via_choi(ch.choi().matrix(), d_in, d_out, rho.matrix());
        prop_assert!(out.matrix().distance(&oracle) < 1e-10);
        // valid output state
        prop_assert!(out.matrix().hermiticity_error() < 1e-10);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        let e = qop_core::eig_hermitian(&out.matrix().hermitian_part()).unwrap();
        prop_assert!(e.values.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn mix_commutes_with_apply(seed in any::<u64>(), count in 1usize..5, d in 1usize..4) {
        let mut rng = stream_rng(seed, 2);
        let channels: Vec<Channel> = (0..count).map(|_| random_channel(d, d, &mut rng)).collect();
        let w = random_distribution(count, &mut rng);
        let rho = random_density_matrix(d, d, &mut rng);
        let mixed = mix(&channels, &w).unwrap().apply(&rho).unwrap();
        let mut expect = ComplexMatrix::zeros(d, d);
        for (ch, &wi) in channels.iter().zip(&w) {
            expect = &expect + &ch.apply(&rho).unwrap().matrix().scale_real(wi);
        }
        prop_assert!(mixed.matrix().distance(&expect) < 1e-10);
    }
}

#[test]
fn purity_lemma_on_constructed_mixtures() {
    let mut violations = 0;
    for s in 0..100u64 {
        let mut rng = stream_rng(0x5eed, s);
        let d = 2 + (s as usize % 3);
        let phi = random_pure_state(d, &mut rng);
        let psi = random_pure_state(d, &mut rng);
        let a = channel_fixing(phi.amplitudes(), psi.amplitudes(), 2, &mut rng);
        let b = channel_fixing(phi.amplitudes(), psi.amplitudes(), 3, &mut rng);
        let w = 0.05 + 0.9 * rand::Rng::random::<f64>(&mut rng);
        let input = phi.density();
        let out = mix(&[a.clone(), b.clone()], &[w, 1.0 - w]).unwrap().apply(&input).unwrap();
        assert!(purity(&out) >= 1.0 - 1e-12, "construction must give a pure image");
        for comp in [&a, &b] {
            if comp.apply(&input).unwrap().matrix().distance(out.matrix()) > 1e-6 {
                violations += 1;
            }
        }
        // the components act differently away from |φ⟩
        let other = DensityMatrix::maximally_mixed(d);
        assert!(a.apply(&other).unwrap().matrix().distance(b.apply(&other).unwrap().matrix()) > 1e-6);
    }
    assert_eq!(violations, 0);
}

#[test]
fn mixing_distinct_pure_images_is_never_pure() {
    for s in 0..50u64 {
        let mut rng = stream_rng(0xfeed, s);
        let phi = random_pure_state(2, &mut rng);
        let a = channel_fixing(phi.amplitudes(), random_pure_state(2, &mut rng).amplitudes(), 2, &mut rng);
        let b = channel_fixing(phi.amplitudes(), random_pure_state(2, &mut rng).amplitudes(), 2, &mut rng);
        let out = mix(&[a, b], &[0.5, 0.5]).unwrap().apply(&phi.density()).unwrap();
        assert!(purity(&out) < 1.0 - 1e-12);
    }
}

fn counterexample_2x2() -> Channel {
    let p = CounterexampleParams::new(2, 2, DensityMatrix::diagonal(&[0.5, 0.5]).unwrap()).unwrap();
    build_counterexample(&p).unwrap()
}

#[test]
fn counterexample_choi_rank_by_elimination() {
    let ch = counterexample_2x2();
    // rank (d − 1) + rank(ρ') = 1 + 2
    assert_eq!(matrix_rank(ch.choi().matrix(), 1e-9), 3);
    assert_eq!(choi_to_kraus(ch.choi()).unwrap().len(), 3);
    assert_eq!(ch.kraus_rank(), 3);
}

/// Choi's criterion evaluated by brute force: rank of the vectorized
/// products `E_i† E_j`.
fn extremal_oracle(k: &KrausSet) -> bool {
    let ops = k.operators();
    let rows: Vec<Vec<Complex64>> = ops
        .iter()
        .flat_map(|a| ops.iter().map(move |b| a.adjoint().matmul(b).as_slice().to_vec()))
        .collect();
    rank_by_elimination(&rows, 1e-9) == ops.len() * ops.len()
}

#[test]
fn extremality_matches_gram_rank_oracle() {
    let cex = counterexample_2x2();
    assert_eq!(is_extremal(cex.kraus()), extremal_oracle(cex.kraus()));
    assert!(!is_extremal(cex.kraus()));

    let mut rng = stream_rng(77, 0);
    for _ in 0..30 {
        let u = Channel::unitary(&haar_unitary(3, &mut rng)).unwrap();
        assert!(is_extremal(u.kraus()) && extremal_oracle(u.kraus()));
        for r in 1..=3 {
            // rank-r channels on a qutrit: extremal generically when r² ≤ 9
            let ch = Channel::from_kraus(random_kraus(3, 3, r, &mut rng)).unwrap();
            assert_eq!(is_extremal(ch.kraus()), extremal_oracle(ch.kraus()), "rank {r}");
        }
        let full = random_channel(2, 2, &mut rng);
        assert!(!is_extremal(full.kraus()) && !extremal_oracle(full.kraus()));
    }
}

#[test]
fn choi_to_kraus_rejects_invalid_input() {
    let mut bad = ComplexMatrix::identity(4);
    bad[(0, 0)] = c(-1.0, 0.0);
    let err = choi_to_kraus(&ChoiMatrix::new(2, 2, bad).unwrap()).unwrap_err();
    assert!(err.to_string().contains("not completely positive"));
    let scaled = ComplexMatrix::identity(4).scale_real(2.0);
    let err = choi_to_kraus(&ChoiMatrix::new(2, 2, scaled).unwrap()).unwrap_err();
    assert!(err.to_string().contains("not trace preserving"));
}

//! Kraus and Choi representations of quantum operations.
//!
//! Choi matrices are unnormalized with the input factor first:
//! `C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, so `C[(i·d_out + a), (j·d_out + b)]` is
//! `⟨a|Φ(|i⟩⟨j|)|b⟩`, `tr C = d_in`, and trace preservation reads
//! `tr_out C = I`.

use crate::eig::eig_hermitian;
use crate::error::{QopError, Result};
use crate::matrix::{partial_trace, ComplexMatrix, ZERO};
use crate::state::{check_distribution, DensityMatrix};
use crate::tolerance::Tolerances;

/// Operators `E_k : C^d_in → C^d_out` with `Σ E_k†E_k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    d_in: usize,
    d_out: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(d_in: usize, d_out: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(d_in, d_out, operators, Tolerances::DEFAULT.trace_preservation)
    }

    /// Like [`KrausSet::new`] with an explicit trace-preservation slack.
    pub fn with_tolerance(d_in: usize, d_out: usize, operators: Vec<ComplexMatrix>, tp_tol: f64) -> Result<Self> {
        if operators.is_empty() {
            return Err(QopError::EmptyKraus);
        }
        if d_in == 0 || d_out == 0 {
            return Err(QopError::ShapeMismatch("dimensions must be positive".into()));
        }
        for (k, e) in operators.iter().enumerate() {
            if e.rows() != d_out || e.cols() != d_in {
                return Err(QopError::ShapeMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {d_out}x{d_in}",
                    e.rows(),
                    e.cols()
                )));
            }
        }
        let k = Self {
            d_in,
            d_out,
            operators,
        };
        let dev = k.trace_preservation_error();
        if dev > tp_tol {
            return Err(QopError::NotTracePreserving(dev));
        }
        Ok(k)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Largest entrywise deviation of Σ E†E from the identity.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d_in, self.d_in);
        for e in &self.operators {
            sum = &sum + &e.adjoint().matmul(e);
        }
        (&sum - &ComplexMatrix::identity(self.d_in)).max_abs()
    }
}

/// Choi matrix of a channel `d_in → d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Checks only the shape; [`ChoiMatrix::validate`] checks CP and TP.
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let side = d_in * d_out;
        if side == 0 || matrix.rows() != side || matrix.cols() != side {
            return Err(QopError::ShapeMismatch(format!(
                "Choi matrix for {d_in}->{d_out} must be {side}x{side}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { d_in, d_out, matrix })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Complete positivity and trace preservation at the default slack.
    pub fn validate(&self) -> Result<()> {
        let tol = Tolerances::DEFAULT;
        let herm = self.matrix.hermiticity_error();
        if herm > tol.eig_hermiticity {
            return Err(QopError::NotCompletelyPositive(-herm));
        }
        let min_eig = eig_hermitian(&self.matrix)?.values.last().copied().unwrap_or(0.0);
        if min_eig < -tol.psd {
            return Err(QopError::NotCompletelyPositive(min_eig));
        }
        let reduced = partial_trace(&self.matrix, &[self.d_in, self.d_out], &[0])?;
        let dev = (&reduced - &ComplexMatrix::identity(self.d_in)).max_abs();
        if dev > tol.trace_preservation {
            return Err(QopError::NotTracePreserving(dev));
        }
        Ok(())
    }
}

/// A quantum operation with consistent Kraus and Choi forms. The Kraus set
/// held here is always minimal (one operator per non-zero Choi eigenvalue).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: KrausSet,
    choi: ChoiMatrix,
}

impl Channel {
    pub fn from_kraus(k: KrausSet) -> Result<Self> {
        let choi = kraus_to_choi(&k);
        let kraus = choi_to_kraus(&choi)?;
        Ok(Self { kraus, choi })
    }

    pub fn from_choi(choi: ChoiMatrix) -> Result<Self> {
        let kraus = choi_to_kraus(&choi)?;
        let choi = ChoiMatrix {
            matrix: choi.matrix.hermitian_part(),
            ..choi
        };
        Ok(Self { kraus, choi })
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(&ComplexMatrix::identity(d)).expect("identity is unitary")
    }

    /// ρ ↦ UρU†.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(QopError::ShapeMismatch("unitary must be square".into()));
        }
        let err = u.unitarity_error();
        if err > Tolerances::DEFAULT.unitarity {
            return Err(QopError::NotUnitary(err));
        }
        let d = u.rows();
        Self::from_kraus(KrausSet::new(d, d, vec![u.clone()])?)
    }

    pub fn d_in(&self) -> usize {
        self.kraus.d_in
    }

    pub fn d_out(&self) -> usize {
        self.kraus.d_out
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    pub fn choi(&self) -> &ChoiMatrix {
        &self.choi
    }

    /// Number of Kraus operators in a minimal representation.
    pub fn kraus_rank(&self) -> usize {
        self.kraus.len()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply(self, rho)
    }

    /// Φ(M) for an arbitrary d_in × d_in operator M (linear extension).
    pub fn apply_operator(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.d_in() || m.cols() != self.d_in() {
            return Err(QopError::ShapeMismatch(format!(
                "operator is {}x{}, channel input dimension is {}",
                m.rows(),
                m.cols(),
                self.d_in()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d_out(), self.d_out());
        for e in &self.kraus.operators {
            out = &out + &e.matmul(m).matmul(&e.adjoint());
        }
        Ok(out)
    }

    /// Image of the matrix unit |i⟩⟨j|, read straight off the Choi matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> ComplexMatrix {
        let d_out = self.d_out();
        ComplexMatrix::from_fn(d_out, d_out, |a, b| {
            self.choi.matrix[(i * d_out + a, j * d_out + b)]
        })
    }
}

/// Choi matrix Σ_k |E_k⟩⟩⟨⟨E_k| with |E⟩⟩[(i, a)] = E[a, i].
pub fn kraus_to_choi(k: &KrausSet) -> ChoiMatrix {
    let (d_in, d_out) = (k.d_in, k.d_out);
    let side = d_in * d_out;
    let mut m = ComplexMatrix::zeros(side, side);
    let mut v = vec![ZERO; side];
    for e in &k.operators {
        for i in 0..d_in {
            for a in 0..d_out {
                v[i * d_out + a] = e[(a, i)];
            }
        }
        for r in 0..side {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..side {
                m[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    ChoiMatrix { d_in, d_out, matrix: m }
}

/// Minimal Kraus set from the spectral decomposition of a Choi matrix;
/// eigenvalues at or below 1e-10 are dropped.
pub fn choi_to_kraus(c: &ChoiMatrix) -> Result<KrausSet> {
    c.validate()?;
    let (d_in, d_out) = (c.d_in, c.d_out);
    let eig = eig_hermitian(&c.matrix)?;
    let ops: Vec<ComplexMatrix> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| lambda > Tolerances::DEFAULT.kraus_rank)
        .map(|(k, &lambda)| {
            let s = lambda.sqrt();
            let w = eig.vector(k);
            ComplexMatrix::from_fn(d_out, d_in, |a, i| w[i * d_out + a] * s)
        })
        .collect();
    // dropped eigenvalues can shift Σ E†E by up to their sum
    KrausSet::with_tolerance(d_in, d_out, ops, 1e-8)
}

/// Σ_k E_k ρ E_k†.
pub fn apply(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.d_in() {
        return Err(QopError::ShapeMismatch(format!(
            "state has dimension {}, channel input dimension is {}",
            rho.dim(),
            ch.d_in()
        )));
    }
    Ok(DensityMatrix::from_trusted(ch.apply_operator(rho.matrix())?))
}

/// Convex combination Σ w_k Φ_k, formed on the Choi matrices.
pub fn mix(channels: &[Channel], weights: &[f64]) -> Result<Channel> {
    let first = channels
        .first()
        .ok_or_else(|| QopError::InvalidArgument("mix needs at least one channel".into()))?;
    if channels.len() != weights.len() {
        return Err(QopError::ShapeMismatch(format!(
            "{} channels but {} weights",
            channels.len(),
            weights.len()
        )));
    }
    let dims = (first.d_in(), first.d_out());
    if let Some(bad) = channels.iter().find(|c| (c.d_in(), c.d_out()) != dims) {
        return Err(QopError::ShapeMismatch(format!(
            "cannot mix {}->{} with {}->{}",
            dims.0,
            dims.1,
            bad.d_in(),
            bad.d_out()
        )));
    }
    check_distribution(weights, Tolerances::DEFAULT.distribution)?;
    let side = dims.0 * dims.1;
    let mut acc = ComplexMatrix::zeros(side, side);
    for (ch, &w) in channels.iter().zip(weights) {
        acc = &acc + &ch.choi.matrix.scale_real(w);
    }
    Channel::from_choi(ChoiMatrix::new(dims.0, dims.1, acc)?)
}

/// Frobenius distance between Choi matrices; zero iff the maps coincide.
pub fn distance(a: &Channel, b: &Channel) -> Result<f64> {
    if (a.d_in(), a.d_out()) != (b.d_in(), b.d_out()) {
        return Err(QopError::ShapeMismatch(format!(
            "cannot compare {}->{} with {}->{}",
            a.d_in(),
            a.d_out(),
            b.d_in(),
            b.d_out()
        )));
    }
    Ok(a.choi.matrix.distance(&b.choi.matrix))
}

/// Choi's extremality test: the products {E_i†E_j} are linearly
/// independent. Expects a minimal Kraus set.
///
/// Independence is judged on the singular values of the stacked, vectorized
/// products (relative cutoff 1e-8).
pub fn is_extremal(k: &KrausSet) -> bool {
    let r = k.len();
    let d = k.d_in;
    // r² vectors cannot be independent in a d²-dimensional space
    if r * r > d * d {
        return false;
    }
    let adj: Vec<ComplexMatrix> = k.operators.iter().map(|e| e.adjoint()).collect();
    let products: Vec<ComplexMatrix> = (0..r)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .map(|(i, j)| adj[i].matmul(&k.operators[j]))
        .collect();
    let n = products.len();
    let gram = ComplexMatrix::from_fn(n, n, |p, q| {
        products[p]
            .as_slice()
            .iter()
            .zip(products[q].as_slice())
            .map(|(x, y)| x.conj() * y)
            .sum()
    });
    let eig = match eig_hermitian(&gram) {
        Ok(e) => e,
        Err(_) => return false,
    };
    let sigma: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return false;
    }
    let rank = sigma
        .iter()
        .filter(|&&s| s > Tolerances::DEFAULT.extremal_rank * top)
        .count();
    rank == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli_x, ONE};
    use crate::state::PureState;
    use num_complex::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_projector_times_two(phi_plus: bool) -> ComplexMatrix {
        let v = if phi_plus {
            [ONE, ZERO, ZERO, ONE]
        } else {
            [ZERO, ONE, ONE, ZERO]
        };
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn identity_choi_is_twice_bell_projector() {
        let ch = Channel::identity(2);
        assert!(ch.choi().matrix().distance(&bell_projector_times_two(true)) < 1e-15);
        assert!((ch.choi().matrix().trace().re - 2.0).abs() < 1e-15);
        assert_eq!(ch.kraus_rank(), 1);
    }

    #[test]
    fn reset_to_zero_choi() {
        // E_i = |0'⟩⟨i|: Φ(|i⟩⟨j|) = δ_ij |0'⟩⟨0'|, so C = I₂ ⊗ |0'⟩⟨0'|
        let ops = (0..2)
            .map(|i| ComplexMatrix::from_fn(2, 2, |a, c| if a == 0 && c == i { ONE } else { ZERO }))
            .collect();
        let k = KrausSet::new(2, 2, ops).unwrap();
        let choi = kraus_to_choi(&k);
        let want = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 1.0, 0.0]);
        assert!(choi.matrix().distance(&want) < 1e-15);
    }

    #[test]
    fn unitary_channel_has_rank_one() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = ComplexMatrix::from_row_major(2, 2, vec![c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)]).unwrap();
        let ch = Channel::unitary(&had).unwrap();
        assert_eq!(ch.kraus_rank(), 1);
    }

    #[test]
    fn identity_round_trip_gives_phase_identity() {
        let ch = Channel::identity(3);
        let k = choi_to_kraus(ch.choi()).unwrap();
        assert_eq!(k.len(), 1);
        let e = &k.operators()[0];
        let phase = e[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(e.distance(&ComplexMatrix::identity(3).scale(phase)) < 1e-12);
    }

    #[test]
    fn tiny_eigenvalue_dropped() {
        let mut m = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 1.0]);
        // diag(1, 1e-14, 0, 1-1e-14): the 1e-14 direction is below the cutoff
        m[(1, 1)] = c64(1e-14, 0.0);
        m[(0, 0)] = c64(1.0 - 1e-14, 0.0);
        let k = choi_to_kraus(&ChoiMatrix::new(2, 2, m).unwrap()).unwrap();
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn choi_to_kraus_errors() {
        let not_cp = ComplexMatrix::from_real_diagonal(&[1.5, -0.5, 1.0, 0.0]);
        assert!(matches!(
            choi_to_kraus(&ChoiMatrix::new(2, 2, not_cp).unwrap()),
            Err(QopError::NotCompletelyPositive(_))
        ));
        let not_tp = ComplexMatrix::from_real_diagonal(&[1.0, 0.5, 1.0, 0.0]);
        let err = choi_to_kraus(&ChoiMatrix::new(2, 2, not_tp).unwrap()).unwrap_err();
        assert!(err.to_string().contains("not trace preserving"));
    }

    #[test]
    fn apply_shape_mismatch() {
        let ch = Channel::identity(2);
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(ch.apply(&rho), Err(QopError::ShapeMismatch(_))));
    }

    #[test]
    fn mix_identity_and_flip_on_zero() {
        // ½|0⟩⟨0| + ½|1⟩⟨1|
        let id = Channel::identity(2);
        let x = Channel::unitary(&pauli_x()).unwrap();
        let m = mix(&[id, x], &[0.5, 0.5]).unwrap();
        let out = m.apply(&PureState::basis(2, 0).density()).unwrap();
        assert!(out.matrix().distance(DensityMatrix::maximally_mixed(2).matrix()) < 1e-14);
    }

    #[test]
    fn mix_idempotent_and_errors() {
        let x = Channel::unitary(&pauli_x()).unwrap();
        let m = mix(&[x.clone(), x.clone()], &[0.3, 0.7]).unwrap();
        assert!(distance(&m, &x).unwrap() < 1e-12);
        assert!(matches!(mix(std::slice::from_ref(&x), &[0.9]), Err(QopError::NotADistribution(_))));
        assert!(matches!(
            mix(&[x.clone(), Channel::identity(3)], &[0.5, 0.5]),
            Err(QopError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn distance_identity_to_flip() {
        // two orthogonal rank-1 Choi matrices of trace 2: ‖2P − 2Q‖_F = 2√2
        let id = Channel::identity(2);
        let x = Channel::unitary(&pauli_x()).unwrap();
        assert!((distance(&id, &x).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(distance(&id, &id).unwrap(), 0.0);
        let m = mix(&[id.clone(), x], &[1.0, 0.0]).unwrap();
        assert!(distance(&id, &m).unwrap() < 1e-14);
    }

    #[test]
    fn extremality_examples() {
        assert!(is_extremal(Channel::identity(2).kraus()));
        let id = Channel::identity(2);
        let x = Channel::unitary(&pauli_x()).unwrap();
        let m = mix(&[id, x], &[0.5, 0.5]).unwrap();
        assert_eq!(m.kraus_rank(), 2);
        assert!(!is_extremal(m.kraus()));
    }
}

//! A family of channels that cannot be realized by a joint unitary acting
//! on the input and a mixed-initialized output system alone, together with
//! an implementing dilation (which needs an extra environment) and an
//! auditable certificate of non-realizability.
//!
//! The channel `d → d_fin` sends every basis state except the last to
//! `|0'⟩`, the last basis state to a mixed `ρ'`, and kills all coherence
//! between the last basis state and the others:
//!
//! ```text
//! (Σ_i α_i|i⟩ + β|d−1⟩)(h.c.)  ↦  (Σ_i |α_i|²) |0'⟩⟨0'| + |β|² ρ'
//! ```

use num_complex::Complex64;

use crate::channel::{Channel, KrausSet};
use crate::eig::eig_hermitian;
use crate::error::{QopError, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};
use crate::state::{DensityMatrix, PureState};
use crate::tolerance::Tolerances;
use crate::unitary::complete_to_unitary;
use crate::dilation::Dilation;

/// Slack used when checking family membership of an arbitrary channel.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-8;

/// Parameters of one member of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleParams {
    d: usize,
    d_fin: usize,
    rho_target: DensityMatrix,
}

impl CounterexampleParams {
    pub fn new(d: usize, d_fin: usize, rho_target: DensityMatrix) -> Result<Self> {
        if d < 2 || d_fin < 2 {
            return Err(QopError::InvalidArgument(format!(
                "need d >= 2 and d_fin >= 2, got d={d}, d_fin={d_fin}"
            )));
        }
        if rho_target.dim() != d_fin {
            return Err(QopError::ShapeMismatch(format!(
                "target image has dimension {}, expected {d_fin}",
                rho_target.dim()
            )));
        }
        let purity = rho_target.purity();
        if purity >= 1.0 - Tolerances::DEFAULT.purity {
            return Err(QopError::TargetNotMixed(purity));
        }
        if d == 2 {
            let overlap = rho_target.matrix()[(0, 0)].re;
            if overlap <= 1e-10 {
                return Err(QopError::MissingOverlap(overlap));
            }
        }
        Ok(Self {
            d,
            d_fin,
            rho_target,
        })
    }

    /// Target image `|α|²|0'⟩⟨0'| + |β|²|1'⟩⟨1'|` produced by the
    /// two-level implementing unitary.
    pub fn from_coefficients(d: usize, d_fin: usize, alpha: Complex64, beta: Complex64) -> Result<Self> {
        check_coefficients(alpha, beta)?;
        if d_fin < 2 {
            return Err(QopError::InvalidArgument("need d_fin >= 2".into()));
        }
        let mut diag = vec![0.0; d_fin];
        diag[0] = alpha.norm_sqr();
        diag[1] = beta.norm_sqr();
        let rho = DensityMatrix::from_trusted(ComplexMatrix::from_real_diagonal(&diag));
        Self::new(d, d_fin, rho)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_fin(&self) -> usize {
        self.d_fin
    }

    pub fn rho_target(&self) -> &DensityMatrix {
        &self.rho_target
    }
}

fn check_coefficients(alpha: Complex64, beta: Complex64) -> Result<()> {
    if alpha.norm() <= 1e-12 || beta.norm() <= 1e-12 {
        return Err(QopError::ZeroCoefficient);
    }
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(QopError::CoefficientNorm(n));
    }
    Ok(())
}

/// Kraus form: `|0'⟩⟨i|` for each `i < d−1`, and `√λ_k |e_k⟩'⟨d−1|` for
/// the eigenpairs of the target image.
pub fn build_counterexample(p: &CounterexampleParams) -> Result<Channel> {
    let (d, d_fin) = (p.d, p.d_fin);
    let mut ops: Vec<ComplexMatrix> = (0..d - 1)
        .map(|i| {
            let mut e = ComplexMatrix::zeros(d_fin, d);
            e[(0, i)] = ONE;
            e
        })
        .collect();
    for (lambda, vec) in target_spectrum(p)? {
        let s = lambda.sqrt();
        let mut e = ComplexMatrix::zeros(d_fin, d);
        for (a, &z) in vec.iter().enumerate() {
            e[(a, d - 1)] = z * s;
        }
        ops.push(e);
    }
    Channel::from_kraus(KrausSet::new(d, d_fin, ops)?)
}

fn target_spectrum(p: &CounterexampleParams) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let eig = eig_hermitian(p.rho_target.matrix())?;
    let kept: Vec<(f64, Vec<Complex64>)> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > Tolerances::DEFAULT.env_weight)
        .map(|(k, &l)| (l, eig.vector(k)))
        .collect();
    let total: f64 = kept.iter().map(|(l, _)| l).sum();
    Ok(kept.into_iter().map(|(l, v)| (l / total, v)).collect())
}

/// Dilation with an auxiliary environment of dimension `rank(ρ')`:
/// `|i⟩|0'⟩|0⟩ ↦ |i⟩|0'⟩|0⟩` for `i < d−1` and
/// `|d−1⟩|0'⟩|0⟩ ↦ Σ_k √λ_k |d−1⟩|e_k⟩'|k⟩`.
pub fn counterexample_dilation(p: &CounterexampleParams) -> Result<Dilation> {
    let (d, d_fin) = (p.d, p.d_fin);
    let spectrum = target_spectrum(p)?;
    let r = spectrum.len();
    let n = d * d_fin * r;
    let index = |i: usize, a: usize, m: usize| (i * d_fin + a) * r + m;
    let mut fixed: Vec<(usize, Vec<Complex64>)> = (0..d - 1)
        .map(|i| {
            let mut v = vec![ZERO; n];
            v[index(i, 0, 0)] = ONE;
            (index(i, 0, 0), v)
        })
        .collect();
    let mut last = vec![ZERO; n];
    for (k, (lambda, e)) in spectrum.iter().enumerate() {
        for (a, &z) in e.iter().enumerate() {
            last[index(d - 1, a, k)] = z * lambda.sqrt();
        }
    }
    fixed.push((index(d - 1, 0, 0), last));
    let unitary = complete_to_unitary::<rand_chacha::ChaCha8Rng>(n, &fixed, None)?;
    Dilation::new(d, d_fin, r, unitary, PureState::basis(d_fin * r, 0).density())
}

/// The explicit two-level implementing unitary: identity except on
/// span{|d−1⟩|0'⟩|0⟩, |d−1⟩|1'⟩|1⟩}, where it acts as
/// `[[α, −β̄], [β, ᾱ]]`.
pub fn implementing_unitary(d: usize, d_fin: usize, alpha: Complex64, beta: Complex64) -> Result<Dilation> {
    check_coefficients(alpha, beta)?;
    if d < 2 || d_fin < 2 {
        return Err(QopError::InvalidArgument(format!(
            "need d >= 2 and d_fin >= 2, got d={d}, d_fin={d_fin}"
        )));
    }
    let n = d * d_fin * 2;
    let index = |i: usize, a: usize, m: usize| (i * d_fin + a) * 2 + m;
    let (c0, c1) = (index(d - 1, 0, 0), index(d - 1, 1, 1));
    let mut u = ComplexMatrix::identity(n);
    u[(c0, c0)] = alpha;
    u[(c1, c0)] = beta;
    u[(c0, c1)] = -beta.conj();
    u[(c1, c1)] = alpha.conj();
    Dilation::new(d, d_fin, 2, u, PureState::basis(d_fin * 2, 0).density())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    NotRealizable,
    Inconclusive,
}

impl Claim {
    pub fn as_str(&self) -> &'static str {
        match self {
            Claim::NotRealizable => "NOT_REALIZABLE",
            Claim::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Orthonormality count for one rank of the mixed initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingStep {
    pub rank: usize,
    pub vectors_required: usize,
    pub dimension_available: usize,
}

impl CountingStep {
    pub fn exceeds(&self) -> bool {
        self.vectors_required > self.dimension_available
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonRealizabilityCertificate {
    pub claim: Claim,
    pub d: usize,
    pub d_fin: usize,
    /// Smallest mixed rank examined (2); larger ranks are in `counting_steps`.
    pub rank_tested: usize,
    pub vectors_required: usize,
    pub dimension_available: usize,
    pub counting_steps: Vec<CountingStep>,
    pub decoherence_contradiction: bool,
    pub d2_branch_used: bool,
    pub target_purity: Option<f64>,
    pub target_overlap: Option<f64>,
    pub narrative: Vec<String>,
}

impl NonRealizabilityCertificate {
    fn inconclusive(d: usize, d_fin: usize, narrative: Vec<String>) -> Self {
        Self {
            claim: Claim::Inconclusive,
            d,
            d_fin,
            rank_tested: 0,
            vectors_required: 0,
            dimension_available: d,
            counting_steps: Vec::new(),
            decoherence_contradiction: false,
            d2_branch_used: false,
            target_purity: None,
            target_overlap: None,
            narrative,
        }
    }

    /// The structural guarantee behind a NOT_REALIZABLE claim.
    pub fn is_consistent(&self) -> bool {
        match self.claim {
            Claim::Inconclusive => true,
            Claim::NotRealizable => {
                let counted = !self.counting_steps.is_empty()
                    && self.counting_steps.iter().all(CountingStep::exceeds);
                (counted && self.decoherence_contradiction)
                    || (self.d == 2 && self.decoherence_contradiction && self.d2_branch_used)
            }
        }
    }
}

/// Runs the non-realizability argument for a family member, checking each
/// ingredient numerically on the constructed channel and recording every
/// deduction.
pub fn certify_nonrealizable(p: &CounterexampleParams) -> NonRealizabilityCertificate {
    let (d, d_fin) = (p.d, p.d_fin);
    let channel = match build_counterexample(p) {
        Ok(ch) => ch,
        Err(e) => {
            return NonRealizabilityCertificate::inconclusive(
                d,
                d_fin,
                vec![format!("could not construct the channel: {e}")],
            )
        }
    };
    let tol = MEMBERSHIP_TOLERANCE;
    let mut narrative = Vec::new();

    // premises, checked on the channel itself
    let zero_proj = PureState::basis(d_fin, 0).density().into_matrix();
    for i in 0..d - 1 {
        let dev = channel.image_of_unit(i, i).distance(&zero_proj);
        if dev > tol {
            narrative.push(format!("premise failed: |{i}⟩⟨{i}| maps {dev:.3e} away from |0'⟩⟨0'|"));
            return NonRealizabilityCertificate::inconclusive(d, d_fin, narrative);
        }
    }
    narrative.push(format!(
        "premise: |i⟩⟨i| ↦ |0'⟩⟨0'| for i = 0..{} (checked within {tol:.0e})",
        d - 2
    ));
    let worst_cross = (0..d - 1)
        .map(|i| channel.image_of_unit(i, d - 1).frobenius_norm())
        .fold(0.0, f64::max);
    if worst_cross > tol {
        narrative.push(format!("premise failed: coherence with |{}⟩ survives ({worst_cross:.3e})", d - 1));
        return NonRealizabilityCertificate::inconclusive(d, d_fin, narrative);
    }
    narrative.push(format!(
        "premise: |{}⟩ totally decoheres from every other basis state, Φ(|i⟩⟨{}|) = 0 (max norm {worst_cross:.1e})",
        d - 1,
        d - 1
    ));
    let image = DensityMatrix::from_trusted(channel.image_of_unit(d - 1, d - 1));
    let purity = image.purity();
    narrative.push(format!(
        "premise: the image ρ' of |{}⟩⟨{}| is mixed, tr(ρ'²) = {purity:.12}",
        d - 1,
        d - 1
    ));
    let overlap = image.matrix()[(0, 0)].re;

    // mixed initialization of the final system, rank r
    let counting_steps: Vec<CountingStep> = (2..=d_fin)
        .map(|r| CountingStep {
            rank: r,
            vectors_required: r * (d - 1),
            dimension_available: d,
        })
        .collect();
    narrative.push(format!(
        "suppose the final system starts in a mixed state of rank r ≥ 2, Σ_k p_k |k'⟩⟨k'| with all p_k > 0; \
         since |i⟩⟨i| ↦ |0'⟩⟨0'| is pure, every |i⟩|k'⟩ (i ≤ {}) must map to (vector)⊗|0'⟩, \
         and these r·{} images must be orthonormal vectors of the {d}-dimensional initial system",
        d - 2,
        d - 1
    ));
    for step in &counting_steps {
        if step.exceeds() {
            narrative.push(format!(
                "rank {}: {} > {}, and {} orthonormal vectors do not fit in dimension {}; impossible",
                step.rank, step.vectors_required, step.dimension_available, step.vectors_required, step.dimension_available
            ));
        } else {
            narrative.push(format!(
                "rank {}: {} ≤ {}, so counting alone does not exclude this rank",
                step.rank, step.vectors_required, step.dimension_available
            ));
        }
    }

    let d2_branch_used = counting_steps.iter().any(|s| !s.exceeds());
    if d2_branch_used {
        // only d = 2, rank 2 survives the count
        if d != 2 || overlap <= 1e-10 {
            narrative.push("the surviving rank is not covered by the argument".into());
            return NonRealizabilityCertificate::inconclusive(d, d_fin, narrative);
        }
        narrative.push(
            "d = 2, rank 2: relabel so the initial state is p|0'⟩⟨0'| + (1−p)|1'⟩⟨1'|, 0 < p < 1; \
             then U|0⟩|0'⟩ = |0⟩|0'⟩ and U|0⟩|1'⟩ = |1⟩|0'⟩"
                .into(),
        );
        narrative.push(
            "these two images span C²⊗|0'⟩, so U|1⟩|0'⟩ and U|1⟩|1'⟩ are orthogonal to it: \
             their final-system component along |0'⟩ vanishes"
                .into(),
        );
        narrative.push(format!(
            "hence ⟨0'|ρ'|0'⟩ would be 0, but the target has ⟨0'|ρ'|0'⟩ = {overlap:.12} > 0; rank 2 is impossible"
        ));
    }

    // pure initialization
    narrative.push(
        "so the final system starts pure, WLOG |0'⟩; then U|i⟩|0'⟩ = |i⟩|0'⟩ for i ≤ d−2 after relabeling, \
         and U|d−1⟩|0'⟩ = Σ_i |i⟩|φ_i⟩'"
            .into(),
    );
    narrative.push(
        "the cross term |i⟩⟨d−1| maps to |0'⟩⟨φ_i|'; total decoherence forces |φ_i⟩' = 0 for every i ≠ d−1".into(),
    );
    let decoherence_contradiction = purity < 1.0 - Tolerances::DEFAULT.purity;
    if !decoherence_contradiction {
        narrative.push("the image of |d−1⟩ is pure, so no contradiction arises".into());
        return NonRealizabilityCertificate::inconclusive(d, d_fin, narrative);
    }
    narrative.push(format!(
        "then the image of |d−1⟩ is the pure state |φ_{{d−1}}⟩'⟨φ_{{d−1}}|', contradicting tr(ρ'²) = {purity:.12} < 1"
    ));
    narrative.push(format!(
        "conclusion: no unitary on the {d}-dimensional initial and {d_fin}-dimensional final system, \
         with the final system initialized in any state, implements this channel"
    ));

    let first = counting_steps[0];
    NonRealizabilityCertificate {
        claim: Claim::NotRealizable,
        d,
        d_fin,
        rank_tested: first.rank,
        vectors_required: first.vectors_required,
        dimension_available: first.dimension_available,
        counting_steps,
        decoherence_contradiction,
        d2_branch_used,
        target_purity: Some(purity),
        target_overlap: Some(overlap),
        narrative,
    }
}

/// Certificate for raw parameters; inputs outside the family give
/// INCONCLUSIVE instead of an error.
pub fn certify_candidate(d: usize, d_fin: usize, rho_target: DensityMatrix) -> NonRealizabilityCertificate {
    match CounterexampleParams::new(d, d_fin, rho_target) {
        Ok(p) => certify_nonrealizable(&p),
        Err(e) => NonRealizabilityCertificate::inconclusive(
            d,
            d_fin,
            vec![format!("not a member of the counterexample family: {e}")],
        ),
    }
}

/// Recognizes a channel as a family member up to a unitary on the output.
///
/// Requires the images of |0⟩…|d−2⟩ to be one common pure state σ, the
/// last basis state to decohere from the rest, and its image to be mixed.
/// The returned parameters are expressed in an output basis where σ = |0'⟩;
/// a fixed output unitary does not change realizability.
pub fn family_params(ch: &Channel) -> std::result::Result<CounterexampleParams, String> {
    let (d, d_fin) = (ch.d_in(), ch.d_out());
    if d < 2 || d_fin < 2 {
        return Err(format!("dimensions {d}->{d_fin} are too small for the family"));
    }
    let tol = MEMBERSHIP_TOLERANCE;
    let sigma = ch.image_of_unit(0, 0);
    let sigma_purity: f64 = sigma.as_slice().iter().map(|z| z.norm_sqr()).sum();
    if sigma_purity < 1.0 - tol {
        return Err(format!("image of |0⟩ is not pure (purity {sigma_purity:.12})"));
    }
    for i in 1..d - 1 {
        let dev = ch.image_of_unit(i, i).distance(&sigma);
        if dev > tol {
            return Err(format!("image of |{i}⟩ differs from the image of |0⟩ by {dev:.3e}"));
        }
    }
    for i in 0..d - 1 {
        let cross = ch.image_of_unit(i, d - 1).frobenius_norm();
        if cross > tol {
            return Err(format!("|{}⟩ does not decohere from |{i}⟩ (cross-term norm {cross:.3e})", d - 1));
        }
    }
    let eig = eig_hermitian(&sigma.hermitian_part()).map_err(|e| e.to_string())?;
    let psi = eig.vector(0);
    let w = complete_to_unitary::<rand_chacha::ChaCha8Rng>(d_fin, &[(0, psi)], None)
        .map_err(|e| e.to_string())?;
    let rotated = w.adjoint().matmul(&ch.image_of_unit(d - 1, d - 1)).matmul(&w);
    let loose = Tolerances {
        hermiticity: tol,
        trace: tol,
        psd: tol,
        ..Tolerances::DEFAULT
    };
    let rho = DensityMatrix::with_tolerances(rotated.hermitian_part(), &loose).map_err(|e| e.to_string())?;
    CounterexampleParams::new(d, d_fin, rho).map_err(|e| e.to_string())
}

/// Membership check followed by the certificate.
pub fn certify_channel(ch: &Channel) -> NonRealizabilityCertificate {
    match family_params(ch) {
        Ok(p) => {
            let mut cert = certify_nonrealizable(&p);
            cert.narrative.insert(
                0,
                "membership: the channel matches the counterexample family after a fixed unitary on the output".into(),
            );
            cert
        }
        Err(reason) => NonRealizabilityCertificate::inconclusive(
            ch.d_in(),
            ch.d_out(),
            vec![format!("not a member of the counterexample family: {reason}")],
        ),
    }
}

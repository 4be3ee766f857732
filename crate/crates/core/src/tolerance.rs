//! Numerical slack used by every validation in the crate.

/// Tolerances and size limits, collected in one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise Hermiticity slack for density matrices.
    pub hermiticity: f64,
    /// Hermiticity slack accepted by the eigensolver.
    pub eig_hermiticity: f64,
    /// Eigenvalues above `-psd` count as non-negative.
    pub psd: f64,
    /// Unit-trace slack for states.
    pub trace: f64,
    /// Unit-norm slack for pure states.
    pub norm: f64,
    /// `is_pure` threshold: purity ≥ 1 − `purity`.
    pub purity: f64,
    /// Trace preservation (Σ E†E = I) and Choi partial-trace slack.
    pub trace_preservation: f64,
    /// Choi eigenvalues above this define the Kraus rank.
    pub kraus_rank: f64,
    /// Relative singular-value cutoff in the extremality test.
    pub extremal_rank: f64,
    /// Unitarity slack (‖U†U − I‖ entrywise).
    pub unitarity: f64,
    /// Environment eigenvalues at or below this are dropped.
    pub env_weight: f64,
    /// Probability-vector normalization slack.
    pub distribution: f64,
    /// Largest matrix side the crate will build.
    pub max_dim: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        eig_hermiticity: 1e-10,
        psd: 1e-10,
        trace: 1e-12,
        norm: 1e-12,
        purity: 1e-10,
        trace_preservation: 1e-10,
        kraus_rank: 1e-10,
        extremal_rank: 1e-8,
        unitarity: 1e-10,
        env_weight: 1e-12,
        distribution: 1e-12,
        max_dim: 4096,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

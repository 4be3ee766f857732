//! Finite-dimensional quantum operations: channels in Kraus and Choi form,
//! unitary dilations, a family of channels that cannot be realized with the
//! environment initialized in a mixed state of the output system alone, and
//! a numerical searcher for such realizations.
//!
//! Matrices are dense, complex and row-major. Choi matrices are
//! unnormalized with the input factor first.

pub mod channel;
pub mod counterexample;
pub mod dilation;
pub mod eig;
pub mod error;
pub mod matrix;
pub mod random;
pub mod realizability;
pub mod state;
pub mod tolerance;
pub mod unitary;

pub use channel::{apply, choi_to_kraus, distance, is_extremal, kraus_to_choi, mix, Channel, ChoiMatrix, KrausSet};
pub use counterexample::{
    build_counterexample, certify_candidate, certify_channel, certify_nonrealizable, counterexample_dilation,
    family_params, implementing_unitary, Claim, CounterexampleParams, CountingStep, NonRealizabilityCertificate,
};
pub use dilation::{
    channel_from_dilation, decompose_mixed_env, stinespring_from_kraus, stinespring_from_kraus_seeded, Dilation,
    SpectralComponent,
};
pub use eig::{eig_hermitian, HermitianEigen};
pub use error::{QopError, Result};
pub use matrix::{partial_trace, tensor, ComplexMatrix};
pub use num_complex::Complex64;
pub use realizability::{
    parameter_count, perturbation_experiment, search_mixed_env_realization, PerturbationReport, SearchConfig,
    SearchResult, Verdict,
};
pub use state::{is_pure, purity, DensityMatrix, PureState};
pub use tolerance::Tolerances;

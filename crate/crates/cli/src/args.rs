use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qop_core::realizability::DEFAULT_SEED;
use qop_core::{Complex64, SearchConfig};

use crate::files::Representation;

/// Quantum operations with small mixed environments.
#[derive(Debug, Parser)]
#[command(name = "qop", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a channel file.
    Build {
        #[command(subcommand)]
        kind: BuildKind,
    },
    /// Run the non-realizability certificate on a channel file or on
    /// counterexample parameters.
    Certify(CertifyArgs),
    /// Search for a realization with a mixed final-system initial state.
    Search(SearchArgs),
    /// Rewrite a channel file in Kraus or Choi form.
    Convert(ConvertArgs),
    /// Apply a channel to a state file.
    Apply(ApplyArgs),
    /// Print d²(d_fin² − 1).
    Params(DimArgs),
    /// Run the searcher on random channels mixed into a center channel.
    Perturb(PerturbArgs),
}

#[derive(Debug, Subcommand)]
pub enum BuildKind {
    /// Member of the counterexample family.
    Counterexample(CounterexampleArgs),
    /// Haar-induced random channel.
    Random(RandomArgs),
    /// Channel induced by a random joint unitary and a diagonal initial
    /// state of the final system.
    FromDilation(FromDilationArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DimArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long = "d-fin")]
    pub d_fin: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Target image given either as eigenvalues (with an optional basis from a
/// state file) or through the two-level coefficients α, β.
#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Coefficient α as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, requires = "beta")]
    pub alpha: Option<Complex64>,
    /// Coefficient β as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, requires = "alpha")]
    pub beta: Option<Complex64>,
    /// Eigenvalues of the target image, comma separated, in the basis
    /// |0'⟩, |1'⟩, …
    #[arg(long = "rho-target", value_delimiter = ',', conflicts_with_all = ["alpha", "rho_file"])]
    pub rho_target: Option<Vec<f64>>,
    /// Target image as a state file.
    #[arg(long = "rho-file", conflicts_with = "alpha")]
    pub rho_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CounterexampleArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, value_enum, default_value = "kraus")]
    pub to: Representation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of Kraus operators drawn; defaults to d·d_fin.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, value_enum, default_value = "kraus")]
    pub to: Representation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FromDilationArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Spectrum of the final-system initial state; random when absent.
    #[arg(long = "env-spectrum", value_delimiter = ',')]
    pub env_spectrum: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "kraus")]
    pub to: Representation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// Channel file to test for family membership.
    #[arg(long, conflicts_with_all = ["d", "alpha", "rho_target", "rho_file"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "d_fin")]
    pub d: Option<usize>,
    #[arg(long = "d-fin", requires = "d")]
    pub d_fin: Option<usize>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchFlags {
    #[arg(long, default_value_t = SearchConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long = "max-iters", default_value_t = SearchConfig::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long = "step-tolerance", default_value_t = SearchConfig::default().step_tolerance)]
    pub step_tolerance: f64,
    #[arg(long = "realizable-threshold", default_value_t = SearchConfig::default().realizable_threshold)]
    pub realizable_threshold: f64,
    #[arg(long = "nonrealizable-threshold", default_value_t = SearchConfig::default().nonrealizable_threshold)]
    pub nonrealizable_threshold: f64,
}

impl SearchFlags {
    pub fn config(&self) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            step_tolerance: self.step_tolerance,
            realizable_threshold: self.realizable_threshold,
            nonrealizable_threshold: self.nonrealizable_threshold,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub search: SearchFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub to: Representation,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    /// Channel file.
    #[arg(long)]
    pub input: PathBuf,
    /// State file.
    #[arg(long)]
    pub state: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    /// Center channel file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub radius: f64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[command(flatten)]
    pub search: SearchFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

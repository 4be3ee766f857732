//! Numerical search for mixed-environment realizations.
//!
//! Given a channel `d → d_fin`, look for a unitary on `initial ⊗ final` and
//! a diagonal initial state of the final system whose induced channel (trace
//! out the initial system) matches the target. Each restart draws a Haar
//! random unitary and random logits, then runs Levenberg–Marquardt with
//! steps `U ← U exp(iH)`.
//!
//! A small residual is a constructive realization; a large one after all
//! restarts is only numerical evidence of non-realizability, never a proof.

pub mod objective;

pub use objective::{hermitian_from_coords, softmax, MixedEnvProblem};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{distance, mix, Channel};
use crate::dilation::{channel_from_dilation, Dilation};
use crate::eig::expm_i_hermitian;
use crate::error::{QopError, Result};
use crate::matrix::ComplexMatrix;
use crate::random::{random_channel, stream_rng};
use crate::state::DensityMatrix;
use crate::unitary::haar_unitary;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 20_250_101;

/// Wording attached to every LIKELY_NOT_REALIZABLE verdict.
pub const EVIDENCE_NOTE: &str =
    "LIKELY_NOT_REALIZABLE is numerical evidence from a local search, not a proof of non-realizability";

/// Residual below which a restart stops early.
const RESIDUAL_FLOOR: f64 = 1e-14;
/// Restarts stop after this many iterations without relative progress.
const STALL_WINDOW: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub step_tolerance: f64,
    pub realizable_threshold: f64,
    pub nonrealizable_threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iters: 2000,
            seed: DEFAULT_SEED,
            step_tolerance: 1e-12,
            realizable_threshold: 1e-6,
            nonrealizable_threshold: 1e-3,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(QopError::InvalidArgument("restarts must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(QopError::InvalidArgument("max_iters must be positive".into()));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance < 0.0 {
            return Err(QopError::InvalidArgument("step_tolerance must be non-negative".into()));
        }
        if !(self.realizable_threshold > 0.0 && self.realizable_threshold < self.nonrealizable_threshold) {
            return Err(QopError::InvalidArgument(format!(
                "need 0 < realizable_threshold ({}) < nonrealizable_threshold ({})",
                self.realizable_threshold, self.nonrealizable_threshold
            )));
        }
        Ok(())
    }

    pub fn verdict(&self, residual: f64) -> Verdict {
        if residual < self.realizable_threshold {
            Verdict::Realized
        } else if residual > self.nonrealizable_threshold {
            Verdict::LikelyNotRealizable
        } else {
            Verdict::Undecided
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Realized,
    LikelyNotRealizable,
    Undecided,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Realized => "REALIZED",
            Verdict::LikelyNotRealizable => "LIKELY_NOT_REALIZABLE",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Choi-Frobenius distance of the best point, recomputed through
    /// [`channel_from_dilation`].
    pub best_residual: f64,
    pub best_unitary: ComplexMatrix,
    pub best_env_spectrum: Vec<f64>,
    pub best_restart: usize,
    pub verdict: Verdict,
    /// Final residual of each restart, in restart order.
    pub residual_history: Vec<f64>,
}

impl SearchResult {
    /// The dilation found by the search (final system initialized in
    /// `diag(best_env_spectrum)`, no auxiliary environment).
    pub fn dilation(&self, d: usize, d_fin: usize) -> Result<Dilation> {
        Dilation::new(
            d,
            d_fin,
            0,
            self.best_unitary.clone(),
            DensityMatrix::diagonal(&self.best_env_spectrum)?,
        )
    }
}

/// d²(d_fin² − 1): real parameters of a channel `d → d_fin`, which is also
/// what a naive count assigns to a unitary on `d·d_fin` levels with a
/// mixed initial state of the `d_fin` part, modulo the redundancies.
pub fn parameter_count(d: u64, d_fin: u64) -> u64 {
    d * d * (d_fin * d_fin - 1)
}

/// Outcome of one local run.
#[derive(Debug, Clone)]
struct LocalRun {
    residual: f64,
    unitary: ComplexMatrix,
    spectrum: Vec<f64>,
}

fn solve_damped(jtj: &[f64], jtr: &[f64], np: usize, lambda: f64) -> Option<Vec<f64>> {
    let mut a = nalgebra::DMatrix::from_row_slice(np, np, jtj);
    for i in 0..np {
        a[(i, i)] += lambda * (1.0 + a[(i, i)]);
    }
    let b = nalgebra::DVector::from_iterator(np, jtr.iter().map(|x| -x));
    a.cholesky().map(|c| c.solve(&b).iter().copied().collect())
}

fn local_search<R: Rng + ?Sized>(prob: &MixedEnvProblem, cfg: &SearchConfig, rng: &mut R) -> LocalRun {
    let n = prob.side();
    let np = prob.n_params();
    let mr = prob.n_residuals();
    let mut u = haar_unitary(n, rng);
    let mut theta: Vec<f64> = (0..prob.d_fin).map(|_| rng.sample(StandardNormal)).collect();
    let mut p = softmax(&theta);
    let mut cost = prob.residual_norm(&u, &p);
    let mut lambda = 1e-3;
    let mut best_in_window = cost;
    let mut since_progress = 0usize;

    for _ in 0..cfg.max_iters {
        if cost < RESIDUAL_FLOOR {
            break;
        }
        let (res, jac) = prob.residuals_and_jacobian(&u, &p);
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for row in 0..mr {
            let jrow = &jac[row * np..(row + 1) * np];
            let r = res[row];
            for a in 0..np {
                let ja = jrow[a];
                if ja == 0.0 {
                    continue;
                }
                jtr[a] += ja * r;
                for b in a..np {
                    jtj[a * np + b] += ja * jrow[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[a * np + b] = jtj[b * np + a];
            }
        }

        let mut accepted = false;
        let mut step_norm = f64::INFINITY;
        while lambda < 1e16 {
            let Some(step) = solve_damped(&jtj, &jtr, np, lambda) else {
                lambda *= 10.0;
                continue;
            };
            step_norm = step.iter().map(|x| x * x).sum::<f64>().sqrt();
            let h = hermitian_from_coords(n, &step[..n * n]);
            let Ok(rot) = expm_i_hermitian(&h) else {
                lambda *= 10.0;
                continue;
            };
            let u_new = u.matmul(&rot);
            let theta_new: Vec<f64> = theta.iter().zip(&step[n * n..]).map(|(a, b)| a + b).collect();
            let p_new = softmax(&theta_new);
            let cost_new = prob.residual_norm(&u_new, &p_new);
            if cost_new < cost {
                u = u_new;
                theta = theta_new;
                p = p_new;
                cost = cost_new;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
            if step_norm < cfg.step_tolerance {
                break;
            }
        }
        if !accepted || step_norm < cfg.step_tolerance {
            break;
        }
        if cost < best_in_window * (1.0 - 1e-9) {
            best_in_window = cost;
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= STALL_WINDOW {
                break;
            }
        }
    }
    LocalRun {
        residual: cost,
        unitary: u,
        spectrum: p,
    }
}

/// Multi-restart search for `(U, p)` with final-system initial state
/// `Σ p_i |i'⟩⟨i'|` reproducing `target`.
///
/// Restart `k` draws from stream `k` of `cfg.seed`, so results do not
/// depend on scheduling; ties between restarts go to the lower index.
pub fn search_mixed_env_realization(target: &Channel, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let (d, d_fin) = (target.d_in(), target.d_out());
    let prob = MixedEnvProblem::new(d, d_fin, target.choi().matrix());

    let runs: Vec<LocalRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, k as u64);
            local_search(&prob, cfg, &mut rng)
        })
        .collect();

    let residual_history: Vec<f64> = runs.iter().map(|r| r.residual).collect();
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.residual.total_cmp(&b.residual).then(i.cmp(j)))
        .expect("at least one restart");

    // independent re-verification through the dilation machinery
    let dilation = Dilation::new(
        d,
        d_fin,
        0,
        best.unitary.clone(),
        DensityMatrix::diagonal(&renormalized(&best.spectrum))?,
    )?;
    let best_residual = distance(&channel_from_dilation(&dilation)?, target)?;

    Ok(SearchResult {
        best_residual,
        best_unitary: best.unitary.clone(),
        best_env_spectrum: renormalized(&best.spectrum),
        best_restart,
        verdict: cfg.verdict(best_residual),
        residual_history,
    })
}

fn renormalized(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|x| x / s).collect()
}

/// Derives an independent seed for item `index` of a seeded batch.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSample {
    /// Weight of the random channel in the mixture, in `[0, radius)`.
    pub weight: f64,
    pub residual: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub radius: f64,
    pub samples: Vec<PerturbationSample>,
    pub fraction_likely_not_realizable: f64,
    pub fraction_realized: f64,
    pub residual_min: f64,
    pub residual_mean: f64,
    pub residual_median: f64,
    pub residual_max: f64,
}

/// Mixes `center` with Haar-induced random channels at weights below
/// `radius` and runs the searcher on each sample.
///
/// Sample `s` uses generator stream `s` of `cfg.seed` for the perturbation
/// and a derived seed for its search. Fractions are observations, not
/// theorems.
pub fn perturbation_experiment(
    center: &Channel,
    radius: f64,
    n_samples: usize,
    cfg: &SearchConfig,
) -> Result<PerturbationReport> {
    if radius >= 1.0 {
        return Err(QopError::RadiusTooLarge(radius));
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(QopError::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if n_samples == 0 {
        return Err(QopError::InvalidArgument("need at least one sample".into()));
    }
    cfg.validate()?;
    let (d, d_fin) = (center.d_in(), center.d_out());

    let mut samples = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let mut rng = stream_rng(cfg.seed, s as u64);
        let weight = radius * rng.random::<f64>();
        let noise = random_channel(d, d_fin, &mut rng);
        let sample = mix(&[center.clone(), noise], &[1.0 - weight, weight])?;
        let sample_cfg = SearchConfig {
            seed: derive_seed(cfg.seed, s as u64),
            ..*cfg
        };
        let res = search_mixed_env_realization(&sample, &sample_cfg)?;
        samples.push(PerturbationSample {
            weight,
            residual: res.best_residual,
            verdict: res.verdict,
        });
    }

    let count = |v: Verdict| samples.iter().filter(|s| s.verdict == v).count() as f64 / n_samples as f64;
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if n_samples % 2 == 1 {
        sorted[n_samples / 2]
    } else {
        0.5 * (sorted[n_samples / 2 - 1] + sorted[n_samples / 2])
    };
    Ok(PerturbationReport {
        radius,
        fraction_likely_not_realizable: count(Verdict::LikelyNotRealizable),
        fraction_realized: count(Verdict::Realized),
        residual_min: sorted[0],
        residual_mean: sorted.iter().sum::<f64>() / n_samples as f64,
        residual_median: median,
        residual_max: sorted[n_samples - 1],
        samples,
    })
}

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use qop_core::random::{random_distribution, random_kraus, stream_rng};
use qop_core::realizability::EVIDENCE_NOTE;
use qop_core::unitary::haar_unitary;
use qop_core::{
    build_counterexample, certify_candidate, certify_channel, channel_from_dilation, parameter_count,
    perturbation_experiment, search_mixed_env_realization, Channel, Claim, CounterexampleParams, DensityMatrix,
    Dilation, NonRealizabilityCertificate, Verdict,
};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::files::*;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_LIKELY_NOT_REALIZABLE: u8 = 4;
pub const EXIT_UNDECIDED: u8 = 5;

pub const PERTURBATION_NOTE: &str =
    "fractions are observations from a finite sample and a local search; they do not establish or refute that the center has a ball of counterexamples around it";

pub fn claim_exit_code(c: Claim) -> u8 {
    match c {
        Claim::NotRealizable => EXIT_OK,
        Claim::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn verdict_exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Realized => EXIT_OK,
        Verdict::LikelyNotRealizable => EXIT_LIKELY_NOT_REALIZABLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

/// Runs one command; `argv` (without the program name) is echoed into
/// reports. Returns the process exit code.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<u8> {
    let start = Instant::now();
    match cli.command {
        Command::Build { kind } => build(kind),
        Command::Certify(a) => certify(a, argv, start),
        Command::Search(a) => search(a, argv, start),
        Command::Convert(a) => {
            let ch = load_channel(&a.input)?;
            emit(a.output.out.as_deref(), &to_json(&ChannelFile::from_channel(&ch, a.to))?)?;
            Ok(EXIT_OK)
        }
        Command::Apply(a) => {
            let ch = load_channel(&a.input)?;
            let rho = read_json::<StateFile>(&a.state)?.to_state()?;
            let out = ch.apply(&rho)?;
            emit(a.output.out.as_deref(), &to_json(&StateFile::from_state(&out))?)?;
            Ok(EXIT_OK)
        }
        Command::Params(a) => {
            ensure!(a.d >= 1 && a.d_fin >= 1, "dimensions must be at least 1");
            println!("{}", parameter_count(a.d as u64, a.d_fin as u64));
            Ok(EXIT_OK)
        }
        Command::Perturb(a) => perturb(a, argv, start),
    }
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    read_json::<ChannelFile>(path)?
        .to_channel()
        .with_context(|| format!("invalid channel in {}", path.display()))
}

fn target_state(d_fin: usize, t: &TargetArgs) -> Result<DensityMatrix> {
    if let (Some(alpha), Some(beta)) = (t.alpha, t.beta) {
        ensure!(d_fin >= 2, "alpha/beta need d-fin >= 2");
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        ensure!((norm - 1.0).abs() <= 1e-12, "|alpha|^2 + |beta|^2 = {norm}, expected 1");
        let mut diag = vec![0.0; d_fin];
        diag[0] = alpha.norm_sqr();
        diag[1] = beta.norm_sqr();
        return Ok(DensityMatrix::diagonal(&diag)?);
    }
    if let Some(p) = &t.rho_target {
        ensure!(p.len() == d_fin, "rho-target has {} eigenvalues, expected d-fin = {d_fin}", p.len());
        return Ok(DensityMatrix::diagonal(p)?);
    }
    if let Some(path) = &t.rho_file {
        let rho = read_json::<StateFile>(path)?.to_state()?;
        ensure!(rho.dim() == d_fin, "state file has dimension {}, expected d-fin = {d_fin}", rho.dim());
        return Ok(rho);
    }
    bail!("give the target image with --alpha/--beta, --rho-target or --rho-file")
}

fn build(kind: BuildKind) -> Result<u8> {
    let (ch, to, out) = match kind {
        BuildKind::Counterexample(a) => {
            let rho = target_state(a.dims.d_fin, &a.target)?;
            let p = CounterexampleParams::new(a.dims.d, a.dims.d_fin, rho)?;
            (build_counterexample(&p)?, a.to, a.output.out)
        }
        BuildKind::Random(a) => {
            let (d, d_fin) = (a.dims.d, a.dims.d_fin);
            ensure!(d >= 1 && d_fin >= 1, "dimensions must be at least 1");
            let rank = a.rank.unwrap_or(d * d_fin);
            ensure!(rank >= 1 && d_fin * rank >= d, "rank {rank} cannot give a channel {d}->{d_fin}");
            let mut rng = stream_rng(a.seed, 0);
            (Channel::from_kraus(random_kraus(d, d_fin, rank, &mut rng))?, a.to, a.output.out)
        }
        BuildKind::FromDilation(a) => {
            let (d, d_fin) = (a.dims.d, a.dims.d_fin);
            ensure!(d >= 1 && d_fin >= 1, "dimensions must be at least 1");
            let mut rng = stream_rng(a.seed, 0);
            let u = haar_unitary(d * d_fin, &mut rng);
            let p = match a.env_spectrum {
                Some(p) => p,
                None => random_distribution(d_fin, &mut rng),
            };
            ensure!(p.len() == d_fin, "env-spectrum has {} entries, expected d-fin = {d_fin}", p.len());
            let dil = Dilation::new(d, d_fin, 0, u, DensityMatrix::diagonal(&p)?)?;
            (channel_from_dilation(&dil)?, a.to, a.output.out)
        }
    };
    emit(out.as_deref(), &to_json(&ChannelFile::from_channel(&ch, to))?)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct StepReport {
    rank: usize,
    vectors_required: usize,
    dimension_available: usize,
    exceeds: bool,
}

#[derive(Debug, Serialize)]
struct CertificateReport {
    claim: &'static str,
    d: usize,
    d_fin: usize,
    rank_tested: usize,
    vectors_required: usize,
    dimension_available: usize,
    counting_steps: Vec<StepReport>,
    decoherence_contradiction: bool,
    d2_branch_used: bool,
    target_purity: Option<Real>,
    target_overlap: Option<Real>,
    narrative: Vec<String>,
}

impl From<&NonRealizabilityCertificate> for CertificateReport {
    fn from(c: &NonRealizabilityCertificate) -> Self {
        Self {
            claim: c.claim.as_str(),
            d: c.d,
            d_fin: c.d_fin,
            rank_tested: c.rank_tested,
            vectors_required: c.vectors_required,
            dimension_available: c.dimension_available,
            counting_steps: c
                .counting_steps
                .iter()
                .map(|s| StepReport {
                    rank: s.rank,
                    vectors_required: s.vectors_required,
                    dimension_available: s.dimension_available,
                    exceeds: s.exceeds(),
                })
                .collect(),
            decoherence_contradiction: c.decoherence_contradiction,
            d2_branch_used: c.d2_branch_used,
            target_purity: c.target_purity.map(Real),
            target_overlap: c.target_overlap.map(Real),
            narrative: c.narrative.clone(),
        }
    }
}

fn report<T: Serialize>(
    argv: Vec<String>,
    config: serde_json::Value,
    seed: Option<u64>,
    results: T,
    start: Instant,
) -> ReportFile<T> {
    ReportFile {
        format_version: FORMAT_VERSION,
        command: argv,
        config,
        seed,
        results,
        duration_seconds: start.elapsed().as_secs_f64(),
    }
}

fn certify(a: CertifyArgs, argv: Vec<String>, start: Instant) -> Result<u8> {
    let (cert, config) = match (&a.input, a.d, a.d_fin) {
        (Some(path), _, _) => {
            let ch = load_channel(path)?;
            (certify_channel(&ch), json!({ "input": path.display().to_string() }))
        }
        (None, Some(d), Some(d_fin)) => {
            let rho = target_state(d_fin, &a.target)?;
            (certify_candidate(d, d_fin, rho), json!({ "d": d, "d_fin": d_fin }))
        }
        _ => bail!("certify needs --input or --d/--d-fin with a target image"),
    };
    let rep = report(argv, config, None, CertificateReport::from(&cert), start);
    emit(a.output.out.as_deref(), &to_json(&rep)?)?;
    Ok(claim_exit_code(cert.claim))
}

#[derive(Debug, Serialize)]
struct SearchReport {
    verdict: &'static str,
    best_residual: Real,
    best_restart: usize,
    best_env_spectrum: Vec<Real>,
    best_unitary: MatrixRows,
    residual_history: Vec<Real>,
    note: &'static str,
}

fn search_config_json(f: &SearchFlags) -> serde_json::Value {
    json!({
        "restarts": f.restarts,
        "max_iters": f.max_iters,
        "step_tolerance": f.step_tolerance,
        "realizable_threshold": f.realizable_threshold,
        "nonrealizable_threshold": f.nonrealizable_threshold,
    })
}

fn search(a: SearchArgs, argv: Vec<String>, start: Instant) -> Result<u8> {
    let ch = load_channel(&a.input)?;
    let cfg = a.search.config();
    cfg.validate()?;
    let res = search_mixed_env_realization(&ch, &cfg)?;
    let mut config = search_config_json(&a.search);
    config["input"] = json!(a.input.display().to_string());
    let results = SearchReport {
        verdict: res.verdict.as_str(),
        best_residual: Real(res.best_residual),
        best_restart: res.best_restart,
        best_env_spectrum: reals(&res.best_env_spectrum),
        best_unitary: matrix_to_rows(&res.best_unitary),
        residual_history: reals(&res.residual_history),
        note: EVIDENCE_NOTE,
    };
    let rep = report(argv, config, Some(cfg.seed), results, start);
    emit(a.output.out.as_deref(), &to_json(&rep)?)?;
    Ok(verdict_exit_code(res.verdict))
}

#[derive(Debug, Serialize)]
struct SampleReport {
    weight: Real,
    residual: Real,
    verdict: &'static str,
}

#[derive(Debug, Serialize)]
struct PerturbReport {
    radius: Real,
    n_samples: usize,
    fraction_likely_not_realizable: Real,
    fraction_realized: Real,
    residual_min: Real,
    residual_mean: Real,
    residual_median: Real,
    residual_max: Real,
    samples: Vec<SampleReport>,
    note: &'static str,
    verdict_note: &'static str,
}

fn perturb(a: PerturbArgs, argv: Vec<String>, start: Instant) -> Result<u8> {
    let center = load_channel(&a.input)?;
    let cfg = a.search.config();
    let rep = perturbation_experiment(&center, a.radius, a.samples, &cfg)?;
    let mut config = search_config_json(&a.search);
    config["input"] = json!(a.input.display().to_string());
    config["radius"] = json!(a.radius);
    config["samples"] = json!(a.samples);
    let results = PerturbReport {
        radius: Real(rep.radius),
        n_samples: rep.samples.len(),
        fraction_likely_not_realizable: Real(rep.fraction_likely_not_realizable),
        fraction_realized: Real(rep.fraction_realized),
        residual_min: Real(rep.residual_min),
        residual_mean: Real(rep.residual_mean),
        residual_median: Real(rep.residual_median),
        residual_max: Real(rep.residual_max),
        samples: rep
            .samples
            .iter()
            .map(|s| SampleReport {
                weight: Real(s.weight),
                residual: Real(s.residual),
                verdict: s.verdict.as_str(),
            })
            .collect(),
        note: PERTURBATION_NOTE,
        verdict_note: EVIDENCE_NOTE,
    };
    let out = report(argv, config, Some(cfg.seed), results, start);
    emit(a.output.out.as_deref(), &to_json(&out)?)?;
    Ok(EXIT_OK)
}

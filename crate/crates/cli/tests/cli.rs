use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qop_cli::files::{read_json, ChannelFile, Representation, StateFile, FILE_TP_TOLERANCE};
use qop_core::{distance, Channel, DensityMatrix};
use serde_json::Value;
use tempfile::TempDir;

fn qop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qop")).args(args).output().expect("spawn qop")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn channel(p: &Path) -> Channel {
    read_json::<ChannelFile>(p).unwrap().to_channel().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report json")
}

#[test]
fn build_counterexample_from_coefficients() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "cex.json");
    let o = qop(&[
        "build", "counterexample", "--d", "2", "--d-fin", "2",
        "--alpha", "0.7071067811865476", "--beta", "0.7071067811865476", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let file: ChannelFile = read_json(&out).unwrap();
    // Choi rank is (d − 1) + rank(ρ') = 3
    assert_eq!(file.kraus.as_ref().unwrap().len(), 3);
    let ch = channel(&out);
    let img = ch.apply(&qop_core::PureState::basis(2, 1).density()).unwrap();
    assert!(img.matrix().distance(DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);
}

#[test]
fn build_rejects_bad_parameters() {
    let o = qop(&["build", "counterexample", "--d", "2", "--d-fin", "2", "--rho-target", "1.0,0.0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("target image must be mixed"));
    let o = qop(&["build", "counterexample", "--d", "2", "--d-fin", "2", "--alpha", "1", "--beta", "0"]);
    assert_eq!(code(&o), 2);
    let o = qop(&["build", "counterexample", "--d", "2", "--d-fin", "2", "--rho-target", "0.5,0.6"]);
    assert_eq!(code(&o), 2);
    let o = qop(&["build", "random", "--d", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn build_random_is_valid_and_seeded() {
    let a = qop(&["build", "random", "--d", "2", "--d-fin", "2", "--seed", "7"]);
    let b = qop(&["build", "random", "--d", "2", "--d-fin", "2", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let file: ChannelFile = serde_json::from_slice(&a.stdout).unwrap();
    let ch = file.to_channel().unwrap();
    assert!(ch.kraus().trace_preservation_error() < FILE_TP_TOLERANCE);
    let c = qop(&["build", "random", "--d", "2", "--d-fin", "2", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn params_prints_the_count() {
    let o = qop(&["params", "--d", "2", "--d-fin", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "12");
    let o = qop(&["params", "--d", "3", "--d-fin", "2"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "27");
}

#[test]
fn certify_exit_codes_follow_the_claim() {
    let o = qop(&["certify", "--d", "3", "--d-fin", "2", "--rho-target", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["results"]["claim"], "NOT_REALIZABLE");
    let narrative = r["results"]["narrative"].to_string();
    assert!(narrative.contains("4 > 3"), "{narrative}");

    let o = qop(&["certify", "--d", "2", "--d-fin", "2", "--rho-target", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["results"]["d2_branch_used"], true);

    let dir = TempDir::new().unwrap();
    let id = path(&dir, "id.json");
    std::fs::write(&id, serde_json::to_string(&ChannelFile::from_channel(&Channel::identity(2), Representation::Kraus)).unwrap()).unwrap();
    let o = qop(&["certify", "--input", s(&id)]);
    assert_eq!(code(&o), 3);
    assert_eq!(report(&o)["results"]["claim"], "INCONCLUSIVE");

    let o = qop(&["certify", "--d", "2", "--d-fin", "2", "--rho-target", "1,0"]);
    assert_eq!(code(&o), 3);

    let missing = path(&dir, "missing.json");
    assert_eq!(code(&qop(&["certify", "--input", s(&missing)])), 2);
    std::fs::write(&missing, "{not json").unwrap();
    assert_eq!(code(&qop(&["certify", "--input", s(&missing)])), 2);
}

#[test]
fn certify_accepts_rotated_family_members() {
    let dir = TempDir::new().unwrap();
    let cex = path(&dir, "cex.json");
    qop(&["build", "counterexample", "--d", "3", "--d-fin", "3", "--rho-target", "0.2,0.3,0.5", "--out", s(&cex)]);
    let o = qop(&["certify", "--input", s(&cex)]);
    assert_eq!(code(&o), 0);
}

#[test]
fn search_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let target = path(&dir, "t.json");
    assert_eq!(code(&qop(&["build", "from-dilation", "--d", "2", "--d-fin", "2", "--seed", "3", "--out", s(&target)])), 0);
    let o = qop(&["search", "--input", s(&target), "--restarts", "10"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r["results"]["verdict"], "REALIZED");
    assert!(r["results"]["best_residual"].as_f64().unwrap() < 1e-6);

    let cex = path(&dir, "cex.json");
    qop(&["build", "counterexample", "--d", "2", "--d-fin", "2", "--rho-target", "0.5,0.5", "--out", s(&cex)]);
    let o = qop(&["search", "--input", s(&cex), "--restarts", "5"]);
    assert_eq!(code(&o), 4);
    let r = report(&o);
    assert!(r["results"]["note"].as_str().unwrap().contains("not a proof"));

    assert_eq!(code(&qop(&["search", "--input", s(&cex), "--restarts", "0"])), 2);

    // thresholds straddling the attained residual give UNDECIDED
    let o = qop(&[
        "search", "--input", s(&cex), "--restarts", "2",
        "--realizable-threshold", "1e-9", "--nonrealizable-threshold", "10",
    ]);
    assert_eq!(code(&o), 5);
}

#[test]
fn reports_reproduce_from_their_command_echo() {
    let dir = TempDir::new().unwrap();
    let cex = path(&dir, "cex.json");
    qop(&["build", "counterexample", "--d", "2", "--d-fin", "2", "--rho-target", "0.6,0.4", "--out", s(&cex)]);
    let out = path(&dir, "report.json");
    assert_eq!(code(&qop(&["search", "--input", s(&cex), "--restarts", "3", "--seed", "11", "--out", s(&out)])), 4);
    let first: Value = read_json(&out).unwrap();
    assert_eq!(first["seed"], 11);
    let echoed: Vec<String> = serde_json::from_value(first["command"].clone()).unwrap();
    let echoed: Vec<&str> = echoed.iter().map(String::as_str).collect();
    qop(&echoed);
    let second: Value = read_json(&out).unwrap();
    assert_eq!(first["results"], second["results"]);
    assert_eq!(first["config"], second["config"]);
}

#[test]
fn convert_round_trip_and_apply() {
    let dir = TempDir::new().unwrap();
    let k = path(&dir, "k.json");
    let c = path(&dir, "c.json");
    let k2 = path(&dir, "k2.json");
    qop(&["build", "random", "--d", "2", "--d-fin", "3", "--seed", "5", "--out", s(&k)]);
    assert_eq!(code(&qop(&["convert", "--input", s(&k), "--to", "choi", "--out", s(&c)])), 0);
    assert_eq!(read_json::<ChannelFile>(&c).unwrap().representation, Representation::Choi);
    assert_eq!(code(&qop(&["convert", "--input", s(&c), "--to", "kraus", "--out", s(&k2)])), 0);
    assert!(distance(&channel(&k), &channel(&k2)).unwrap() < 1e-9);

    let id = path(&dir, "id.json");
    std::fs::write(&id, serde_json::to_string(&ChannelFile::from_channel(&Channel::identity(3), Representation::Choi)).unwrap()).unwrap();
    let mut rng = qop_core::random::stream_rng(9, 0);
    let rho = qop_core::random::random_density_matrix(3, 3, &mut rng);
    let state = path(&dir, "rho.json");
    std::fs::write(&state, serde_json::to_string(&StateFile::from_state(&rho)).unwrap()).unwrap();
    let out = path(&dir, "out.json");
    assert_eq!(code(&qop(&["apply", "--input", s(&id), "--state", s(&state), "--out", s(&out)])), 0);
    let back = read_json::<StateFile>(&out).unwrap().to_state().unwrap();
    assert!(back.matrix().distance(rho.matrix()) < 1e-10);

    // dimension mismatch
    assert_eq!(code(&qop(&["apply", "--input", s(&k), "--state", s(&state)])), 2);
}

#[test]
fn perturb_reports_are_flagged_observational() {
    let dir = TempDir::new().unwrap();
    let id = path(&dir, "id.json");
    std::fs::write(&id, serde_json::to_string(&ChannelFile::from_channel(&Channel::identity(2), Representation::Kraus)).unwrap()).unwrap();
    let o = qop(&["perturb", "--input", s(&id), "--radius", "0.01", "--samples", "2", "--restarts", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["results"]["samples"].as_array().unwrap().len(), 2);
    assert!(r["results"]["note"].as_str().unwrap().contains("observations"));
    assert_eq!(code(&qop(&["perturb", "--input", s(&id), "--radius", "1.0"])), 2);
    assert_eq!(code(&qop(&["perturb", "--input", s(&id), "--radius", "0"])), 2);
}

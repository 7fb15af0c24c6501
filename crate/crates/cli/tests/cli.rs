use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hto_core::analysis::heat_matrix::reconstruct;
use hto_core::channel::unit_matrix;
use hto_core::io::{ChannelJson, MatrixJson};
use hto_core::linalg::{self, diag};
use hto_core::KrausChannel;
use serde_json::Value;
use tempfile::TempDir;

fn hto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hto")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, value: &impl serde::Serialize) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_vec(value).unwrap()).unwrap();
    path
}

fn matrix(dir: &TempDir, name: &str, m: &linalg::Mat) -> PathBuf {
    write(dir, name, &MatrixJson::from_matrix(m))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn swap_fixture(dir: &TempDir) -> PathBuf {
    let rho0 = matrix(dir, "rho0.json", &diag(&[2.0 / 3.0, 1.0 / 3.0]));
    let out = dir.path().join("swap.json");
    let run = hto(&["swap-case", "--rho0", s(&rho0), "--out", s(&out)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    out
}

#[test]
fn identity_realization_has_zero_hto() {
    let dir = TempDir::new().unwrap();
    let realization = serde_json::json!({
        "dim_A": 2,
        "beta": 1.0,
        "bath_h": MatrixJson::from_matrix(&diag(&[0.0, 1.0])),
        "isometry": MatrixJson::from_matrix(&linalg::identity(4)),
    });
    let path = write(&dir, "id.json", &realization);
    let out = hto(&["hto-compute", s(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    assert!(floats(&report["hto_eigenvalues"]).iter().all(|e| e.abs() < 1e-12));
    assert!(report["lep_min_slack"].as_f64().unwrap() > -1e-10);
    assert_eq!(report["kraus"]["kraus"].as_array().unwrap().len(), 1);
}

#[test]
fn swap_fixture_eigenvalues() {
    let dir = TempDir::new().unwrap();
    let fixture = swap_fixture(&dir);
    let out = hto(&["hto-compute", s(&fixture)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    // −ln p − S(ρ_0) for p ∈ {2/3, 1/3}.
    let (p0, p1) = (2.0f64 / 3.0, 1.0f64 / 3.0);
    let entropy = -(p0 * p0.ln() + p1 * p1.ln());
    let expected = [-p0.ln() - entropy, -p1.ln() - entropy];
    let eig = floats(&report["hto_eigenvalues"]);
    assert!((eig[0] - expected[0]).abs() < 1e-10 && (eig[1] - expected[1]).abs() < 1e-10, "{eig:?}");
    assert!((eig[0] + 0.23105).abs() < 1e-5 && (eig[1] - 0.46209).abs() < 1e-5);
    assert!((report["j_of_beta_q"].as_f64().unwrap() + entropy).abs() < 1e-10);
}

#[test]
fn corrupted_isometry_is_an_invariant_violation() {
    let dir = TempDir::new().unwrap();
    let mut v = linalg::identity(4);
    v[(0, 0)] = linalg::c(1.1);
    let realization = serde_json::json!({
        "dim_A": 2,
        "beta": 1.0,
        "bath_h": MatrixJson::from_matrix(&diag(&[0.0, 1.0])),
        "isometry": MatrixJson::from_matrix(&v),
    });
    let path = write(&dir, "bad.json", &realization);
    let out = hto(&["hto-compute", s(&path)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("deviation"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(code(&hto(&["hto-compute", s(&path)])), 2);
    let short = write(&dir, "short.json", &serde_json::json!({"dim": 2, "entries": [[1.0, 0.0]]}));
    let rho0 = matrix(&dir, "rho0.json", &diag(&[1.0, 0.0]));
    assert_eq!(code(&hto(&["decide", "complete", "--q", s(&short), "--rho0", s(&rho0)])), 2);
    assert_eq!(code(&hto(&["erasure-synth"])), 2);
}

#[test]
fn tolerances_may_only_tighten() {
    let dir = TempDir::new().unwrap();
    let fixture = swap_fixture(&dir);
    assert_eq!(code(&hto(&["--tol-lep", "1e-3", "hto-compute", s(&fixture)])), 2);
    assert_eq!(code(&hto(&["--tol-lep", "1e-9", "hto-compute", s(&fixture)])), 0);
    assert_eq!(code(&hto(&["--beta", "-1", "hto-compute", s(&fixture)])), 2);
}

#[test]
fn erasure_synth_reports() {
    let dir = TempDir::new().unwrap();
    let q = matrix(&dir, "q.json", &diag(&[1.0, 2.0]));
    let out = hto(&["erasure-synth", "--q", s(&q), "--pure", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = stdout_json(&out);
    let margin = r["szilard_margin"].as_f64().unwrap();
    let expected = 1.0 - (-1.0f64).exp() - (-2.0f64).exp();
    assert!(margin > 0.0 && (margin - expected).abs() < 1e-9, "{margin}");
    let j = -((-1.0f64).exp() + (-2.0f64).exp()).ln();
    assert!((r["delta_target"].as_f64().unwrap() - j).abs() < 1e-12);
    assert!((r["delta_achieved"].as_f64().unwrap() - j).abs() < 1e-10);
    assert!(r["epsilon_tail"].as_f64().unwrap() <= 1e-8);
    assert!(r["ln_Z_B"].as_f64().unwrap().is_finite());
    assert!(r["channel_distance"].as_f64().unwrap() <= 2e-8);
}

#[test]
fn erasure_synth_rejects_inadmissible_q() {
    let dir = TempDir::new().unwrap();
    let q = matrix(&dir, "q.json", &diag(&[0.1, 0.2]));
    let out = hto(&["erasure-synth", "--q", s(&q), "--pure", "0"]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).contains("J = "), "{}", stderr(&out));
}

#[test]
fn erasure_synth_suggests_more_sites() {
    let dir = TempDir::new().unwrap();
    let q = matrix(&dir, "q.json", &diag(&[1.0, 2.0]));
    let out = hto(&["erasure-synth", "--q", s(&q), "--pure", "0", "-n", "2"]);
    assert_eq!(code(&out), 6);
    assert!(stderr(&out).contains("N ≥"), "{}", stderr(&out));
}

#[test]
fn complete_erasure_to_mixed_state() {
    let dir = TempDir::new().unwrap();
    let q = matrix(&dir, "q.json", &diag(&[0.3, 0.9]));
    let rho0 = matrix(&dir, "rho0.json", &diag(&[0.75, 0.25]));
    let out = hto(&["complete-erasure-synth", "--q", s(&q), "--rho0", s(&rho0)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = stdout_json(&out);
    assert_eq!(r["chain"]["M"].as_u64(), Some(20));
    assert!(r["hto_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let fixture = swap_fixture(&dir);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert_eq!(code(&hto(&["--seed", "7", "hto-compute", s(&fixture), "--out", s(p)])), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta = serde_json::from_slice::<Value>(&std::fs::read(&a).unwrap()).unwrap()["meta"].clone();
    assert_eq!(meta["seed"].as_u64(), Some(7));
    assert_eq!(meta["command"].as_str(), Some("hto-compute"));
}

fn study(dir: &TempDir, x: &linalg::Mat, extra: &[&str]) -> Vec<Vec<String>> {
    let x = matrix(dir, "x.json", x);
    let mut args = vec!["study-et", "--x", s(&x)];
    args.extend_from_slice(extra);
    let out = hto(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap().get(2), Some("B_t"));
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn study_default_grid() {
    let dir = TempDir::new().unwrap();
    let rows = study(&dir, &unit_matrix(2, 0, 1), &[]);
    assert_eq!(rows.len(), 3);
    let b: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(b[0] > b[1] && b[1] > b[2], "{b:?}");
    assert!(rows.iter().all(|r| r[1] == "ok"));
}

#[test]
fn study_single_t_and_infeasible_rows() {
    let dir = TempDir::new().unwrap();
    assert_eq!(study(&dir, &unit_matrix(2, 0, 1), &["--t", "0.3"]).len(), 1);
    let rows = study(&dir, &(unit_matrix(2, 0, 1) * linalg::c(2.0)), &["--t", "0.9,0.3"]);
    assert_eq!(rows[0][1], "infeasible");
    assert!(rows[0][2].is_empty());
    assert_eq!(rows[1][1], "ok");
}

fn e_t(dir: &TempDir, t: f64) -> (KrausChannel, PathBuf) {
    let ch = KrausChannel::e_t(&unit_matrix(2, 0, 1), t).unwrap();
    let path = write(dir, "channel.json", &ChannelJson::from_channel(&ch));
    (ch, path)
}

#[test]
fn decide_extremal_both_ways() {
    let dir = TempDir::new().unwrap();
    let (ch, channel) = e_t(&dir, 0.5);
    let good = matrix(&dir, "good.json", &reconstruct(&diag(&[1.2, 0.9]), &ch));
    let out = hto(&["decide", "extremal", "--q", s(&good), "--channel", s(&channel)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["verdict"].as_str(), Some("admissible"));

    let bad = matrix(&dir, "bad.json", &reconstruct(&diag(&[0.5, 0.5]), &ch));
    let out = hto(&["decide", "extremal", "--q", s(&bad), "--channel", s(&channel)]);
    assert_eq!(code(&out), 5);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"].as_str(), Some("inadmissible"));
    // tr e^{−q} for q = diag(0.5, 0.5).
    let trace = 2.0 * (-0.5f64).exp();
    assert!((v["certificate"]["trace"].as_f64().unwrap() - trace).abs() < 1e-10);
    assert!(stderr(&out).contains("trace_test"));
}

#[test]
fn decide_extremal_outside_the_span() {
    let dir = TempDir::new().unwrap();
    // On a qutrit the products M_i†M_j of E_t span only a four-dimensional subspace.
    let ch = KrausChannel::e_t(&unit_matrix(3, 0, 1), 0.5).unwrap();
    let channel = write(&dir, "channel.json", &ChannelJson::from_channel(&ch));
    let off = matrix(&dir, "off.json", &(unit_matrix(3, 0, 2) + unit_matrix(3, 2, 0)));
    let out = hto(&["decide", "extremal", "--q", s(&off), "--channel", s(&channel)]);
    assert_eq!(code(&out), 5);
    assert_eq!(stdout_json(&out)["certificate"]["kind"].as_str(), Some("not_in_span"));
    assert_eq!(code(&hto(&["extract-q", "--q", s(&off), "--channel", s(&channel)])), 5);
}

#[test]
fn decide_lep_for_a_unitary() {
    let dir = TempDir::new().unwrap();
    let channel = write(
        &dir,
        "u.json",
        &ChannelJson::from_channel(&KrausChannel::unitary(linalg::pauli_x()).unwrap()),
    );
    let zero = matrix(&dir, "zero.json", &diag(&[0.0, 0.0]));
    let out = hto(&["decide", "lep", "--q", s(&zero), "--channel", s(&channel)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let negative = matrix(&dir, "neg.json", &diag(&[-0.1, 0.2]));
    let out = hto(&["decide", "lep", "--q", s(&negative), "--channel", s(&channel)]);
    assert_eq!(code(&out), 5);
    let min = stdout_json(&out)["certificate"]["min_value"].as_f64().unwrap();
    assert!((min + 0.1).abs() < 1e-6, "{min}");
}

#[test]
fn decide_complete_boundary_and_gap() {
    let dir = TempDir::new().unwrap();
    let fixture = swap_fixture(&dir);
    let swap: Value = serde_json::from_slice(&std::fs::read(&fixture).unwrap()).unwrap();
    let q = write(&dir, "q.json", &swap["hto"]);
    let rho0 = dir.path().join("rho0.json");
    let out = hto(&["decide", "complete", "--q", s(&q), "--rho0", s(&rho0)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["verdict"].as_str(), Some("boundary-case"));
    let low = matrix(&dir, "low.json", &diag(&[-1.0, -1.0]));
    assert_eq!(code(&hto(&["decide", "complete", "--q", s(&low), "--rho0", s(&rho0)])), 5);
}

#[test]
fn extract_then_widen() {
    let dir = TempDir::new().unwrap();
    let (ch, channel) = e_t(&dir, 0.5);
    let q = matrix(&dir, "q.json", &reconstruct(&diag(&[1.2, 0.9]), &ch));
    let extracted = dir.path().join("h.json");
    let out = hto(&["extract-q", "--q", s(&q), "--channel", s(&channel), "--out", s(&extracted)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let h: Value = serde_json::from_slice(&std::fs::read(&extracted).unwrap()).unwrap();
    assert_eq!(h["unique"].as_bool(), Some(true));
    let heat = write(&dir, "heat.json", &h["q"]);
    let s_mat = matrix(&dir, "s.json", &diag(&[0.1, 0.2]));
    let out = hto(&["widen-q", "--q", s(&heat), "--s", s(&s_mat)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let w = stdout_json(&out);
    assert_eq!(w["certificate"]["kind"].as_str(), Some("widened"));
    assert!(w["szilard_trace"].as_f64().unwrap() < 1.0);
    let widened = write(&dir, "widened.json", &w);
    let out = hto(&["widen-q", "--q", s(&widened), "--s", s(&s_mat)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn widen_rejects_inadmissible_base() {
    let dir = TempDir::new().unwrap();
    let base = matrix(&dir, "q.json", &diag(&[0.1, 0.1]));
    let s_mat = matrix(&dir, "s.json", &diag(&[1.0, 1.0]));
    assert_eq!(code(&hto(&["widen-q", "--q", s(&base), "--s", s(&s_mat)])), 5);
}

#[test]
fn oracle_check_passes() {
    let dir = TempDir::new().unwrap();
    let q = matrix(&dir, "q.json", &diag(&[0.4, 1.3]));
    let out = hto(&["oracle-check", "--q", s(&q), "--pure", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = stdout_json(&out);
    assert_eq!(r["passes"].as_bool(), Some(true));
    assert_eq!(r["joint_dim"].as_u64(), Some(16));
    let rho0 = matrix(&dir, "rho0.json", &diag(&[0.6, 0.4]));
    let out = hto(&["oracle-check", "--q", s(&q), "--rho0", s(&rho0)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

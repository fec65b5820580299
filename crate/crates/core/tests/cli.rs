use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fockmaj::verify::VerificationReport;
use fockmaj::{DensityMatrix, FockDistribution, TransferMatrix};

fn fockmaj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockmaj"))
        .args(args)
        .env("FOCKMAJ_THREADS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn ladder_passes_with_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = path(dir.path(), "r.json");
    let csv = path(dir.path(), "r.csv");
    let out = fockmaj(&[
        "verify", "ladder", "--eta", "0.5", "--dim", "10", "--report", &report, "--csv", &csv,
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let rep: VerificationReport =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.grid["max_n"], 10);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn negative_tolerance_is_rejected() {
    let out = fockmaj(&[
        "verify",
        "passivity",
        "--eta",
        "0.3",
        "--dim",
        "4",
        "--tol=-1.0",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"dim":2,"probs":[0.0,1.0]}"#);
    assert_eq!(
        code(&fockmaj(&[
            "channel", "apply", "--kind", "bs", "--eta", "2.0", "--env", "vacuum", "--in", &s
        ])),
        2
    );
    assert_eq!(
        code(&fockmaj(&[
            "channel", "apply", "--kind", "bs", "--eta", "0.5", "--env", "hot", "--in", &s
        ])),
        2
    );
    assert_eq!(code(&fockmaj(&["verify", "ladder", "--eta", "x"])), 2);
    assert_eq!(code(&fockmaj(&["--help"])), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_fockmaj"))
        .args(["verify", "ladder", "--eta", "0.5", "--dim", "2"])
        .env("FOCKMAJ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn channel_apply_round_trips_states() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", r#"{"dim":2,"probs":[0.0,1.0]}"#);
    let out_path = path(dir.path(), "out.json");
    let out = fockmaj(&[
        "channel", "apply", "--kind", "bs", "--eta", "0.3", "--env", "vacuum", "--in", &input,
        "--out", &out_path,
    ]);
    assert_eq!(code(&out), 0);
    let dist: FockDistribution =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(dist.probs(), &[0.7, 0.3]);

    // The output feeds back into every other subcommand.
    let again = path(dir.path(), "again.json");
    let out = fockmaj(&[
        "channel",
        "apply",
        "--kind",
        "tms",
        "--gain",
        "2",
        "--env",
        "thermal:0.5",
        "--in",
        &out_path,
        "--out",
        &again,
    ]);
    assert_eq!(code(&out), 0);
    let check = fockmaj(&["majorize", "check", "--a", &out_path, "--b", &again]);
    assert_eq!(code(&check), 0);

    let full = path(dir.path(), "full.json");
    let out = fockmaj(&[
        "channel",
        "apply",
        "--kind",
        "bs",
        "--eta",
        "0.3",
        "--env",
        "projector:2",
        "--in",
        &out_path,
        "--out",
        &full,
        "--full",
    ]);
    assert_eq!(code(&out), 0);
    let rho: DensityMatrix = serde_json::from_str(&fs::read_to_string(&full).unwrap()).unwrap();
    assert!((rho.trace() - 1.0).abs() < 1e-12);
    assert_eq!(code(&fockmaj(&["decompose", "passive", "--in", &full])), 0);
}

#[test]
fn raw_projector_output_is_unnormalized() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", r#"{"dim":1,"probs":[1.0]}"#);
    let out = fockmaj(&[
        "channel",
        "apply",
        "--eta",
        "0.5",
        "--env",
        "projector-raw:1",
        "--in",
        &input,
    ]);
    assert_eq!(code(&out), 0);
    let dist: FockDistribution = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!dist.is_normalized());
    assert!((dist.get(0) - 1.5).abs() < 1e-15 && (dist.get(1) - 0.5).abs() < 1e-15);
    assert_eq!(
        code(&fockmaj(&[
            "channel",
            "apply",
            "--eta",
            "0.5",
            "--env",
            "projector-raw:1",
            "--in",
            &input,
            "--full"
        ])),
        2
    );
}

#[test]
fn truncation_budget_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", r#"{"dim":2,"probs":[0.0,1.0]}"#);
    let out = fockmaj(&[
        "channel",
        "apply",
        "--kind",
        "tms",
        "--gain",
        "3",
        "--max-photons",
        "5",
        "--in",
        &input,
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn majorize_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"dim":3,"probs":[0.6,0.3,0.1]}"#);
    let b = write(dir.path(), "b.json", r#"{"dim":3,"probs":[0.3,0.4,0.3]}"#);
    let out = fockmaj(&["majorize", "check", "--a", &a, "--b", &b]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("fock_majorizes: true"), "{text}");
    assert!(text.contains("majorizes: true"), "{text}");

    let l = path(dir.path(), "l.json");
    assert_eq!(
        code(&fockmaj(&[
            "majorize",
            "construct-L",
            "--a",
            &a,
            "--b",
            &b,
            "--out",
            &l
        ])),
        0
    );
    let l: TransferMatrix = serde_json::from_str(&fs::read_to_string(&l).unwrap()).unwrap();
    let image = l.apply(&[0.6, 0.3, 0.1]).unwrap();
    for (x, y) in image.iter().zip([0.3, 0.4, 0.3]) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(
        code(&fockmaj(&["majorize", "construct-L", "--a", &b, "--b", &a])),
        1
    );

    let csv = path(dir.path(), "gaps.csv");
    assert_eq!(
        code(&fockmaj(&[
            "majorize",
            "functional-test",
            "--a",
            &a,
            "--b",
            &b,
            "--csv",
            &csv
        ])),
        0
    );
    assert!(fs::read_to_string(&csv).unwrap().lines().count() > 3);
    assert_eq!(
        code(&fockmaj(&[
            "majorize",
            "functional-test",
            "--a",
            &b,
            "--b",
            &a
        ])),
        1
    );
}

#[test]
fn amplitudes_table_export() {
    let out = fockmaj(&[
        "amplitudes",
        "table",
        "--eta",
        "0.5",
        "--max-i",
        "1",
        "--max-k",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let keys: Vec<_> = doc["entries"]
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    assert_eq!(keys, ["0,0", "0,1", "1,0", "1,1"]);
    let hom = doc["entries"]["1,1"].as_array().unwrap();
    assert!(hom[1].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn suites_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let defaults = write(
        dir.path(),
        "d.json",
        r#"{"samples": 40, "seed": 5, "dim": 6}"#,
    );
    let out = fockmaj(&[
        "--defaults",
        &defaults,
        "verify",
        "preservation",
        "--kind",
        "tms",
        "--gain",
        "1.5",
        "--env",
        "projector:2",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = fockmaj(&[
        "verify",
        "duality",
        "--eta",
        "0.7",
        "--env",
        "thermal:0.5",
        "--samples",
        "4",
        "--dim",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn counterexample_search_and_confirm() {
    let dir = tempfile::tempdir().unwrap();
    let cx = path(dir.path(), "cx.json");
    let out = fockmaj(&[
        "verify",
        "counterexample",
        "--eta",
        "0.5",
        "--env",
        "vacuum",
        "--dim",
        "6",
        "--out",
        &cx,
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("counterexample: r = [0.0, 1.0]"));
    assert_eq!(
        code(&fockmaj(&[
            "verify",
            "counterexample",
            "--eta",
            "0.5",
            "--confirm",
            &cx
        ])),
        0
    );
    // The same pair is harmless for the identity channel.
    assert_eq!(
        code(&fockmaj(&[
            "verify",
            "counterexample",
            "--eta",
            "1.0",
            "--confirm",
            &cx
        ])),
        1
    );
    let out = fockmaj(&[
        "verify",
        "counterexample",
        "--eta",
        "0.5",
        "--env",
        "thermal:0.5",
        "--passive-only",
        "--probes",
        "200",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("no counterexample"));
}

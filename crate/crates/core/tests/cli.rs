use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn relaxcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("json summary on stdout");
    serde_json::from_str(line).unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, Value) {
    let mut full: Vec<&str> = args.to_vec();
    let d = dir.to_str().unwrap();
    full.extend(["--out", d]);
    let out = relaxcert(&full);
    (out.status.code().unwrap(), summary(&out))
}

#[test]
fn solve_writes_artifacts_and_reproduces_hashes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["solve", "--family", "local", "--lc", "0.1", "--n", "120"];
    let (code, s1) = run_in(a.path(), &args);
    assert_eq!(code, 0);
    let (_, s2) = run_in(b.path(), &args);
    for f in [
        "decomposition.csv",
        "f_r.csv",
        "coefficients.csv",
        "atoms.json",
        "relaxation.json",
        "solve.json",
    ] {
        assert!(a.path().join(f).exists(), "missing {f}");
    }
    // file hashes cover the recorded output path; content hashes do not
    assert_eq!(s1["content_sha256"], s2["content_sha256"]);
    let header = |d: &Path| {
        std::fs::read_to_string(d.join("f_r.csv"))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(header(a.path()), header(b.path()));

    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("solve.json")).unwrap())
            .unwrap();
    let other: Value =
        serde_json::from_str(&std::fs::read_to_string(b.path().join("solve.json")).unwrap())
            .unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["config_sha256"], other["config_sha256"]);
    assert_eq!(doc["config"]["n"], 120);

    let csv = std::fs::read_to_string(a.path().join("f_r.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# schema=1 config_sha256="));
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(lines.next().unwrap(), "x,F_R");
    assert_eq!(lines.count(), 120);
}

#[test]
fn certify_reports_an_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_in(dir.path(), &["certify", "--family", "local", "--n", "120"]);
    assert_eq!(code, 0);
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certify.json")).unwrap())
            .unwrap();
    let alpha = doc["result"]["certificate"]["alpha"].as_f64().unwrap();
    assert!((alpha - 1.0).abs() < 1e-6, "alpha {alpha}");
    // exact lattices skip recovery; a Morse run goes through it
    let morse = dir.path().join("morse");
    let (code, _) = run_in(
        &morse,
        &[
            "certify", "--family", "morse1d", "--n", "200", "--starts", "1",
        ],
    );
    assert_eq!(code, 0);
    for f in ["rho.csv", "kl_trace.csv", "lambda.csv", "certify.json"] {
        assert!(morse.join(f).exists(), "missing {f}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# local potential\nfamily = local\nlc = 0.25\nn = 80\n",
    )
    .unwrap();
    let (code, _) = run_in(
        dir.path(),
        &["solve", "--config", cfg.to_str().unwrap(), "--n", "100"],
    );
    assert_eq!(code, 0);
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["n"], 100);
    assert_eq!(doc["config"]["potential"]["lc"], 0.25);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--family", "bogus"],
        vec!["solve", "--set", "no_such_key=1"],
        vec!["solve", "--family", "local", "--lp-tol", "1e-40"],
        vec![
            "solve",
            "--family",
            "tabulated",
            "--tabulated",
            "/definitely/not/here.csv",
        ],
    ] {
        let (code, s) = run_in(dir.path(), &args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(s["status"], "error");
        assert_eq!(s["exit_code"], 2);
    }
    assert_eq!(relaxcert(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(relaxcert(&["--help"]).status.code(), Some(0));
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &[&str]); 3] = [
        (
            &["particles", "--n", "200", "--N", "50", "--t-end", "10"],
            &["snapshots.csv", "histogram.csv", "particles.json"],
        ),
        (
            &["threedelta", "--n", "128"],
            &["samples.csv", "threedelta.json"],
        ),
        (
            &["sweep", "--n", "64", "--set", "steps=3"],
            &[
                "checkpoint.jsonl",
                "table.jsonl",
                "regions.csv",
                "regions.json",
                "sweep.json",
            ],
        ),
    ];
    for (args, files) in cases {
        let sub = dir.path().join(args[0]);
        let (code, s) = run_in(&sub, args);
        assert_eq!(code, 0, "{args:?}: {s}");
        for f in files {
            assert!(sub.join(f).exists(), "{} missing {f}", args[0]);
        }
    }
}

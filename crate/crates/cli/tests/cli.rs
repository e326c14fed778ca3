use std::fs;
use std::process::{Command, Output};

fn knn_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knn-lab"))
        .args(args)
        .env("KNN_LAB_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn missing_subcommand_is_usage_error() {
    let o = knn_lab(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = knn_lab(&["simulate", "--n", "100", "--k", "3", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_one() {
    let o = knn_lab(&["simulate", "--n", "0.5", "--k", "3", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = knn_lab(&["report", "/nonexistent/results.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn constants_at_rounded_e_squared() {
    let o = knn_lab(&["constants", "--lambda", "7.389056", "--n", "1e6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("M         1280"));
    assert!(text.contains("N1        27916"));
    assert!(text.contains("guard check PASS"));
    let o = knn_lab(&["constants", "--lambda", "5", "--n", "1e6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let o = knn_lab(&[
            "simulate",
            "--n",
            "10000",
            "--k",
            "4",
            "--trials",
            "10",
            "--seed",
            "1",
            "--grid-samples",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_then_report_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let o = knn_lab(&[
        "sweep-k",
        "--n",
        "1000",
        "--k-min",
        "2",
        "--k-max",
        "4",
        "--trials",
        "20",
        "--seed",
        "3",
        "--grid-samples",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    // k = 2 is outside (0.3 log n, 0.6 log n) at n = 1000
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let printed = stdout(&o);
    let r = knn_lab(&["report", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let csv = stdout(&r);
    assert_eq!(csv, printed);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("k,p_connected,ci_lo,ci_hi,mean_small_components,tv_vs_poisson")
    );
    assert_eq!(lines.count(), 3);
    // warnings never reach the data file
    assert!(!fs::read_to_string(&out).unwrap().contains("warning"));
}

#[test]
fn sweep_needs_a_range() {
    let o = knn_lab(&["sweep-k", "--n", "1000", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_poisson_emits_chen_stein_report() {
    let o = knn_lab(&[
        "verify-poisson",
        "--n",
        "1000",
        "--k",
        "4",
        "--trials",
        "30",
        "--grid-samples",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(line["k"], 4);
    assert!(line["chen_stein"]["b1"].is_number());
    assert!(line.get("tv_X_vs_Po_nu").is_some());
}

#[test]
fn local_events_and_claims() {
    let o = knn_lab(&["local-events", "--n", "403.4", "--k", "2", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scaled"));
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(report["per_k"][0]["local"]["a_k"]["estimate"].is_number());
    let o = knn_lab(&["claims-check", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("claim2: accepted 2000"));
}

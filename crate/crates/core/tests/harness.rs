use std::fs;

use knn_lab_core::harness::{
    aggregate, read_jsonl, run_experiment, run_experiment_with, ExperimentConfig, Mode, RunOptions,
    StatsAccumulator,
};
use proptest::prelude::*;

fn small_config(trials: u64, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(400.0, vec![2, 3, 4], trials, seed);
    c.grid_sample_count = 4;
    c
}

#[test]
fn same_records_for_any_thread_count() {
    let c = small_config(24, 11);
    let one = run_experiment_with(
        &c,
        RunOptions {
            threads: Some(1),
            resume: false,
        },
    )
    .unwrap();
    let three = run_experiment_with(
        &c,
        RunOptions {
            threads: Some(3),
            resume: false,
        },
    )
    .unwrap();
    assert_eq!(one.records, three.records);
    assert_eq!(one.report, three.report);
}

#[test]
fn output_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, threads) in [1, 2].into_iter().enumerate() {
        let mut c = small_config(20, 5);
        let path = dir.path().join(format!("run{i}.jsonl"));
        c.output_path = Some(path.clone());
        run_experiment_with(
            &c,
            RunOptions {
                threads: Some(threads),
                resume: false,
            },
        )
        .unwrap();
        bytes.push(fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let text = String::from_utf8(bytes[0].clone()).unwrap();
    assert!(text.starts_with("{\"type\":\"config\""));
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("{\"type\":\"summary\""));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn records_round_trip_through_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(10, 9);
    c.output_path = Some(dir.path().join("r.jsonl"));
    let out = run_experiment(&c).unwrap();
    let parsed = read_jsonl(c.output_path.as_ref().unwrap()).unwrap();
    assert_eq!(parsed.records, out.records);
    let mut stored = parsed.config.unwrap();
    stored.output_path = c.output_path.clone();
    assert_eq!(stored, c);
    assert_eq!(parsed.summary.unwrap().report, out.report);
}

#[test]
fn resume_after_interruption_matches_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut full = small_config(40, 21);
    full.output_path = Some(dir.path().join("full.jsonl"));
    run_experiment(&full).unwrap();
    let reference = fs::read(full.output_path.as_ref().unwrap()).unwrap();

    // Cut the file in the middle of the 15th trial line.
    let text = String::from_utf8(reference.clone()).unwrap();
    let cut: usize = text.lines().take(15).map(|l| l.len() + 1).sum::<usize>() + 30;
    let partial = dir.path().join("partial.jsonl");
    fs::write(&partial, &reference[..cut]).unwrap();

    let mut resumed = full.clone();
    resumed.output_path = Some(partial.clone());
    let out = run_experiment_with(
        &resumed,
        RunOptions {
            threads: Some(2),
            resume: true,
        },
    )
    .unwrap();
    assert_eq!(out.resumed_trials, 14);
    assert_eq!(fs::read(&partial).unwrap(), reference);

    // A finished file is left alone.
    let again = run_experiment_with(
        &resumed,
        RunOptions {
            threads: None,
            resume: true,
        },
    )
    .unwrap();
    assert_eq!(again.resumed_trials, 40);
    assert_eq!(fs::read(&partial).unwrap(), reference);
}

#[test]
fn resume_refuses_a_different_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = small_config(5, 1);
    a.output_path = Some(dir.path().join("a.jsonl"));
    run_experiment(&a).unwrap();
    let mut b = small_config(5, 2);
    b.output_path = a.output_path.clone();
    assert!(run_experiment_with(
        &b,
        RunOptions {
            threads: None,
            resume: true
        }
    )
    .is_err());
}

#[test]
fn records_from_other_configs_are_rejected() {
    let a = run_experiment(&small_config(4, 1)).unwrap();
    let mut acc = StatsAccumulator::new(&small_config(4, 2)).unwrap();
    assert!(acc.observe(&a.records[0]).is_err());
    let mut other_k = small_config(4, 1);
    other_k.k_sweep = vec![2, 3];
    let mut acc = StatsAccumulator::new(&other_k).unwrap();
    assert!(acc.observe(&a.records[0]).is_err());
    let x = StatsAccumulator::new(&small_config(4, 1)).unwrap();
    let mut y = StatsAccumulator::new(&small_config(4, 3)).unwrap();
    assert!(y.merge(&x).is_err());
}

#[test]
fn local_mode_runs_and_reports_event_rates() {
    let mut c = ExperimentConfig::new(6f64.exp(), vec![2, 3], 30, 4);
    c.mode = Mode::Local;
    let out = run_experiment(&c).unwrap();
    assert!(out.warnings.iter().any(|w| w.contains("scaled")));
    for s in &out.report.per_k {
        let local = s.local.as_ref().unwrap();
        assert_eq!(local.a_k.trials, 30);
        assert!(s.chen_stein.is_none());
    }
    for r in &out.records {
        assert!(r.coupling_holds());
        assert!(r.bad_event_flags_by_k.is_empty());
    }
}

fn merged(
    records: &[knn_lab_core::harness::TrialRecord],
    cut: &[usize],
    c: &ExperimentConfig,
) -> StatsAccumulator {
    let mut bounds = vec![0];
    bounds.extend(cut.iter().copied());
    bounds.push(records.len());
    bounds.sort_unstable();
    let mut parts: Vec<StatsAccumulator> = bounds
        .windows(2)
        .map(|w| {
            let mut a = StatsAccumulator::new(c).unwrap();
            for r in &records[w[0]..w[1]] {
                a.observe(r).unwrap();
            }
            a
        })
        .collect();
    parts.reverse();
    let mut total = parts.pop().unwrap();
    while let Some(p) = parts.pop() {
        total.merge(&p).unwrap();
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merging_splits_equals_single_pass(cut in prop::collection::vec(0usize..=30, 0..4)) {
        let c = small_config(30, 77);
        let out = run_experiment(&c).unwrap();
        let whole = aggregate(&out.records, &c).unwrap();
        let split = merged(&out.records, &cut, &c).finalize().unwrap();
        prop_assert_eq!(whole, split);
    }
}

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};

use rayon::prelude::*;

use super::aggregate::{StatsAccumulator, StatsReport};
use super::config::ExperimentConfig;
use super::jsonl::{config_line, read_jsonl, summary_line, trial_line, Summary};
use super::record::{run_trial, TrialContext, TrialRecord};
use crate::error::{invalid, LabError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Continue an interrupted output file instead of overwriting it.
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: StatsReport,
    pub records: Vec<TrialRecord>,
    pub warnings: Vec<String>,
    /// Trials taken from an existing file rather than recomputed.
    pub resumed_trials: u64,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<RunOutcome> {
    let warnings = config.validate()?;
    let ctx = TrialContext::new(config)?;
    let pool = match options.threads {
        Some(0) => return invalid("thread count must be at least 1"),
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| LabError::Internal(e.to_string()))?,
        ),
        None => None,
    };
    let workers = pool
        .as_ref()
        .map_or_else(rayon::current_num_threads, |p| p.current_num_threads());

    let mut records = Vec::new();
    let mut sink: Option<BufWriter<File>> = None;
    if let Some(path) = &config.output_path {
        let existing = if options.resume && path.exists() {
            Some(read_jsonl(path)?)
        } else {
            None
        };
        match existing {
            Some(parsed) if parsed.config.is_some() => {
                let mut stored = parsed.config.clone().expect("checked");
                stored.output_path = config.output_path.clone();
                if &stored != config {
                    return invalid(format!("{} holds a different experiment", path.display()));
                }
                if parsed
                    .records
                    .iter()
                    .enumerate()
                    .any(|(i, r)| r.trial_id != i as u64)
                {
                    return invalid(format!("{} has trials out of order", path.display()));
                }
                records = parsed.records;
                let file = OpenOptions::new().write(true).open(path)?;
                file.set_len(parsed.valid_bytes)?;
                drop(file);
                if parsed.summary.is_none() {
                    sink = Some(BufWriter::new(OpenOptions::new().append(true).open(path)?));
                }
            }
            _ => {
                let mut w = BufWriter::new(File::create(path)?);
                w.write_all(config_line(config)?.as_bytes())?;
                sink = Some(w);
            }
        }
    }
    let resumed_trials = records.len() as u64;
    let complete = config.output_path.is_some() && sink.is_none();

    if !complete {
        let chunk = (workers * 8).max(16) as u64;
        let mut start = resumed_trials;
        while start < config.trial_count {
            let end = (start + chunk).min(config.trial_count);
            let work = || {
                (start..end)
                    .into_par_iter()
                    .map(|i| run_trial(config, &ctx, i))
                    .collect::<Result<Vec<_>>>()
            };
            let batch = match &pool {
                Some(p) => p.install(work)?,
                None => work()?,
            };
            if let Some(w) = sink.as_mut() {
                for rec in &batch {
                    w.write_all(trial_line(rec)?.as_bytes())?;
                }
                w.flush()?;
            }
            records.extend(batch);
            start = end;
        }
    }

    let mut acc = StatsAccumulator::new(config)?;
    for r in &records {
        acc.observe(r)?;
    }
    let report = acc.finalize()?;
    if let Some(mut w) = sink {
        w.write_all(
            summary_line(&Summary {
                complete: true,
                trials: records.len() as u64,
                report: report.clone(),
            })?
            .as_bytes(),
        )?;
        w.flush()?;
    }
    Ok(RunOutcome {
        report,
        records,
        warnings,
        resumed_trials,
    })
}

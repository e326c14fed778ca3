//! Seeded, parallel Monte Carlo runs with streamed JSON Lines output.

pub mod aggregate;
pub mod config;
pub mod jsonl;
pub mod record;
pub mod run;

pub use aggregate::{aggregate, KStats, StatsAccumulator, StatsReport};
pub use config::{ExperimentConfig, Mode, ScaledOverrides};
pub use jsonl::{read_jsonl, ParsedFile, Summary};
pub use record::{SmallComponentDetail, TrialRecord};
pub use run::{run_experiment, run_experiment_with, RunOptions, RunOutcome};

/// Aggregate CSV: one row per k.
pub fn report_csv(report: &StatsReport) -> String {
    let mut out = String::from("k,p_connected,ci_lo,ci_hi,mean_small_components,tv_vs_poisson\n");
    for s in &report.per_k {
        let tv = s
            .tv_vs_poisson
            .map_or_else(String::new, |v| format!("{v:.6}"));
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{}\n",
            s.k,
            s.connected.estimate,
            s.connected.ci_lo,
            s.connected.ci_hi,
            s.mean_small_components,
            tv
        ));
    }
    out
}

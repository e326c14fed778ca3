//! Mergeable aggregation of trial records into a [`StatsReport`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use super::record::TrialRecord;
use crate::error::{invalid, Result};
use crate::rng::derive_seed;
use crate::stats::{
    reconcile, tv_to_poisson, ChenSteinAccumulator, ChenSteinReport, CountDistribution,
    DependencySizes, Proportion, Reconciliation, TrialObservation,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadEventCounts {
    pub d1: u64,
    pub d2: u64,
    pub d3: u64,
    pub d4: u64,
    pub d5: u64,
    pub d6: u64,
    pub d7: u64,
    pub any: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCounts {
    pub a_k: u64,
    pub b_k: u64,
    pub bad_c: u64,
    pub b_k_without_bad_c: u64,
}

#[derive(Clone, Debug, PartialEq)]
struct KAccumulator {
    trials: u64,
    connected: u64,
    small_hist: BTreeMap<u64, u64>,
    two_or_more_small: u64,
    bad: BadEventCounts,
    local: LocalCounts,
    chen_stein: Option<ChenSteinAccumulator>,
}

/// Running state; `merge` is associative and commutative.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsAccumulator {
    config: ExperimentConfig,
    per_k: BTreeMap<usize, KAccumulator>,
    trials: u64,
}

impl StatsAccumulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let cs = match config.mode {
            Mode::Global => Some(ChenSteinAccumulator::new(
                &config.geometry()?,
                config.joint_sample_pairs,
            )),
            Mode::Local => None,
        };
        let per_k = config
            .k_sweep
            .iter()
            .map(|&k| {
                (
                    k,
                    KAccumulator {
                        trials: 0,
                        connected: 0,
                        small_hist: BTreeMap::new(),
                        two_or_more_small: 0,
                        bad: BadEventCounts::default(),
                        local: LocalCounts::default(),
                        chen_stein: cs.clone(),
                    },
                )
            })
            .collect();
        let mut config = config.clone();
        config.output_path = None;
        Ok(Self {
            config,
            per_k,
            trials: 0,
        })
    }

    pub fn observe(&mut self, rec: &TrialRecord) -> Result<()> {
        if rec.seed != derive_seed(self.config.base_seed, rec.trial_id) {
            return invalid(format!(
                "trial {} has seed {} which does not derive from base seed {}",
                rec.trial_id, rec.seed, self.config.base_seed
            ));
        }
        if !rec.connected_by_k.keys().eq(self.per_k.keys()) {
            return invalid(format!(
                "trial {} was run for a different k sweep",
                rec.trial_id
            ));
        }
        if rec.local_outcome.is_some() != (self.config.mode == Mode::Local) {
            return invalid(format!(
                "trial {} comes from a different mode",
                rec.trial_id
            ));
        }
        self.trials += 1;
        for (&k, acc) in self.per_k.iter_mut() {
            let connected = rec.connected_by_k[&k];
            let small = rec.small_component_count_by_k.get(&k).copied().unwrap_or(0);
            acc.trials += 1;
            acc.connected += u64::from(connected);
            *acc.small_hist.entry(small).or_insert(0) += 1;
            acc.two_or_more_small += u64::from(small >= 2);
            if let Some(f) = rec.bad_event_flags_by_k.get(&k) {
                let b = &mut acc.bad;
                b.d1 += u64::from(f.d1);
                b.d2 += u64::from(f.d2);
                b.d3 += u64::from(f.d3);
                b.d4 += u64::from(f.d4);
                b.d5 += u64::from(f.d5);
                b.d6 += u64::from(f.d6);
                b.d7 += u64::from(f.d7);
                b.any += u64::from(f.any());
            }
            if let Some(o) = rec.local_outcome.as_ref().and_then(|m| m.get(&k)) {
                acc.local.a_k += u64::from(o.a_k);
                acc.local.b_k += u64::from(o.b_k);
                acc.local.bad_c += u64::from(o.bad_c);
                acc.local.b_k_without_bad_c += u64::from(o.b_k && !o.bad_c);
            }
            if let Some(cs) = acc.chen_stein.as_mut() {
                let empty = Vec::new();
                let ys = rec.local_y_by_k.get(&k).unwrap_or(&empty);
                if ys.len() != rec.grid_samples.len() {
                    return invalid(format!(
                        "trial {} has mismatched grid samples",
                        rec.trial_id
                    ));
                }
                cs.observe(TrialObservation {
                    seed: rec.seed,
                    connected,
                    small_count: small,
                    cells: &rec.grid_samples,
                    ys,
                })?;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.config != other.config {
            return invalid("cannot merge aggregates of different configurations");
        }
        self.trials += other.trials;
        for (k, acc) in self.per_k.iter_mut() {
            let o = &other.per_k[k];
            acc.trials += o.trials;
            acc.connected += o.connected;
            for (&v, &c) in &o.small_hist {
                *acc.small_hist.entry(v).or_insert(0) += c;
            }
            acc.two_or_more_small += o.two_or_more_small;
            let (b, ob) = (&mut acc.bad, &o.bad);
            b.d1 += ob.d1;
            b.d2 += ob.d2;
            b.d3 += ob.d3;
            b.d4 += ob.d4;
            b.d5 += ob.d5;
            b.d6 += ob.d6;
            b.d7 += ob.d7;
            b.any += ob.any;
            acc.local.a_k += o.local.a_k;
            acc.local.b_k += o.local.b_k;
            acc.local.bad_c += o.local.bad_c;
            acc.local.b_k_without_bad_c += o.local.b_k_without_bad_c;
            if let (Some(a), Some(b)) = (acc.chen_stein.as_mut(), o.chen_stein.as_ref()) {
                a.merge(b)?;
            }
        }
        Ok(())
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn finalize(&self) -> Result<StatsReport> {
        let deps = match self.config.mode {
            Mode::Global => Some(DependencySizes::from_geometry(&self.config.geometry()?)),
            Mode::Local => None,
        };
        let mut per_k = Vec::new();
        for (&k, acc) in &self.per_k {
            let law = CountDistribution::from_histogram(&acc.small_hist);
            let connected = Proportion::new(acc.connected, acc.trials);
            let nu = (acc.connected > 0).then(|| -connected.estimate.ln());
            let tv_vs_poisson = match nu {
                Some(nu) if acc.trials > 0 => Some(tv_to_poisson(&law, nu)?),
                _ => None,
            };
            let mean_small = if acc.trials == 0 {
                0.0
            } else {
                acc.small_hist
                    .iter()
                    .map(|(&v, &c)| v as f64 * c as f64)
                    .sum::<f64>()
                    / acc.trials as f64
            };
            let chen_stein = match (&acc.chen_stein, deps) {
                (Some(cs), Some(d)) if acc.trials > 0 => Some(cs.finalize(d)?),
                _ => None,
            };
            let reconciliation = match &chen_stein {
                Some(r) => r.nu.map(|nu| reconcile(r.mu, nu)).transpose()?,
                None => None,
            };
            per_k.push(KStats {
                k,
                trials: acc.trials,
                connected,
                nu,
                mean_small_components: mean_small,
                small_count_hist: acc.small_hist.clone(),
                tv_vs_poisson,
                two_or_more_small: Proportion::new(acc.two_or_more_small, acc.trials),
                close_pair: Proportion::new(acc.bad.d5, acc.trials),
                any_bad_event: Proportion::new(acc.bad.any, acc.trials),
                bad_event_counts: acc.bad.clone(),
                local: (self.config.mode == Mode::Local).then(|| LocalStats {
                    a_k: Proportion::new(acc.local.a_k, acc.trials),
                    b_k: Proportion::new(acc.local.b_k, acc.trials),
                    bad_c: Proportion::new(acc.local.bad_c, acc.trials),
                    b_k_without_bad_c: Proportion::new(acc.local.b_k_without_bad_c, acc.trials),
                }),
                chen_stein,
                reconciliation,
            });
        }
        Ok(StatsReport {
            trials: self.trials,
            per_k,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalStats {
    pub a_k: Proportion,
    pub b_k: Proportion,
    pub bad_c: Proportion,
    pub b_k_without_bad_c: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStats {
    pub k: usize,
    pub trials: u64,
    pub connected: Proportion,
    /// `-log P̂(connected)`, absent when no trial was connected.
    pub nu: Option<f64>,
    pub mean_small_components: f64,
    pub small_count_hist: BTreeMap<u64, u64>,
    /// TV between the small-component count law and `Po_ν̂`.
    pub tv_vs_poisson: Option<f64>,
    pub two_or_more_small: Proportion,
    /// Trials with two small components closer than `8λ√(log n)`.
    pub close_pair: Proportion,
    pub any_bad_event: Proportion,
    pub bad_event_counts: BadEventCounts,
    pub local: Option<LocalStats>,
    pub chen_stein: Option<ChenSteinReport>,
    pub reconciliation: Option<Reconciliation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub trials: u64,
    pub per_k: Vec<KStats>,
}

impl StatsReport {
    pub fn for_k(&self, k: usize) -> Option<&KStats> {
        self.per_k.iter().find(|s| s.k == k)
    }
}

pub fn aggregate<'a>(
    records: impl IntoIterator<Item = &'a TrialRecord>,
    config: &ExperimentConfig,
) -> Result<StatsReport> {
    let mut acc = StatsAccumulator::new(config)?;
    for r in records {
        acc.observe(r)?;
    }
    acc.finalize()
}

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use crate::error::{LabError, Result};
use crate::graph::{analyze_global, is_connected, BadEventFlags, CountingGeometry, GridPoint};
use crate::local::events::outcome_from_graph;
use crate::local::{ConstantsBundle, LocalEventOutcome};
use crate::model::{build_knn_graph, sample_poisson_with, Point, PointSet};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallComponentDetail {
    pub k: usize,
    pub bottom_most: Point,
    pub diameter: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub seed: u64,
    pub point_count: usize,
    pub connected_by_k: BTreeMap<usize, bool>,
    /// In local mode: components wholly inside the central subsquare.
    pub small_component_count_by_k: BTreeMap<usize, u64>,
    pub small_component_details: Vec<SmallComponentDetail>,
    pub bad_event_flags_by_k: BTreeMap<usize, BadEventFlags>,
    pub local_outcome: Option<BTreeMap<usize, LocalEventOutcome>>,
    /// Longest edge at the smallest k of the sweep.
    pub longest_edge: f64,
    pub longest_edge_by_k: BTreeMap<usize, f64>,
    /// Sampled points of Γ, shared across k.
    pub grid_samples: Vec<GridPoint>,
    /// `Y(x)` at each sampled grid point, per k.
    pub local_y_by_k: BTreeMap<usize, Vec<bool>>,
    pub runtime_ms: u64,
}

impl TrialRecord {
    /// Connectivity never decreases along the sweep.
    pub fn coupling_holds(&self) -> bool {
        let flags: Vec<bool> = self.connected_by_k.values().copied().collect();
        flags.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Per-run context computed once.
pub(crate) enum TrialContext {
    Global(CountingGeometry),
    Local(ConstantsBundle),
}

impl TrialContext {
    pub(crate) fn new(config: &ExperimentConfig) -> Result<Self> {
        Ok(match config.mode {
            Mode::Global => Self::Global(config.geometry()?),
            Mode::Local => Self::Local(config.local_constants()?),
        })
    }
}

pub(crate) fn run_trial(
    config: &ExperimentConfig,
    ctx: &TrialContext,
    trial_id: u64,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = derive_seed(config.base_seed, trial_id);
    let mut rng = rng_from_seed(seed);
    let mut rec = TrialRecord {
        trial_id,
        seed,
        point_count: 0,
        connected_by_k: BTreeMap::new(),
        small_component_count_by_k: BTreeMap::new(),
        small_component_details: Vec::new(),
        bad_event_flags_by_k: BTreeMap::new(),
        local_outcome: None,
        longest_edge: 0.0,
        longest_edge_by_k: BTreeMap::new(),
        grid_samples: Vec::new(),
        local_y_by_k: BTreeMap::new(),
        runtime_ms: 0,
    };
    match ctx {
        TrialContext::Global(geo) => {
            let ps = PointSet {
                points: sample_poisson_with(&mut rng, geo.square(), 1.0)?,
                region: geo.square(),
                seed,
                intensity: 1.0,
            };
            let len = geo.gamma_len();
            rec.grid_samples = sample(&mut rng, len, config.grid_sample_count.min(len))
                .iter()
                .map(|i| geo.gamma_point(i))
                .collect();
            rec.point_count = ps.len();
            for &k in &config.k_sweep {
                let graph = build_knn_graph(&ps, k);
                let an = analyze_global(&graph, &ps, geo, &rec.grid_samples)?;
                rec.connected_by_k.insert(k, an.is_connected());
                rec.small_component_count_by_k
                    .insert(k, an.small_count() as u64);
                for c in an.components.iter().filter(|c| c.is_small) {
                    rec.small_component_details.push(SmallComponentDetail {
                        k,
                        bottom_most: ps.points[c.bottom_most_vertex],
                        diameter: c.diameter,
                        size: c.size,
                    });
                }
                rec.bad_event_flags_by_k.insert(k, an.flags);
                rec.longest_edge_by_k.insert(k, an.longest_edge);
                rec.local_y_by_k
                    .insert(k, an.probes.iter().map(|p| p.y).collect());
            }
        }
        TrialContext::Local(constants) => {
            let ps = PointSet {
                points: sample_poisson_with(&mut rng, constants.u_n(), 1.0)?,
                region: constants.u_n(),
                seed,
                intensity: 1.0,
            };
            rec.point_count = ps.len();
            let mut outcomes = BTreeMap::new();
            for &k in &config.k_sweep {
                let graph = build_knn_graph(&ps, k);
                let outcome = outcome_from_graph(&graph, &ps, constants);
                rec.connected_by_k.insert(k, is_connected(&graph));
                rec.small_component_count_by_k
                    .insert(k, outcome.components_in_half_box as u64);
                let longest = crate::model::longest_edge_length(&graph, &ps)?;
                rec.longest_edge_by_k.insert(k, longest);
                outcomes.insert(k, outcome);
            }
            rec.local_outcome = Some(outcomes);
        }
    }
    rec.longest_edge = rec
        .longest_edge_by_k
        .values()
        .next()
        .copied()
        .unwrap_or(0.0);
    if !rec.coupling_holds() {
        return Err(LabError::Invariant(format!(
            "trial {trial_id} (seed {seed}): connectivity decreases in k: {:?}",
            rec.connected_by_k
        )));
    }
    if config.record_timing {
        rec.runtime_ms = start.elapsed().as_millis() as u64;
    }
    Ok(rec)
}

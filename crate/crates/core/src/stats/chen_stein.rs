//! Chen–Stein neighbourhood terms for the local counting field and the
//! comparison of `μ = |Γ|p` with `ν = -log P(connected)`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::distribution::CountDistribution;
use super::gamma::{dependency_radius, DependencySizes};
use super::poisson::poisson_ln_pmf_real;
use super::tv::{tv_poisson_poisson, tv_to_poisson};
use super::wilson::Proportion;
use crate::error::{invalid, LabError, Result};
use crate::graph::{CountingGeometry, GridPoint};
use crate::rng::{hash_words, rng_from_seed};

/// Default number of co-sampled dependent pairs kept for the b2 estimate.
pub const DEFAULT_JOINT_SAMPLE_PAIRS: usize = 4096;

/// One trial seen through the local counting function.
#[derive(Clone, Copy, Debug)]
pub struct TrialObservation<'a> {
    pub seed: u64,
    pub connected: bool,
    pub small_count: u64,
    /// Sampled grid points of Γ and `Y(x)` at each.
    pub cells: &'a [GridPoint],
    pub ys: &'a [bool],
}

/// Mergeable state behind a [`ChenSteinReport`].
///
/// Dependent pairs `(x, y)` with `y ∈ Γ_x ∖ {x}` that were sampled in the
/// same trial are ranked by a hash of `(seed, x, y)`; the lowest
/// `pair_capacity` hashes form the joint-frequency sample. The selection
/// depends only on the set of observations, so merging in any order gives
/// the same sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChenSteinAccumulator {
    pub radius: i64,
    pub pair_capacity: usize,
    pub trials: u64,
    pub connected: u64,
    pub small_hist: BTreeMap<u64, u64>,
    pub cell_samples: u64,
    pub cell_ones: u64,
    pub pairs_seen: u64,
    sketch: BTreeSet<(u64, bool)>,
}

impl ChenSteinAccumulator {
    pub fn new(geometry: &CountingGeometry, pair_capacity: usize) -> Self {
        Self::with_radius(dependency_radius(geometry), pair_capacity)
    }

    /// `radius = 0` makes every cell its own neighbourhood.
    pub fn with_radius(radius: i64, pair_capacity: usize) -> Self {
        Self {
            radius,
            pair_capacity,
            trials: 0,
            connected: 0,
            small_hist: BTreeMap::new(),
            cell_samples: 0,
            cell_ones: 0,
            pairs_seen: 0,
            sketch: BTreeSet::new(),
        }
    }

    pub fn observe(&mut self, obs: TrialObservation<'_>) -> Result<()> {
        if obs.cells.len() != obs.ys.len() {
            return invalid("cells and Y values differ in length");
        }
        self.trials += 1;
        self.connected += u64::from(obs.connected);
        *self.small_hist.entry(obs.small_count).or_insert(0) += 1;
        self.cell_samples += obs.cells.len() as u64;
        self.cell_ones += obs.ys.iter().filter(|&&y| y).count() as u64;
        for i in 0..obs.cells.len() {
            for j in i + 1..obs.cells.len() {
                let (x, y) = (obs.cells[i], obs.cells[j]);
                if x == y || (x.gx - y.gx).abs() > self.radius || (x.gy - y.gy).abs() > self.radius
                {
                    continue;
                }
                self.pairs_seen += 1;
                let (a, b) = if x <= y { (x, y) } else { (y, x) };
                let h = hash_words(&[obs.seed, a.gx as u64, a.gy as u64, b.gx as u64, b.gy as u64]);
                self.offer((h, obs.ys[i] && obs.ys[j]));
            }
        }
        Ok(())
    }

    fn offer(&mut self, item: (u64, bool)) {
        if self.sketch.len() < self.pair_capacity {
            self.sketch.insert(item);
        } else if let Some(&last) = self.sketch.last() {
            if item < last {
                self.sketch.insert(item);
                self.sketch.pop_last();
            }
        }
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.radius != other.radius || self.pair_capacity != other.pair_capacity {
            return invalid("merging Chen–Stein states built for different geometries");
        }
        self.trials += other.trials;
        self.connected += other.connected;
        for (&k, &v) in &other.small_hist {
            *self.small_hist.entry(k).or_insert(0) += v;
        }
        self.cell_samples += other.cell_samples;
        self.cell_ones += other.cell_ones;
        self.pairs_seen += other.pairs_seen;
        for &item in &other.sketch {
            self.offer(item);
        }
        Ok(())
    }

    pub fn joint(&self) -> Proportion {
        let both = self.sketch.iter().filter(|(_, b)| *b).count() as u64;
        Proportion::new(both, self.sketch.len() as u64)
    }

    pub fn finalize(&self, deps: DependencySizes) -> Result<ChenSteinReport> {
        if self.trials == 0 {
            return invalid("no trials to estimate from");
        }
        let g = deps.gamma_size as f64;
        let sum_gx = deps.sum_gamma_x as f64;
        let off = deps.off_diagonal() as f64;
        let p = Proportion::new(self.cell_ones, self.cell_samples);
        let joint = self.joint();
        let conn = Proportion::new(self.connected, self.trials);
        let b1_of = |p: f64| sum_gx * p * p;
        let b2_of = |q: f64| off * q;
        let nu = (self.connected > 0).then(|| -conn.estimate.ln());
        let nu_half = (conn.ci_lo > 0.0).then(|| 0.5 * (conn.ci_lo.ln() - conn.ci_hi.ln()).abs());
        let mu = g * p.estimate;
        let law = CountDistribution::from_histogram(&self.small_hist);
        let (tv_x, tv_mu_nu) = match nu {
            Some(nu) => (
                Some(tv_to_poisson(&law, nu)?),
                Some(tv_poisson_poisson(mu, nu)?),
            ),
            None => (None, None),
        };
        Ok(ChenSteinReport {
            trials: self.trials,
            p_hat: p.estimate,
            p_prime: nu.map(|nu| if g > 0.0 { nu / g } else { 0.0 }),
            mu,
            nu,
            nu_defined: nu.is_some(),
            b1: b1_of(p.estimate),
            b2: b2_of(joint.estimate),
            joint_hat: joint.estimate,
            joint_pairs: joint.trials,
            pairs_seen: self.pairs_seen,
            gamma_x_size: deps.max_gamma_x,
            gamma_size: deps.gamma_size,
            sum_gamma_x: deps.sum_gamma_x,
            p_connected: conn.estimate,
            tv_x_vs_po_nu: tv_x,
            tv_po_mu_vs_po_nu: tv_mu_nu,
            small_count_law: law,
            confidence: ChenSteinConfidence {
                p_hat: p.half_width(),
                p_connected: conn.half_width(),
                joint: joint.half_width(),
                mu: g * p.half_width(),
                nu: nu_half,
                b1: 0.5 * (b1_of(p.ci_hi) - b1_of(p.ci_lo)),
                b2: 0.5 * (b2_of(joint.ci_hi) - b2_of(joint.ci_lo)),
            },
        })
    }
}

/// 95% half-widths of the estimated quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChenSteinConfidence {
    pub p_hat: f64,
    pub p_connected: f64,
    pub joint: f64,
    pub mu: f64,
    /// Undefined when the lower confidence limit of `P(connected)` is 0.
    pub nu: Option<f64>,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChenSteinReport {
    pub trials: u64,
    pub p_hat: f64,
    pub p_prime: Option<f64>,
    pub mu: f64,
    /// `None` when no trial was connected.
    pub nu: Option<f64>,
    pub nu_defined: bool,
    pub b1: f64,
    pub b2: f64,
    pub joint_hat: f64,
    pub joint_pairs: u64,
    pub pairs_seen: u64,
    pub gamma_x_size: u64,
    pub gamma_size: u64,
    pub sum_gamma_x: u64,
    pub p_connected: f64,
    #[serde(rename = "tv_X_vs_Po_nu")]
    pub tv_x_vs_po_nu: Option<f64>,
    #[serde(rename = "tv_Po_mu_vs_Po_nu")]
    pub tv_po_mu_vs_po_nu: Option<f64>,
    pub small_count_law: CountDistribution,
    pub confidence: ChenSteinConfidence,
}

pub fn estimate_chen_stein<'a>(
    trials: impl IntoIterator<Item = TrialObservation<'a>>,
    geometry: &CountingGeometry,
    joint_sample_pairs: usize,
) -> Result<ChenSteinReport> {
    let mut acc = ChenSteinAccumulator::new(geometry, joint_sample_pairs);
    for t in trials {
        acc.observe(t)?;
    }
    acc.finalize(DependencySizes::from_geometry(geometry))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub mu: f64,
    pub nu: f64,
    pub abs_diff: f64,
    pub tv: f64,
    /// `1 - e^{-|μ - ν|}`.
    pub split_bound: f64,
    pub bound_holds: bool,
}

pub fn reconcile(mu: f64, nu: f64) -> Result<Reconciliation> {
    let tv = tv_poisson_poisson(mu, nu)?;
    let abs_diff = (mu - nu).abs();
    let split_bound = -(-abs_diff).exp_m1();
    Ok(Reconciliation {
        mu,
        nu,
        abs_diff,
        tv,
        split_bound,
        bound_holds: tv <= split_bound + 1e-12,
    })
}

pub fn reconcile_mu_nu(report: &ChenSteinReport) -> Result<Reconciliation> {
    match report.nu {
        Some(nu) => reconcile(report.mu, nu),
        None => Err(LabError::InvalidArgument(
            "ν is undefined: no connected trials".into(),
        )),
    }
}

/// Outcome of one synthetic check of the Arratia–Goldstein–Gordon bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggCheck {
    pub p: f64,
    pub gamma_size: u64,
    pub runs: u64,
    pub p_hat: f64,
    pub mu: f64,
    pub tv: f64,
    pub b1: f64,
    pub b2: f64,
    /// Half-width of the Monte Carlo error in the measured TV.
    pub ci_width: f64,
    pub holds: bool,
}

/// Draws `runs` fields of i.i.d. Bernoulli(p) cells over `|Γ| = gamma_size`
/// and compares the law of `ΣY` with `Po_μ`, `μ = |Γ| p̂`. Ones are placed by
/// geometric gaps, so sparse fields cost O(number of ones).
pub fn synthetic_agg_check(p: f64, gamma_size: u64, runs: u64, seed: u64) -> Result<AggCheck> {
    if !(p > 0.0 && p < 1.0) || gamma_size == 0 || runs == 0 {
        return invalid("need 0 < p < 1, |Γ| >= 1 and runs >= 1");
    }
    let mut rng = rng_from_seed(seed);
    let gap = Geometric::new(p).map_err(|e| LabError::InvalidArgument(e.to_string()))?;
    let mut hist = BTreeMap::new();
    let mut ones = 0u64;
    for _ in 0..runs {
        let mut count = 0u64;
        let mut pos = gap.sample(&mut rng);
        while pos < gamma_size {
            count += 1;
            pos = pos.saturating_add(1).saturating_add(gap.sample(&mut rng));
        }
        ones += count;
        *hist.entry(count).or_insert(0u64) += 1;
    }
    let deps = DependencySizes::independent(gamma_size);
    let p_hat = ones as f64 / (runs as f64 * gamma_size as f64);
    let mu = gamma_size as f64 * p_hat;
    let law = CountDistribution::from_histogram(&hist);
    let tv = tv_to_poisson(&law, mu)?;
    let b1 = deps.sum_gamma_x as f64 * p_hat * p_hat;
    let b2 = 0.0;
    let ci_width = tv_noise_half_width(&hist, runs, mu);
    Ok(AggCheck {
        p,
        gamma_size,
        runs,
        p_hat,
        mu,
        tv,
        b1,
        b2,
        ci_width,
        holds: tv <= b1 + b2 + 3.0 * ci_width,
    })
}

/// `½ Σ_j` of 95% Wilson half-widths over the observed values and every
/// value carrying Poisson mass at least `1/runs`.
pub fn tv_noise_half_width(hist: &BTreeMap<u64, u64>, runs: u64, mean: f64) -> f64 {
    let mut support: BTreeSet<u64> = hist.keys().copied().collect();
    let floor = (1.0 / runs as f64).ln();
    let centre = mean.floor() as u64;
    for dir in [-1i64, 1] {
        let mut j = centre as i64;
        while j >= 0 && poisson_ln_pmf_real(j as f64, mean) >= floor {
            support.insert(j as u64);
            j += dir;
        }
    }
    0.5 * support
        .iter()
        .map(|j| Proportion::new(hist.get(j).copied().unwrap_or(0), runs).half_width())
        .sum::<f64>()
}

/// Synthetic observations with i.i.d. Bernoulli(p) cells, for testing
/// the estimators against known answers.
pub fn synthetic_observations(
    geometry: &CountingGeometry,
    p: f64,
    trials: usize,
    cells_per_trial: usize,
    seed: u64,
) -> Vec<(u64, Vec<GridPoint>, Vec<bool>)> {
    let mut rng = rng_from_seed(seed);
    let len = geometry.gamma_len();
    (0..trials)
        .map(|t| {
            let idx = rand::seq::index::sample(&mut rng, len, cells_per_trial.min(len));
            let cells: Vec<GridPoint> = idx.iter().map(|i| geometry.gamma_point(i)).collect();
            let ys = cells.iter().map(|_| rng.random_bool(p)).collect();
            (t as u64, cells, ys)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn geo() -> CountingGeometry {
        CountingGeometry::new(10_000.0, E * E).unwrap()
    }

    fn observe_all(
        acc: &mut ChenSteinAccumulator,
        data: &[(u64, Vec<GridPoint>, Vec<bool>)],
        conn: bool,
    ) {
        for (seed, cells, ys) in data {
            let small = ys.iter().filter(|&&y| y).count() as u64;
            acc.observe(TrialObservation {
                seed: *seed,
                connected: conn && small == 0,
                small_count: small,
                cells,
                ys,
            })
            .unwrap();
        }
    }

    #[test]
    fn all_connected_no_small_components() {
        let g = geo();
        let cells: Vec<GridPoint> = g.gamma_points().take(10).collect();
        let ys = vec![false; 10];
        let obs: Vec<_> = (0..50)
            .map(|s| TrialObservation {
                seed: s,
                connected: true,
                small_count: 0,
                cells: &cells,
                ys: &ys,
            })
            .collect();
        let r = estimate_chen_stein(obs, &g, 256).unwrap();
        assert_eq!(r.p_hat, 0.0);
        assert_eq!(r.b1, 0.0);
        assert_eq!(r.b2, 0.0);
        assert_eq!(r.nu, Some(0.0));
        assert_eq!(r.tv_x_vs_po_nu, Some(0.0));
        assert_eq!(r.mu, r.gamma_size as f64 * r.p_hat);
    }

    #[test]
    fn single_cell_half() {
        let mut acc = ChenSteinAccumulator::with_radius(0, 16);
        let x = [GridPoint::new(0, 0)];
        for s in 0..10 {
            let y = [s % 2 == 0];
            acc.observe(TrialObservation {
                seed: s,
                connected: true,
                small_count: 0,
                cells: &x,
                ys: &y,
            })
            .unwrap();
        }
        let r = acc.finalize(DependencySizes::independent(1)).unwrap();
        assert_eq!(r.p_hat, 0.5);
        assert_eq!(r.b1, 0.25);
        assert_eq!(r.b2, 0.0);
    }

    #[test]
    fn never_connected_leaves_nu_undefined() {
        let g = geo();
        let cells = [g.gamma_point(0)];
        let ys = [true];
        let r = estimate_chen_stein(
            [TrialObservation {
                seed: 1,
                connected: false,
                small_count: 1,
                cells: &cells,
                ys: &ys,
            }],
            &g,
            8,
        )
        .unwrap();
        assert!(!r.nu_defined);
        assert!(r.nu.is_none() && r.p_prime.is_none());
        assert!(reconcile_mu_nu(&r).is_err());
        assert!(estimate_chen_stein([], &g, 8).is_err());
    }

    #[test]
    fn synthetic_bernoulli_matches_plug_in() {
        let g = geo();
        let p = 0.05;
        let data = synthetic_observations(&g, p, 4000, 64, 7);
        let mut acc = ChenSteinAccumulator::new(&g, DEFAULT_JOINT_SAMPLE_PAIRS);
        observe_all(&mut acc, &data, true);
        let r = acc.finalize(DependencySizes::from_geometry(&g)).unwrap();
        // every point of this Γ depends on every other
        let gamma = g.gamma_len() as f64;
        assert_eq!(r.gamma_x_size as f64, gamma);
        let b1 = gamma * gamma * p * p;
        let b2 = gamma * (gamma - 1.0) * p * p;
        assert!(
            (r.b1 - b1).abs() <= 2.0 * r.confidence.b1,
            "{} vs {b1}",
            r.b1
        );
        assert!(
            (r.b2 - b2).abs() <= 2.0 * r.confidence.b2,
            "{} vs {b2}",
            r.b2
        );
        assert_eq!(r.joint_pairs as usize, DEFAULT_JOINT_SAMPLE_PAIRS);
        assert_eq!(r.mu, gamma * r.p_hat);
    }

    #[test]
    fn reconcile_examples() {
        let r = reconcile(1.0, 1.1).unwrap();
        assert!(r.bound_holds);
        assert!((r.split_bound - (1.0 - (-0.1f64).exp())).abs() < 1e-15);
        assert!(r.tv > 0.0 && r.tv < 0.0952);
        assert_eq!(reconcile(2.0, 2.0).unwrap().tv, 0.0);
        assert_eq!(reconcile(0.0, 0.0).unwrap().tv, 0.0);
    }

    #[test]
    fn agg_check_small_config() {
        let c = synthetic_agg_check(0.01, 1000, 2000, 3).unwrap();
        assert!(c.holds, "{c:?}");
        assert!((c.p_hat - 0.01).abs() < 0.001);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn merge_is_order_independent(seed in any::<u64>(), split in 1usize..199) {
            let g = geo();
            let data = synthetic_observations(&g, 0.1, 200, 12, seed);
            let mut whole = ChenSteinAccumulator::new(&g, 64);
            observe_all(&mut whole, &data, true);
            let mut left = ChenSteinAccumulator::new(&g, 64);
            observe_all(&mut left, &data[..split], true);
            let mut right = ChenSteinAccumulator::new(&g, 64);
            observe_all(&mut right, &data[split..], true);
            let mut lr = left.clone();
            lr.merge(&right).unwrap();
            let mut rl = right.clone();
            rl.merge(&left).unwrap();
            prop_assert_eq!(&lr, &whole);
            prop_assert_eq!(&rl, &whole);
        }
    }
}

//! Cell-level and pairwise comparison of the local counting field with
//! i.i.d. Poisson(p′) cells, `p′ = ν/|Γ|`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::distribution::CountDistribution;
use super::gamma::dependency_radius;
use super::tv::tv_to_poisson;
use super::wilson::{wilson_interval, Proportion, Z95};
use crate::error::{invalid, Result};
use crate::graph::{CountingGeometry, GridPoint};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairKind {
    /// Windows disjoint: `‖x − y‖ > 4√2 λ√(log n)`.
    Separated,
    /// `y ∈ Γ_x ∖ {x}`.
    Close,
}

/// 2×2 table of `(Y(x), Y(y))` over trials where both cells were sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTable {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl PairTable {
    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    fn add(&mut self, other: &Self) {
        self.n11 += other.n11;
        self.n10 += other.n10;
        self.n01 += other.n01;
        self.n00 += other.n00;
    }

    /// Phi coefficient, undefined when a margin is empty.
    pub fn correlation(&self) -> Option<f64> {
        let [a, b, c, d] = [self.n11, self.n10, self.n01, self.n00].map(|v| v as f64);
        let den = ((a + b) * (c + d) * (a + c) * (b + d)).sqrt();
        (den > 0.0).then(|| (a * d - b * c) / den)
    }

    /// Fisher-z 95% interval for the correlation.
    pub fn correlation_ci(&self) -> Option<(f64, f64)> {
        let r = self.correlation()?;
        let n = self.total() as f64;
        if n <= 3.0 {
            return None;
        }
        let z = r.clamp(-1.0 + 1e-12, 1.0 - 1e-12).atanh();
        let h = Z95 / (n - 3.0).sqrt();
        Some(((z - h).tanh(), (z + h).tanh()))
    }
}

/// Mergeable state for [`ProcessReport`]. The designated cells and pairs are
/// a deterministic function of the geometry and the selection seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessAccumulator {
    pub cells: BTreeMap<GridPoint, (u64, u64)>,
    pub pairs: BTreeMap<(PairKind, GridPoint, GridPoint), PairTable>,
}

impl ProcessAccumulator {
    pub fn new(
        geometry: &CountingGeometry,
        selection_seed: u64,
        cell_count: usize,
        pair_count: usize,
    ) -> Self {
        let mut rng = rng_from_seed(selection_seed);
        let len = geometry.gamma_len();
        let mut cells = BTreeMap::new();
        let mut pairs = BTreeMap::new();
        if len == 0 {
            return Self { cells, pairs };
        }
        for i in rand::seq::index::sample(&mut rng, len, cell_count.min(len)) {
            cells.insert(geometry.gamma_point(i), (0, 0));
        }
        let reach = 4.0 * 2f64.sqrt() * geometry.small_threshold();
        let r = dependency_radius(geometry);
        let mut separated = 0;
        let mut close = 0;
        for _ in 0..pair_count.saturating_mul(200) {
            if separated >= pair_count && close >= pair_count {
                break;
            }
            let x = geometry.gamma_point(rng.random_range(0..len));
            if separated < pair_count {
                let y = geometry.gamma_point(rng.random_range(0..len));
                if x.as_point().dist(y.as_point()) > reach {
                    let (a, b) = if x < y { (x, y) } else { (y, x) };
                    if pairs
                        .insert((PairKind::Separated, a, b), PairTable::default())
                        .is_none()
                    {
                        separated += 1;
                    }
                }
            }
            if close < pair_count {
                let y = GridPoint::new(
                    x.gx + rng.random_range(-r..=r),
                    x.gy + rng.random_range(-r..=r),
                );
                if y != x && geometry.in_gamma(y) {
                    let (a, b) = if x < y { (x, y) } else { (y, x) };
                    if pairs
                        .insert((PairKind::Close, a, b), PairTable::default())
                        .is_none()
                    {
                        close += 1;
                    }
                }
            }
        }
        Self { cells, pairs }
    }

    pub fn observe(&mut self, cells: &[GridPoint], ys: &[bool]) -> Result<()> {
        if cells.len() != ys.len() {
            return invalid("cells and Y values differ in length");
        }
        let seen: BTreeMap<GridPoint, bool> =
            cells.iter().copied().zip(ys.iter().copied()).collect();
        for (x, (samples, ones)) in self.cells.iter_mut() {
            if let Some(&y) = seen.get(x) {
                *samples += 1;
                *ones += u64::from(y);
            }
        }
        for ((_, a, b), t) in self.pairs.iter_mut() {
            if let (Some(&ya), Some(&yb)) = (seen.get(a), seen.get(b)) {
                match (ya, yb) {
                    (true, true) => t.n11 += 1,
                    (true, false) => t.n10 += 1,
                    (false, true) => t.n01 += 1,
                    (false, false) => t.n00 += 1,
                }
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        let same_cells = self.cells.keys().eq(other.cells.keys());
        let same_pairs = self.pairs.keys().eq(other.pairs.keys());
        if !same_cells || !same_pairs {
            return invalid("merging process states with different designated cells");
        }
        for (x, (s, o)) in self.cells.iter_mut() {
            let (s2, o2) = other.cells[x];
            *s += s2;
            *o += o2;
        }
        for (key, t) in self.pairs.iter_mut() {
            t.add(&other.pairs[key]);
        }
        Ok(())
    }

    pub fn finalize(&self, nu: Option<f64>, gamma_size: u64) -> Result<ProcessReport> {
        let Some(nu) = nu else {
            return invalid("ν is undefined: no connected trials");
        };
        if gamma_size == 0 {
            return invalid("Γ is empty");
        }
        let p_prime = nu / gamma_size as f64;
        let mut cells = Vec::new();
        for (&x, &(samples, ones)) in &self.cells {
            let tv = if samples == 0 {
                None
            } else {
                let law = CountDistribution::from_histogram(&BTreeMap::from([
                    (0, samples - ones),
                    (1, ones),
                ]));
                Some(tv_to_poisson(&law, p_prime)?)
            };
            cells.push(CellLaw {
                x,
                samples,
                ones,
                tv_vs_poisson: tv,
            });
        }
        let mut pairs = Vec::new();
        for (&(kind, x, y), t) in &self.pairs {
            let n = t.total();
            let joint = Proportion::new(t.n11, n);
            let px = if n == 0 {
                0.0
            } else {
                (t.n11 + t.n10) as f64 / n as f64
            };
            let py = if n == 0 {
                0.0
            } else {
                (t.n11 + t.n01) as f64 / n as f64
            };
            pairs.push(PairStat {
                kind,
                x,
                y,
                table: *t,
                correlation: t.correlation(),
                correlation_ci: t.correlation_ci(),
                joint_frequency: joint.estimate,
                joint_ci: wilson_interval(t.n11, n, Z95),
                independent_product: px * py,
            });
        }
        Ok(ProcessReport {
            p_prime,
            cells,
            pairs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellLaw {
    pub x: GridPoint,
    pub samples: u64,
    pub ones: u64,
    pub tv_vs_poisson: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub kind: PairKind,
    pub x: GridPoint,
    pub y: GridPoint,
    pub table: PairTable,
    pub correlation: Option<f64>,
    pub correlation_ci: Option<(f64, f64)>,
    pub joint_frequency: f64,
    pub joint_ci: (f64, f64),
    pub independent_product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub p_prime: f64,
    pub cells: Vec<CellLaw>,
    pub pairs: Vec<PairStat>,
}

impl ProcessReport {
    pub fn pairs_of(&self, kind: PairKind) -> impl Iterator<Item = &PairStat> {
        self.pairs.iter().filter(move |p| p.kind == kind)
    }

    pub fn max_cell_tv(&self) -> Option<f64> {
        self.cells
            .iter()
            .filter_map(|c| c.tv_vs_poisson)
            .reduce(f64::max)
    }
}

/// Convenience wrapper over an iterator of `(cells, ys)` per trial.
pub fn process_marginal_comparison<'a>(
    trials: impl IntoIterator<Item = (&'a [GridPoint], &'a [bool])>,
    geometry: &CountingGeometry,
    nu: Option<f64>,
    selection_seed: u64,
    cell_count: usize,
    pair_count: usize,
) -> Result<ProcessReport> {
    let mut acc = ProcessAccumulator::new(geometry, selection_seed, cell_count, pair_count);
    for (cells, ys) in trials {
        acc.observe(cells, ys)?;
    }
    acc.finalize(nu, geometry.gamma_len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chen_stein::synthetic_observations;

    fn geo() -> CountingGeometry {
        // Γ wide enough for separated pairs to exist
        CountingGeometry::new(2500.0, 0.6).unwrap()
    }

    #[test]
    fn no_small_components_gives_point_mass_law() {
        let g = geo();
        let all: Vec<GridPoint> = g.gamma_points().collect();
        let ys = vec![false; all.len()];
        let nu = 0.4;
        let rep = process_marginal_comparison(
            (0..20).map(|_| (all.as_slice(), ys.as_slice())),
            &g,
            Some(nu),
            1,
            16,
            4,
        )
        .unwrap();
        let p = nu / g.gamma_len() as f64;
        for c in &rep.cells {
            assert_eq!(c.ones, 0);
            assert!((c.tv_vs_poisson.unwrap() - (1.0 - (-p).exp())).abs() < 1e-15);
        }
        assert!(process_marginal_comparison(std::iter::empty(), &g, None, 1, 4, 4).is_err());
    }

    #[test]
    fn bernoulli_cells_near_bernoulli_poisson_distance() {
        let g = geo();
        let p = 0.02;
        let all: Vec<GridPoint> = g.gamma_points().collect();
        let data = synthetic_observations(&g, p, 20_000, all.len(), 11);
        let nu = p * g.gamma_len() as f64;
        let rep = process_marginal_comparison(
            data.iter().map(|(_, c, y)| (c.as_slice(), y.as_slice())),
            &g,
            Some(nu),
            2,
            8,
            8,
        )
        .unwrap();
        // oracle: TV(Bernoulli(p), Po(p)) by direct summation
        let po = |j: u32| (-p).exp() * p.powi(j as i32) / (1..=j).map(f64::from).product::<f64>();
        let oracle =
            0.5 * ((1.0 - p - po(0)).abs() + (p - po(1)).abs() + (2..30).map(po).sum::<f64>());
        assert!((oracle - (p - p * (-p).exp())).abs() < p * p);
        for c in &rep.cells {
            let tv = c.tv_vs_poisson.unwrap();
            // sampling error on the frequency dominates
            assert!((tv - oracle).abs() < 0.01, "{tv} vs {oracle}");
        }
        let separated: Vec<_> = rep.pairs_of(PairKind::Separated).collect();
        assert!(!separated.is_empty());
        let covering = separated
            .iter()
            .filter(|s| {
                s.correlation_ci
                    .map_or(false, |(lo, hi)| lo <= 0.0 && 0.0 <= hi)
            })
            .count();
        assert!(
            covering * 10 >= separated.len() * 8,
            "{covering} of {}",
            separated.len()
        );
        assert!(rep.pairs_of(PairKind::Close).count() > 0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let g = geo();
        let data = synthetic_observations(&g, 0.2, 300, 40, 5);
        let mut whole = ProcessAccumulator::new(&g, 9, 10, 5);
        let mut a = whole.clone();
        let mut b = whole.clone();
        for (i, (_, c, y)) in data.iter().enumerate() {
            whole.observe(c, y).unwrap();
            if i % 3 == 0 {
                a.observe(c, y).unwrap()
            } else {
                b.observe(c, y).unwrap()
            }
        }
        b.merge(&a).unwrap();
        assert_eq!(b, whole);
    }
}

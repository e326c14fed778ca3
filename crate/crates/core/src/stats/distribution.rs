use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::poisson::{poisson_ln_pmf_real, support_end};
use crate::error::{invalid, Result};

/// Law of a nonnegative integer random variable with finite support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub masses: BTreeMap<u64, f64>,
    pub total_mass: f64,
}

impl CountDistribution {
    pub fn from_masses(masses: BTreeMap<u64, f64>) -> Result<Self> {
        if masses.values().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return invalid("masses must be finite and nonnegative");
        }
        let total_mass = masses.values().sum();
        Ok(Self { masses, total_mass })
    }

    /// Empirical law of a histogram `value -> count`.
    pub fn from_histogram(hist: &BTreeMap<u64, u64>) -> Self {
        let total: u64 = hist.values().sum();
        if total == 0 {
            return Self::default();
        }
        let masses = hist
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&v, &c)| (v, c as f64 / total as f64))
            .collect();
        Self {
            masses,
            total_mass: 1.0,
        }
    }

    pub fn from_samples(samples: impl IntoIterator<Item = u64>) -> Self {
        let mut hist = BTreeMap::new();
        for s in samples {
            *hist.entry(s).or_insert(0) += 1;
        }
        Self::from_histogram(&hist)
    }

    pub fn point_mass(j: u64) -> Self {
        Self {
            masses: BTreeMap::from([(j, 1.0)]),
            total_mass: 1.0,
        }
    }

    /// Poisson law truncated where the tail falls below 1e-15.
    pub fn poisson(mean: f64) -> Result<Self> {
        if !(mean >= 0.0) || !mean.is_finite() {
            return invalid(format!("poisson mean must be finite and >= 0, got {mean}"));
        }
        let masses: BTreeMap<u64, f64> = (0..support_end(mean))
            .map(|j| (j, poisson_ln_pmf_real(j as f64, mean).exp()))
            .filter(|(_, m)| *m > 0.0)
            .collect();
        Self::from_masses(masses)
    }

    pub fn mass(&self, j: u64) -> f64 {
        self.masses.get(&j).copied().unwrap_or(0.0)
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass - 1.0).abs() <= 1e-12
    }

    pub fn mean(&self) -> f64 {
        self.masses.iter().map(|(&j, &m)| j as f64 * m).sum()
    }
}

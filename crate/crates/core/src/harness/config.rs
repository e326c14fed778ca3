use std::f64::consts::E;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::CountingGeometry;
use crate::local::{
    compute_constants, default_scaled_constants, scaled_constants, ConstantsBundle,
};
use crate::stats::DEFAULT_JOINT_SAMPLE_PAIRS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Poisson process on the square of area `n`.
    Global,
    /// Poisson process on the local box `U_n`.
    Local,
}

/// Desk-scale replacements for the local constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledOverrides {
    pub m: f64,
    pub n_tiles: u64,
    pub lambda2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: f64,
    /// Values of k evaluated on every pointset, in increasing order.
    pub k_sweep: Vec<usize>,
    pub trial_count: u64,
    pub base_seed: u64,
    pub lambda: f64,
    pub mode: Mode,
    pub scaled_constants: Option<ScaledOverrides>,
    /// Grid points of Γ at which `Y(x)` is evaluated per trial.
    pub grid_sample_count: usize,
    pub joint_sample_pairs: usize,
    /// Record wall-clock time per trial. Off by default so output files are
    /// reproducible byte for byte.
    pub record_timing: bool,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(n: f64, k_sweep: Vec<usize>, trial_count: u64, base_seed: u64) -> Self {
        Self {
            n,
            k_sweep,
            trial_count,
            base_seed,
            lambda: E * E,
            mode: Mode::Global,
            scaled_constants: None,
            grid_sample_count: 64,
            joint_sample_pairs: DEFAULT_JOINT_SAMPLE_PAIRS,
            record_timing: false,
            output_path: None,
        }
    }

    /// Checks the configuration; returns warnings for values that are
    /// legal but outside the regime the theory covers.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.trial_count < 1 {
            return invalid("trial_count must be at least 1");
        }
        if !(self.n > 1.0) || !self.n.is_finite() {
            return invalid(format!("n must exceed 1, got {}", self.n));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return invalid(format!("λ must be positive, got {}", self.lambda));
        }
        if self.k_sweep.is_empty() {
            return invalid("no values of k given");
        }
        if self.k_sweep.contains(&0) {
            return invalid("k must be at least 1");
        }
        if self.k_sweep.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("k values must be strictly increasing");
        }
        let mut warnings = Vec::new();
        let log_n = self.n.ln();
        for &k in &self.k_sweep {
            let k = k as f64;
            if k <= 0.3 * log_n || k >= 0.6 * log_n {
                warnings.push(format!(
                    "k = {k} lies outside the range (0.3 log n, 0.6 log n) = ({:.3}, {:.3})",
                    0.3 * log_n,
                    0.6 * log_n
                ));
            }
        }
        match self.mode {
            Mode::Global => {
                let geo = CountingGeometry::new(self.n, self.lambda)?;
                if geo.gamma_len() == 0 && self.grid_sample_count > 0 {
                    warnings.push("Γ is empty at this n; no grid samples will be taken".into());
                }
            }
            Mode::Local => {
                if self.scaled_constants.is_none() {
                    warnings.push(
                        "local mode uses scaled constants (M = 10, N = 100000, λ₂ = 1.5, λ₁ solved from the tile inequalities)"
                            .into(),
                    );
                }
                self.local_constants()?;
            }
        }
        Ok(warnings)
    }

    pub fn geometry(&self) -> Result<CountingGeometry> {
        CountingGeometry::new(self.n, self.lambda)
    }

    /// Constants for local mode: overrides if given, else the scaled defaults.
    pub fn local_constants(&self) -> Result<ConstantsBundle> {
        let lambda = self.lambda.max(E * E);
        match self.scaled_constants {
            Some(s) => scaled_constants(lambda, self.n, s.m, s.n_tiles, s.lambda2),
            None => default_scaled_constants(lambda, self.n),
        }
    }

    /// Full-size constants for reporting; local experiments never use them.
    pub fn full_constants(&self) -> Result<ConstantsBundle> {
        compute_constants(self.lambda, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warnings_and_errors() {
        let c = ExperimentConfig::new(1e4, vec![4], 10, 1);
        assert!(c.validate().unwrap().is_empty());
        let c = ExperimentConfig::new(1e4, vec![1, 4], 10, 1);
        assert_eq!(c.validate().unwrap().len(), 1);
        assert!(ExperimentConfig::new(1e4, vec![4], 0, 1)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(1.0, vec![4], 1, 1)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(1e4, vec![5, 4], 1, 1)
            .validate()
            .is_err());
        let mut local = ExperimentConfig::new(6f64.exp(), vec![2], 1, 1);
        local.mode = Mode::Local;
        assert!(local
            .validate()
            .unwrap()
            .iter()
            .any(|w| w.contains("scaled")));
    }
}

//! Total variation distance between integer laws (half the L1 distance).

use super::distribution::CountDistribution;
use super::poisson::{poisson_ln_pmf_real, support_end};
use crate::error::{invalid, Result};

pub fn total_variation(d1: &CountDistribution, d2: &CountDistribution) -> Result<f64> {
    if !d1.is_normalized() || !d2.is_normalized() {
        return invalid(format!(
            "total variation needs normalized laws (masses {} and {})",
            d1.total_mass, d2.total_mass
        ));
    }
    let keys = d1.masses.keys().chain(d2.masses.keys());
    let mut seen = std::collections::BTreeSet::new();
    let sum: f64 = keys
        .filter(|k| seen.insert(**k))
        .map(|&k| (d1.mass(k) - d2.mass(k)).abs())
        .sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// `TV(d, Po_mean)` with the Poisson mass outside the support of `d`
/// accounted for exactly as `1 - Σ_{j ∈ supp d} Po(j)`.
pub fn tv_to_poisson(d: &CountDistribution, mean: f64) -> Result<f64> {
    if !d.is_normalized() {
        return invalid(format!("law has total mass {}", d.total_mass));
    }
    if !(mean >= 0.0) || !mean.is_finite() {
        return invalid(format!("poisson mean must be finite and >= 0, got {mean}"));
    }
    let mut covered = 0.0;
    let mut diff = 0.0;
    for (&j, &m) in &d.masses {
        let p = poisson_ln_pmf_real(j as f64, mean).exp();
        covered += p;
        diff += (m - p).abs();
    }
    Ok((0.5 * (diff + (1.0 - covered).max(0.0))).clamp(0.0, 1.0))
}

/// Exact `TV(Po_mu, Po_nu)` by summation over the joint effective support.
pub fn tv_poisson_poisson(mu: f64, nu: f64) -> Result<f64> {
    for m in [mu, nu] {
        if !(m >= 0.0) || !m.is_finite() {
            return invalid(format!("poisson mean must be finite and >= 0, got {m}"));
        }
    }
    let end = support_end(mu.max(nu));
    let sum: f64 = (0..end)
        .map(|j| {
            let a = poisson_ln_pmf_real(j as f64, mu).exp();
            let b = poisson_ln_pmf_real(j as f64, nu).exp();
            (a - b).abs()
        })
        .sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

//! Poisson probabilities evaluated in log space.

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// Summation stops once a Chernoff bound on the remaining tail drops below this.
pub const TAIL_CUTOFF: f64 = 1e-15;

fn check_mean(mean: f64) -> Result<()> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return invalid(format!("poisson mean must be finite and >= 0, got {mean}"));
    }
    Ok(())
}

/// `ln P(Po(mean) = j)` for real `j >= 0` (the continuous extension through
/// the gamma function).
pub fn poisson_ln_pmf_real(j: f64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if j == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    j * mean.ln() - mean - ln_gamma(j + 1.0)
}

/// `P(Po(mean) = j)`.
pub fn poisson_pmf(j: u64, mean: f64) -> Result<f64> {
    check_mean(mean)?;
    Ok(poisson_ln_pmf_real(j as f64, mean).exp())
}

/// Chernoff bound on `P(Po(mean) >= j)` for `j > mean`.
pub fn upper_tail_bound(j: u64, mean: f64) -> f64 {
    let j = j as f64;
    if j <= mean {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    (-mean + j - j * (j / mean).ln()).exp()
}

/// First index past which the Poisson tail is below [`TAIL_CUTOFF`].
pub fn support_end(mean: f64) -> u64 {
    let mut j = mean.ceil() as u64 + 1;
    while upper_tail_bound(j, mean) >= TAIL_CUTOFF {
        j += (mean.sqrt() as u64).max(1);
    }
    j
}

/// `Po_mean(A)` for the set described by `member`.
pub fn poisson_set_mass(member: impl Fn(u64) -> bool, mean: f64) -> Result<f64> {
    check_mean(mean)?;
    let end = support_end(mean);
    Ok((0..end)
        .filter(|&j| member(j))
        .map(|j| poisson_ln_pmf_real(j as f64, mean).exp())
        .sum())
}

/// `ln Σ_{j in range} P(Po(mean) = j)` via log-sum-exp; exact summation used
/// as the oracle for the concentration bounds.
pub fn poisson_ln_range_mass(range: std::ops::Range<u64>, mean: f64) -> f64 {
    let logs: Vec<f64> = range.map(|j| poisson_ln_pmf_real(j as f64, mean)).collect();
    log_sum_exp(&logs)
}

/// `ln P(Po(mean) >= from)`, summed exactly until the terms are negligible.
pub fn poisson_ln_upper_tail(from: u64, mean: f64) -> f64 {
    let mut logs = Vec::new();
    let mut j = from;
    loop {
        let l = poisson_ln_pmf_real(j as f64, mean);
        logs.push(l);
        if j as f64 > mean && l < logs[0] - 50.0 {
            break;
        }
        j += 1;
    }
    log_sum_exp(&logs)
}

pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pmf_closed_forms() {
        assert_relative_eq!(
            poisson_pmf(0, 1.0).unwrap(),
            0.367_879_441_171_442_3,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            poisson_pmf(3, 2.0).unwrap(),
            (-2.0f64).exp() * 8.0 / 6.0,
            max_relative = 1e-13
        );
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_mean_rejected() {
        assert!(poisson_pmf(0, -0.5).is_err());
        assert!(poisson_set_mass(|_| true, f64::NAN).is_err());
    }

    #[test]
    fn normalization() {
        for mean in [0.0, 0.3, 7.0, 120.0] {
            let total = poisson_set_mass(|_| true, mean).unwrap();
            assert!((total - 1.0).abs() < 1e-12, "mean {mean}: {total}");
        }
    }

    #[test]
    fn complement_masses() {
        let even = poisson_set_mass(|j| j % 2 == 0, 3.7).unwrap();
        let odd = poisson_set_mass(|j| j % 2 == 1, 3.7).unwrap();
        assert!((even + odd - 1.0).abs() < 1e-12);
        // P(even) = (1 + e^{-2m}) / 2
        assert_relative_eq!(even, 0.5 * (1.0 + (-7.4f64).exp()), max_relative = 1e-12);
    }

    #[test]
    fn log_tails_match_direct_sums() {
        let direct: f64 = (0..4).map(|j| poisson_pmf(j, 5.0).unwrap()).sum();
        assert_relative_eq!(
            poisson_ln_range_mass(0..4, 5.0).exp(),
            direct,
            max_relative = 1e-12
        );
        let upper = 1.0 - direct;
        assert_relative_eq!(
            poisson_ln_upper_tail(4, 5.0).exp(),
            upper,
            max_relative = 1e-12
        );
    }
}

//! The two chains of Poisson tail bounds behind local point concentration,
//! evaluated in log space against exact tails.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::stats::poisson::{poisson_ln_range_mass, poisson_ln_upper_tail};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    /// Natural logs of the successive bounds, the exact tail first.
    pub ln_terms: Vec<f64>,
    /// Whether each term is at most (`false`) or strictly below (`true`) the
    /// next one.
    pub strict: Vec<bool>,
    pub holds: Vec<bool>,
}

impl BoundChain {
    fn new(ln_terms: Vec<f64>, strict: Vec<bool>) -> Self {
        let holds = ln_terms
            .windows(2)
            .zip(&strict)
            .map(|(w, &s)| if s { w[0] < w[1] } else { w[0] <= w[1] })
            .collect();
        Self {
            ln_terms,
            strict,
            holds,
        }
    }

    pub fn all(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: f64,
    /// Sparse quarter disc of area `e³ log n`: fewer than `0.6 log n` points.
    pub lower: BoundChain,
    /// Dense disc of area `e^{-49/3} log n`: at least `⌈0.3 log n⌉` points.
    pub upper: BoundChain,
}

impl ConcentrationReport {
    pub fn all(&self) -> bool {
        self.lower.all() && self.upper.all()
    }
}

/// Exact `P(Po(e³L) < 0.6L)` and its four successive bounds, ending at
/// `0.6 L n^{-4}`.
pub fn lower_chain(n: f64) -> BoundChain {
    let l = n.ln();
    let mean = E.powi(3) * l;
    let t = 0.6 * l;
    let exact = poisson_ln_range_mass(0..t.ceil() as u64, mean);
    let ln_t = t.ln();
    let b0 = ln_t - mean + t * mean.ln() - ln_gamma(t + 1.0);
    let b1 = ln_t - mean + t * (E * E.powi(3) / 0.6).ln();
    let b2 = ln_t - (E.powi(3) - 3.0) * l;
    let b3 = ln_t - 4.0 * l;
    BoundChain::new(vec![exact, b0, b1, b2, b3], vec![false, true, true, true])
}

/// Exact `P(Po(|D|) >= ⌈0.3L⌉)` with `|D| = e^{-49/3} L`, its four bounds,
/// and the final `n^{-3}`.
pub fn upper_chain(n: f64) -> BoundChain {
    let l = n.ln();
    let rate = (-49.0f64 / 3.0).exp();
    let area = rate * l;
    let m = (0.3 * l).ceil();
    let exact = poisson_ln_upper_tail(m as u64, area);
    let geom = -(1.0 - rate / 0.3).ln();
    let t = 0.3 * l;
    let b1 = t * area.ln() - ln_gamma(m + 1.0) - area + geom;
    let b2 = t * (area.ln() - (t / E).ln() - rate / 0.3) + geom;
    let b3 = t * (-49.0 / 3.0 + (E / 0.3).ln()) + geom;
    let b4 = -4.0 * l + geom;
    let target = -3.0 * l;
    BoundChain::new(
        vec![exact, b1, b2, b3, b4, target],
        vec![false, false, true, true, false],
    )
}

pub fn concentration_chains(n: f64) -> ConcentrationReport {
    ConcentrationReport {
        n,
        lower: lower_chain(n),
        upper: upper_chain(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains_hold_on_reference_grid() {
        for n in [1e3, 1e4, 1e6, 1e9] {
            let r = concentration_chains(n);
            assert!(r.all(), "{r:?}");
        }
    }

    #[test]
    fn exact_tails_are_finite_and_tiny() {
        let r = concentration_chains(1e6);
        assert!(r.lower.ln_terms[0] < -200.0);
        assert!(r.upper.ln_terms[0] < -50.0);
        assert!(r.upper.ln_terms[0].is_finite());
    }
}

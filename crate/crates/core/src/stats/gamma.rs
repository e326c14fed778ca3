//! Γ and the dependency neighbourhoods `Γ_x`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::graph::{CountingGeometry, GridPoint};

/// Largest integer offset at which two windows still meet: the closed
/// squares of side `4λ√(log n)` around `x` and `y` intersect iff both
/// coordinate offsets are at most `4λ√(log n)`.
pub fn dependency_radius(geometry: &CountingGeometry) -> i64 {
    (2.0 * geometry.window_half_side()).floor() as i64
}

pub fn dependent(geometry: &CountingGeometry, x: GridPoint, y: GridPoint) -> bool {
    let r = dependency_radius(geometry);
    (x.gx - y.gx).abs() <= r && (x.gy - y.gy).abs() <= r
}

fn axis_count(c: i64, lo: i64, hi: i64, r: i64) -> u64 {
    ((c + r).min(hi) - (c - r).max(lo) + 1).max(0) as u64
}

/// `|Γ_x|`, which factorizes over the two axes.
pub fn dependency_count(geometry: &CountingGeometry, x: GridPoint) -> u64 {
    let r = dependency_radius(geometry);
    let (lo, hi) = (geometry.gamma_lo, geometry.gamma_hi);
    axis_count(x.gx, lo, hi, r) * axis_count(x.gy, lo, hi, r)
}

/// Γ in row-major order with `|Γ_x|` for each point.
pub fn compute_gamma_and_dependencies(n: f64, lambda: f64) -> Result<(Vec<GridPoint>, Vec<u64>)> {
    let geometry = CountingGeometry::new(n, lambda)?;
    if geometry.gamma_len() == 0 {
        return Err(LabError::Size(format!(
            "Γ is empty at n = {n}, λ = {lambda}: the square is narrower than one window"
        )));
    }
    let gamma: Vec<GridPoint> = geometry.gamma_points().collect();
    let counts = gamma
        .iter()
        .map(|&x| dependency_count(&geometry, x))
        .collect();
    Ok((gamma, counts))
}

/// Sizes that enter b1 and b2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencySizes {
    pub gamma_size: u64,
    /// `Σ_x |Γ_x|`.
    pub sum_gamma_x: u64,
    /// `max_x |Γ_x|`, attained in the interior.
    pub max_gamma_x: u64,
}

impl DependencySizes {
    /// Closed form: the double sum is the square of an axis sum.
    pub fn from_geometry(geometry: &CountingGeometry) -> Self {
        let r = dependency_radius(geometry);
        let (lo, hi) = (geometry.gamma_lo, geometry.gamma_hi);
        let axis: u64 = (lo..=hi).map(|c| axis_count(c, lo, hi, r)).sum();
        let axis_max = (lo..=hi)
            .map(|c| axis_count(c, lo, hi, r))
            .max()
            .unwrap_or(0);
        Self {
            gamma_size: geometry.gamma_len() as u64,
            sum_gamma_x: axis * axis,
            max_gamma_x: axis_max * axis_max,
        }
    }

    /// Independent cells: `Γ_x = {x}`.
    pub fn independent(gamma_size: u64) -> Self {
        Self {
            gamma_size,
            sum_gamma_x: gamma_size,
            max_gamma_x: u64::from(gamma_size > 0),
        }
    }

    /// `Σ_x |Γ_x ∖ {x}|`.
    pub fn off_diagonal(&self) -> u64 {
        self.sum_gamma_x - self.gamma_size
    }
}

/// `|Γ_x| < 256 λ² log n` for every x.
pub fn interior_bound_holds(geometry: &CountingGeometry) -> bool {
    let bound = 256.0 * geometry.lambda.powi(2) * geometry.sqrt_log_n.powi(2);
    (DependencySizes::from_geometry(geometry).max_gamma_x as f64) < bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    /// Pairwise window-overlap count, no factorization.
    fn naive_counts(geometry: &CountingGeometry) -> Vec<u64> {
        let gamma: Vec<GridPoint> = geometry.gamma_points().collect();
        gamma
            .iter()
            .map(|&x| {
                let wx = geometry.window(x);
                gamma
                    .iter()
                    .filter(|&&y| wx.intersects(&geometry.window(y)))
                    .count() as u64
            })
            .collect()
    }

    #[test]
    fn closed_form_matches_overlap_oracle() {
        // small λ so that Γ_x is a proper subset of Γ
        for (n, lambda) in [(400.0, 0.5), (900.0, 0.7), (10_000.0, E * E), (1600.0, 1.0)] {
            let geo = CountingGeometry::new(n, lambda).unwrap();
            if geo.gamma_len() == 0 || geo.gamma_len() > 400 * 4 {
                continue;
            }
            let (gamma, counts) = compute_gamma_and_dependencies(n, lambda).unwrap();
            assert_eq!(gamma.len(), geo.gamma_len());
            assert_eq!(counts, naive_counts(&geo), "n = {n}, λ = {lambda}");
            let sizes = DependencySizes::from_geometry(&geo);
            assert_eq!(sizes.sum_gamma_x, counts.iter().sum::<u64>());
            assert_eq!(sizes.max_gamma_x, *counts.iter().max().unwrap());
            assert!(interior_bound_holds(&geo));
        }
    }

    #[test]
    fn interior_and_corner_counts() {
        let geo = CountingGeometry::new(2500.0, 0.6).unwrap();
        let r = dependency_radius(&geo);
        let mid = (geo.gamma_lo + geo.gamma_hi) / 2;
        assert!(geo.gamma_hi - geo.gamma_lo > 2 * r + 2);
        let interior = dependency_count(&geo, GridPoint::new(mid, mid));
        assert_eq!(interior, ((2 * r + 1) * (2 * r + 1)) as u64);
        let corner = dependency_count(&geo, GridPoint::new(geo.gamma_lo, geo.gamma_lo));
        assert!(corner < interior);
        assert_eq!(corner, ((r + 1) * (r + 1)) as u64);
    }

    #[test]
    fn separated_points_are_independent() {
        let geo = CountingGeometry::new(2500.0, 0.6).unwrap();
        let reach = 4.0 * 2f64.sqrt() * geo.small_threshold();
        for x in geo.gamma_points().step_by(7) {
            for y in geo.gamma_points().step_by(5) {
                if x.as_point().dist(y.as_point()) > reach {
                    assert!(!dependent(&geo, x, y));
                }
            }
        }
    }

    #[test]
    fn empty_gamma_is_a_size_error() {
        assert!(matches!(
            compute_gamma_and_dependencies(100.0, E * E),
            Err(LabError::Size(_))
        ));
    }
}

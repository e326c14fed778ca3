//! Fixtures shared by the benchmarks.

use knn_lab_core::model::{sample_poisson_pointset, PointSet, Region};

/// Poisson(1) pointset on a square of area `n`.
pub fn square_pointset(n: f64, seed: u64) -> PointSet {
    let side = n.sqrt();
    let region = Region::new(0.0, 0.0, side, side).expect("positive side");
    sample_poisson_pointset(region, 1.0, seed).expect("valid intensity")
}

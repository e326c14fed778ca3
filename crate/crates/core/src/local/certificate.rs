//! Replays the empty-tile construction on a concrete pointset and tries to
//! break it by inserting point batches into the chosen tile.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::constants::ConstantsBundle;
use super::events::{check_region, half_box_components, outcome_from_graph};
use super::tiling::{TileIndex, Tiling};
use crate::error::{invalid, Result};
use crate::model::{build_knn_graph, uniform_point, Point, PointSet, Region};
use crate::rng::rng_from_seed;

pub const MAX_BATCH: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileCase {
    /// Every tile below `Q_a` is empty; `Q` sits on the bottom edge of `U_n`.
    Boundary,
    /// `Q` is the empty tile directly above the topmost nonempty one.
    AboveNonempty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub batch: Vec<Point>,
    pub components_in_half_box: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// Bottom-most vertex over the two witness components.
    pub a: Point,
    pub tile_a: TileIndex,
    /// `None` when the tile directly below `Q_a` is occupied, which
    /// contradicts the construction.
    pub tile_q: Option<TileIndex>,
    pub region_q: Option<Region>,
    pub case: Option<TileCase>,
    pub batches_tested: usize,
    pub batches_passed: usize,
    pub failures: Vec<BatchFailure>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.tile_q.is_some()
            && self.failures.is_empty()
            && self.batches_passed == self.batches_tested
    }
}

/// Corners and centroid of `q`, nudged inward by a relative 1e-9 so they
/// land in `q` rather than on a neighbour's edge.
fn deterministic_points(q: &Region) -> Vec<Point> {
    let ex = q.width() * 1e-9;
    let ey = q.height() * 1e-9;
    vec![
        Point::new(q.x_min + ex, q.y_min + ey),
        Point::new(q.x_max - ex, q.y_min + ey),
        Point::new(q.x_min + ex, q.y_max - ey),
        Point::new(q.x_max - ex, q.y_max - ey),
        q.center(),
    ]
}

pub fn empty_tile_certificate(
    pointset: &PointSet,
    k: usize,
    constants: &ConstantsBundle,
    trial_count: usize,
    rng_seed: u64,
) -> Result<CertificateReport> {
    check_region(pointset, constants)?;
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let graph = build_knn_graph(pointset, k);
    let outcome = outcome_from_graph(&graph, pointset, constants);
    if !outcome.b_k || outcome.bad_c {
        return invalid(format!(
            "certificate needs B_k without the bad set, got b_k = {}, bad_C = {}",
            outcome.b_k, outcome.bad_c
        ));
    }
    let tiling = Tiling::new(constants)?;
    let comps = half_box_components(&graph, pointset, constants);
    let pts = &pointset.points;
    let a_idx = comps[0]
        .iter()
        .chain(&comps[1])
        .copied()
        .min_by(|&i, &j| pts[i].y.total_cmp(&pts[j].y).then(i.cmp(&j)))
        .expect("components are nonempty");
    let a = pts[a_idx];
    let tile_a = tiling.tile_of(a);

    let topmost_below = pts
        .iter()
        .map(|&p| tiling.tile_of(p))
        .filter(|t| t.ix == tile_a.ix && t.iy < tile_a.iy)
        .map(|t| t.iy)
        .max();
    let (tile_q, case) = match topmost_below {
        None => (
            TileIndex {
                ix: tile_a.ix,
                iy: 0,
            },
            TileCase::Boundary,
        ),
        Some(iy) if iy + 1 == tile_a.iy => {
            return Ok(CertificateReport {
                a,
                tile_a,
                tile_q: None,
                region_q: None,
                case: None,
                batches_tested: 0,
                batches_passed: 0,
                failures: Vec::new(),
            });
        }
        Some(iy) => (
            TileIndex {
                ix: tile_a.ix,
                iy: iy + 1,
            },
            TileCase::AboveNonempty,
        ),
    };
    let q = tiling.tile_region(tile_q)?;

    let mut batches: Vec<Vec<Point>> = deterministic_points(&q)
        .into_iter()
        .map(|p| vec![p])
        .collect();
    batches.push(deterministic_points(&q));
    let mut rng = rng_from_seed(rng_seed);
    for _ in 0..trial_count {
        let size = rng.random_range(1..=MAX_BATCH);
        batches.push((0..size).map(|_| uniform_point(&mut rng, &q)).collect());
    }

    let mut failures = Vec::new();
    let mut passed = 0;
    for batch in &batches {
        let extended = pointset.with_points_added(batch)?;
        let g = build_knn_graph(&extended, k);
        let inside = half_box_components(&g, &extended, constants).len();
        if inside >= 1 {
            passed += 1;
        } else {
            failures.push(BatchFailure {
                batch: batch.clone(),
                components_in_half_box: inside,
            });
        }
    }
    Ok(CertificateReport {
        a,
        tile_a,
        tile_q: Some(tile_q),
        region_q: Some(q),
        case: Some(case),
        batches_tested: batches.len(),
        batches_passed: passed,
        failures,
    })
}

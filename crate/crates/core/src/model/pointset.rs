use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::region::{Point, Region};
use crate::error::{invalid, Result};
use crate::rng::{rng_from_seed, LabRng};

/// Sampled planar points. The vector order is the generation order and is
/// the canonical vertex indexing used by every graph built on the set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub region: Region,
    pub seed: u64,
    pub intensity: f64,
}

impl PointSet {
    /// Wraps explicit points (fixtures, replays). Every point must lie in the
    /// closed region.
    pub fn from_points(points: Vec<Point>, region: Region) -> Result<Self> {
        if let Some((i, p)) = points
            .iter()
            .enumerate()
            .find(|(_, p)| !region.contains(**p))
        {
            return invalid(format!(
                "point {i} at ({}, {}) lies outside region",
                p.x, p.y
            ));
        }
        Ok(Self {
            points,
            region,
            seed: 0,
            intensity: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points falling in the closed `window`, together with their indices in
    /// `self`. The returned set inherits seed and intensity.
    pub fn restrict(&self, window: &Region) -> (PointSet, Vec<usize>) {
        let mut pts = Vec::new();
        let mut idx = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            if window.contains(*p) {
                pts.push(*p);
                idx.push(i);
            }
        }
        (
            PointSet {
                points: pts,
                region: *window,
                seed: self.seed,
                intensity: self.intensity,
            },
            idx,
        )
    }

    /// Copy with `extra` points appended after the existing ones.
    pub fn with_points_added(&self, extra: &[Point]) -> Result<PointSet> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        let mut out = PointSet::from_points(pts, self.region)?;
        out.seed = self.seed;
        out.intensity = self.intensity;
        Ok(out)
    }
}

/// Uniform point in the region.
pub fn uniform_point<R: Rng + ?Sized>(rng: &mut R, region: &Region) -> Point {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Point::new(
        region.x_min + region.width() * u,
        region.y_min + region.height() * v,
    )
}

/// Draws a homogeneous Poisson process of the given intensity on `region`
/// from an existing generator: first the count, then i.i.d. uniform points.
pub fn sample_poisson_with<R: Rng + ?Sized>(
    rng: &mut R,
    region: Region,
    intensity: f64,
) -> Result<Vec<Point>> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return invalid(format!(
            "intensity must be finite and >= 0, got {intensity}"
        ));
    }
    let mean = intensity * region.area();
    let count = if mean > 0.0 {
        let dist = Poisson::new(mean)
            .map_err(|e| crate::LabError::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
        dist.sample(rng) as usize
    } else {
        0
    };
    Ok((0..count).map(|_| uniform_point(rng, &region)).collect())
}

/// Poisson point process on `region`; a pure function of its arguments.
pub fn sample_poisson_pointset(region: Region, intensity: f64, seed: u64) -> Result<PointSet> {
    let mut rng: LabRng = rng_from_seed(seed);
    let points = sample_poisson_with(&mut rng, region, intensity)?;
    Ok(PointSet {
        points,
        region,
        seed,
        intensity,
    })
}

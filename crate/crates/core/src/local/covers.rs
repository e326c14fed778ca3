//! Covers of the inner square `T_n` by copies of `U_n`.

use serde::{Deserialize, Serialize};

use super::constants::ConstantsBundle;
use crate::error::{LabError, Result};
use crate::model::{Point, Region};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covers {
    /// `T_n`.
    pub inner: Region,
    /// Side of `U_n`, `M√(log n)`.
    pub cell: f64,
    /// Copies of `U_n` with disjoint interiors tiling `T_n`.
    pub independent: Vec<Region>,
    /// The 25 translates of each independent copy by multiples of a quarter
    /// side. Translates of neighbouring copies can coincide; they are kept.
    pub dominating: Vec<Region>,
}

fn cell_side(n: f64, m: f64) -> f64 {
    m * n.ln().sqrt()
}

fn copies_per_side(n: f64, m: f64) -> u64 {
    (n.sqrt() / cell_side(n, m)).floor() as u64
}

/// Smallest `n` (to within 0.1%) with `⌊√n / (M√(log n))⌋ >= 3`.
pub fn minimal_feasible_n(m: f64) -> f64 {
    let ok = |n: f64| n > 1.0 && copies_per_side(n, m) >= 3;
    let mut hi = 16.0;
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    // the ratio √n/√(log n) is increasing for n > e, so bisection applies
    while hi / lo > 1.001 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn build_covers(n: f64, constants: &ConstantsBundle) -> Result<Covers> {
    let m = constants.m;
    let per_side = copies_per_side(n, m);
    if per_side < 3 {
        return Err(LabError::Size(format!(
            "T_n is empty at n = {n} with M = {m}; the smallest feasible n is about {:.6e}",
            minimal_feasible_n(m)
        )));
    }
    let cell = cell_side(n, m);
    let inner = Region::new(
        cell,
        cell,
        (per_side - 1) as f64 * cell,
        (per_side - 1) as f64 * cell,
    )?;
    let mut independent = Vec::new();
    for j in 1..per_side - 1 {
        for i in 1..per_side - 1 {
            independent.push(Region::new(
                i as f64 * cell,
                j as f64 * cell,
                (i + 1) as f64 * cell,
                (j + 1) as f64 * cell,
            )?);
        }
    }
    let q = cell / 4.0;
    let mut dominating = Vec::with_capacity(25 * independent.len());
    for r in &independent {
        for dj in -2i32..=2 {
            for di in -2i32..=2 {
                dominating.push(r.translated(di as f64 * q, dj as f64 * q));
            }
        }
    }
    Ok(Covers {
        inner,
        cell,
        independent,
        dominating,
    })
}

/// Concentric quarter-side square of a copy.
pub fn quarter(r: &Region) -> Region {
    r.scaled(0.25).expect("positive factor")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub independent_count: usize,
    pub dominating_count: usize,
    pub independent_in_dominating: bool,
    pub count_bound_holds: bool,
    /// Axis-interval argument: the quarter squares form a product family.
    pub exact_coverage: bool,
    pub raster_points: u64,
    pub raster_uncovered: u64,
}

impl CoverCheck {
    pub fn all(&self) -> bool {
        self.independent_in_dominating
            && self.count_bound_holds
            && self.exact_coverage
            && self.raster_uncovered == 0
            && self.dominating_count == 25 * self.independent_count
    }
}

/// Checks the cover properties. The raster runs at `step` but is capped at
/// `max_side` points per axis; boundary lines of `T_n` are always included.
pub fn check_covers(
    covers: &Covers,
    n: f64,
    constants: &ConstantsBundle,
    step: f64,
    max_side: u64,
) -> CoverCheck {
    let quarters: Vec<Region> = covers.dominating.iter().map(quarter).collect();
    let independent_in_dominating = covers
        .independent
        .iter()
        .all(|r| covers.dominating.contains(r));
    let bound = 25.0 * n / (constants.m * constants.m * n.ln());
    let count_bound_holds = (covers.dominating.len() as f64) < bound;

    // every quarter square is centred on the lattice (cell/4)ℤ², so coverage
    // of T_n reduces to coverage of each axis by the centre intervals
    let mut xs: Vec<(f64, f64)> = quarters.iter().map(|r| (r.x_min, r.x_max)).collect();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-9 * covers.cell;
    let mut reach = covers.inner.x_min;
    for &(lo, hi) in &xs {
        if lo <= reach + tol {
            reach = reach.max(hi);
        }
    }
    let exact_coverage = reach >= covers.inner.x_max - tol;

    let side = covers.inner.width();
    let steps = ((side / step).ceil() as u64).clamp(1, max_side.max(1));
    let coord = |i: u64| covers.inner.x_min + side * i as f64 / steps as f64;
    let mut raster_points = 0;
    let mut raster_uncovered = 0;
    for iy in 0..=steps {
        for ix in 0..=steps {
            let p = Point::new(coord(ix), coord(iy));
            raster_points += 1;
            let covered = quarters.iter().any(|r| {
                p.x >= r.x_min - tol
                    && p.x <= r.x_max + tol
                    && p.y >= r.y_min - tol
                    && p.y <= r.y_max + tol
            });
            raster_uncovered += u64::from(!covered);
        }
    }
    CoverCheck {
        independent_count: covers.independent.len(),
        dominating_count: covers.dominating.len(),
        independent_in_dominating,
        count_bound_holds,
        exact_coverage,
        raster_points,
        raster_uncovered,
    }
}

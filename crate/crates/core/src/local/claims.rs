//! Random configurations for the two distance claims behind the empty-tile
//! argument.
//!
//! Lengths are in units of `√(log n)`, so the tile side is `1/N`. The tile of
//! `a` is `[0, s]²`; `b` lies in a tile directly below it and `c` in the tile
//! directly below `b`'s. `e` is the foot of the perpendicular from `b` to
//! the horizontal line `E` through `a`, and `d` lies on or above `E`, which
//! makes the angle at `e` obtuse.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::constants::ConstantsBundle;
use crate::model::Point;
use crate::rng::{rng_from_seed, LabRng};

const SQRT5: f64 = 2.236_067_977_499_789_7;

/// Premises are accepted only with this relative margin, so that rounding
/// in the sampler cannot manufacture a counterexample.
const PREMISE_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimConfig {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
    pub e: Point,
    pub r: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClaimTally {
    pub accepted: u64,
    pub rejected: u64,
    pub counterexamples: Vec<ClaimConfig>,
    /// Largest `‖a − d‖/λ₁` (claim 1) or `‖a − d‖/‖b − d‖` (claim 2) seen.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim1: ClaimTally,
    pub claim2: ClaimTally,
}

impl ClaimReport {
    pub fn counterexample_count(&self) -> usize {
        self.claim1.counterexamples.len() + self.claim2.counterexamples.len()
    }
}

struct Frame {
    s: f64,
    a: Point,
    b: Point,
    c: Point,
    e: Point,
}

fn frame(rng: &mut LabRng, s: f64, j_lo: f64, j_hi: f64) -> Frame {
    // tile offset j >= 1, log-uniform so that near and far tiles both occur
    let j = (rng.random_range(j_lo.ln()..=j_hi.ln()).exp().floor()).max(1.0);
    let a = Point::new(rng.random_range(0.0..s), rng.random_range(0.0..s));
    let b = Point::new(rng.random_range(0.0..s), -j * s + rng.random_range(0.0..s));
    let c = Point::new(
        rng.random_range(0.0..s),
        -(j + 1.0) * s + rng.random_range(0.0..s),
    );
    let e = Point::new(b.x, a.y);
    Frame { s, a, b, c, e }
}

/// Point of the disc of radius `rho` about `b` on or above the line
/// `y = y0`, on the rim when `rim` is set. `None` if the disc misses it.
fn point_above(rng: &mut LabRng, b: Point, rho: f64, y0: f64, rim: bool) -> Option<Point> {
    let h = y0 - b.y;
    if h > rho {
        return None;
    }
    // the admissible arc runs between the angles where the rim meets y = y0
    let t0 = (h / rho).clamp(-1.0, 1.0).asin();
    let t1 = std::f64::consts::PI - t0;
    for _ in 0..64 {
        let t = rng.random_range(t0..=t1);
        let r = if rim {
            rho
        } else {
            rho * rng.random_range(0.0f64..=1.0).sqrt()
        };
        let d = Point::new(b.x + r * t.cos(), b.y + r * t.sin());
        if d.y >= y0 {
            return Some(d);
        }
    }
    None
}

fn sample_claim1(rng: &mut LabRng, constants: &ConstantsBundle, tally: &mut ClaimTally) {
    let (l1, l2) = (constants.lambda1, constants.lambda2);
    let s = 1.0 / constants.n_tiles as f64;
    let f = frame(rng, s, 1.0, (2.0 * l2 / s).ceil() + 2.0);
    let ac = f.a.dist(f.c);
    let r_max = l2.min(ac);
    let extreme = rng.random_bool(0.5);
    let r = if extreme {
        r_max
    } else {
        rng.random_range(0.0..=r_max)
    };
    let rho = (r + SQRT5 * f.s) * (1.0 - PREMISE_MARGIN);
    let Some(d) = point_above(rng, f.b, rho, f.a.y + PREMISE_MARGIN * f.s, extreme) else {
        tally.rejected += 1;
        return;
    };
    tally.accepted += 1;
    let ratio = f.a.dist(d) / l1;
    tally.max_ratio = tally.max_ratio.max(ratio);
    if ratio > 1.0 {
        tally.counterexamples.push(ClaimConfig {
            a: f.a,
            b: f.b,
            c: f.c,
            d,
            e: f.e,
            r,
        });
    }
}

fn sample_claim2(rng: &mut LabRng, constants: &ConstantsBundle, tally: &mut ClaimTally) {
    let (l1, l2) = (constants.lambda1, constants.lambda2);
    let s = 1.0 / constants.n_tiles as f64;
    let f = frame(rng, s, (l1 / s - 2.0).max(1.0), l2 / s + 2.0);
    if f.a.dist(f.c) < l1 * (1.0 + PREMISE_MARGIN) {
        tally.rejected += 1;
        return;
    }
    let extreme = rng.random_bool(0.5);
    let Some(d) = point_above(
        rng,
        f.b,
        l2 * (1.0 - PREMISE_MARGIN),
        f.a.y + PREMISE_MARGIN * s,
        extreme,
    ) else {
        tally.rejected += 1;
        return;
    };
    tally.accepted += 1;
    let ratio = f.a.dist(d) / f.b.dist(d);
    tally.max_ratio = tally.max_ratio.max(ratio);
    if ratio >= 1.0 {
        tally.counterexamples.push(ClaimConfig {
            a: f.a,
            b: f.b,
            c: f.c,
            d,
            e: f.e,
            r: l2,
        });
    }
}

/// Draws configurations until each claim has `sample_count` accepted ones
/// (or ten times that many attempts have been made).
pub fn check_claim_inequalities(
    sample_count: u64,
    rng_seed: u64,
    constants: &ConstantsBundle,
) -> ClaimReport {
    let mut rng = rng_from_seed(rng_seed);
    let mut claim1 = ClaimTally::default();
    let mut claim2 = ClaimTally::default();
    while claim1.accepted < sample_count && claim1.rejected < 10 * sample_count.max(1) {
        sample_claim1(&mut rng, constants, &mut claim1);
    }
    while claim2.accepted < sample_count && claim2.rejected < 10 * sample_count.max(1) {
        sample_claim2(&mut rng, constants, &mut claim2);
    }
    ClaimReport { claim1, claim2 }
}

//! Constants of the local argument: box size, concentration radii and tile
//! resolution, with the inequalities the empty-tile argument relies on.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::model::Region;

const SQRT5: f64 = 2.236_067_977_499_789_7;

/// `λ₂′ = 2√(e³/π)`, radius of the quarter disc with area `e³ log n`.
pub fn lambda2_prime() -> f64 {
    2.0 * (E.powi(3) / PI).sqrt()
}

/// `λ₁′ = √(e^{-49/3}/π)`, radius of the disc with area `e^{-49/3} log n`.
pub fn lambda1_prime() -> f64 {
    ((-49.0f64 / 3.0).exp() / PI).sqrt()
}

/// `max(160⌈λ⌉, 50)`.
pub fn box_multiplier(lambda: f64) -> f64 {
    (160.0 * lambda.ceil()).max(50.0)
}

pub fn n1_for(lambda1: f64) -> u64 {
    (SQRT5 / lambda1).ceil() as u64 + 1
}

pub fn n2_for(lambda1: f64, lambda2: f64) -> u64 {
    (2.0 / lambda1 + 4.0 * SQRT5 * lambda2 / (lambda1 * lambda1)).ceil() as u64
}

pub fn n3_for(lambda1: f64, lambda2: f64) -> u64 {
    let a = (1.0 + SQRT5) * lambda1 + lambda2;
    let disc = a * a - (5.0 + 2.0 * SQRT5) * lambda1 * lambda1;
    ((a + disc.sqrt()) / (lambda1 * lambda1)).ceil() as u64 + 1
}

/// Left side of the tile-size inequality used for `‖a − d‖ ≤ λ₁√(log n)`.
pub fn guard1_lhs(n_tiles: f64, lambda2: f64) -> f64 {
    1.0 / n_tiles + (4.0 * SQRT5 * lambda2 / n_tiles + 1.0 / (n_tiles * n_tiles)).sqrt()
}

/// Both sides of the inequality used for `‖a − d‖ < ‖b − d‖`.
pub fn guard2_sides(n_tiles: f64, lambda1: f64, lambda2: f64) -> (f64, f64) {
    let lhs = 1.0 / (n_tiles * n_tiles) + 2.0 * lambda2 / n_tiles;
    let rhs = (lambda1 - (1.0 + SQRT5) / n_tiles).powi(2);
    (lhs, rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMode {
    Full,
    Scaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardCheck {
    pub guard1_lhs: f64,
    pub guard1_holds: bool,
    pub guard2_lhs: f64,
    pub guard2_rhs: f64,
    pub guard2_holds: bool,
    pub lambda2_le_lambda: bool,
    /// `λ₂√(log n) + √2 < (M/4 − 1/N)√(log n)`: an added point in a tile on
    /// the bottom edge of `U_n` cannot reach the central subsquare.
    pub boundary_holds: bool,
    /// `N > √5/λ₁`: the tile directly below `a`'s tile is empty.
    pub n1_holds: bool,
}

impl GuardCheck {
    pub fn all(&self) -> bool {
        self.guard1_holds
            && self.guard2_holds
            && self.lambda2_le_lambda
            && self.boundary_holds
            && self.n1_holds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub mode: ConstantsMode,
    pub lambda: f64,
    pub m: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    /// Tiles per `√(log n)` of side length.
    pub n_tiles: u64,
    pub c3: f64,
    pub c4: f64,
    pub n: f64,
    pub guards: GuardCheck,
}

impl ConstantsBundle {
    pub fn log_n(&self) -> f64 {
        self.n.ln()
    }

    pub fn sqrt_log_n(&self) -> f64 {
        self.log_n().sqrt()
    }

    /// `U_n = [−M√(log n)/2, M√(log n)/2]²`.
    pub fn u_n(&self) -> Region {
        let h = 0.5 * self.m * self.sqrt_log_n();
        Region::new(-h, -h, h, h).expect("positive box")
    }

    /// The concentric subsquare of half the side.
    pub fn half_box(&self) -> Region {
        let h = 0.25 * self.m * self.sqrt_log_n();
        Region::new(-h, -h, h, h).expect("positive box")
    }

    pub fn r1(&self) -> f64 {
        self.lambda1 * self.sqrt_log_n()
    }

    pub fn r2(&self) -> f64 {
        self.lambda2 * self.sqrt_log_n()
    }

    /// Tiles along one side of `U_n`; `M·N` must be a whole number.
    pub fn tiles_per_side(&self) -> Result<u64> {
        let t = self.m * self.n_tiles as f64;
        let r = t.round();
        if r < 1.0 || (t - r).abs() > 1e-9 * r {
            return invalid(format!("M·N = {t} is not a whole number of tiles"));
        }
        Ok(r as u64)
    }
}

fn check_guards(
    lambda: f64,
    m: f64,
    lambda1: f64,
    lambda2: f64,
    n_tiles: u64,
    n: f64,
) -> GuardCheck {
    let nt = n_tiles as f64;
    let g1 = guard1_lhs(nt, lambda2);
    let (l2, r2) = guard2_sides(nt, lambda1, lambda2);
    GuardCheck {
        guard1_lhs: g1,
        guard1_holds: g1 <= lambda1,
        guard2_lhs: l2,
        guard2_rhs: r2,
        guard2_holds: l2 < r2,
        lambda2_le_lambda: lambda2 <= lambda,
        boundary_holds: lambda2 + 2f64.sqrt() / n.ln().sqrt() < m / 4.0 - 1.0 / nt,
        n1_holds: nt > SQRT5 / lambda1,
    }
}

/// Relative slack on the `λ ≥ e²` requirement so that e² typed to a few
/// decimals (7.389056) is accepted.
const LAMBDA_SLACK: f64 = 1e-7;

fn check_inputs(lambda: f64, n: f64) -> Result<()> {
    if !(n > 1.0) || !n.is_finite() {
        return invalid(format!("n must exceed 1, got {n}"));
    }
    if !(lambda >= E * E * (1.0 - LAMBDA_SLACK)) || !lambda.is_finite() {
        return invalid(format!("λ must be at least e², got {lambda}"));
    }
    Ok(())
}

/// The full-size bundle.
pub fn compute_constants(lambda: f64, n: f64) -> Result<ConstantsBundle> {
    check_inputs(lambda, n)?;
    let m = box_multiplier(lambda);
    let lambda2 = lambda2_prime() + 1.0;
    let lambda1 = lambda1_prime() / 2.0;
    let n1 = n1_for(lambda1);
    let n2 = n2_for(lambda1, lambda2);
    let n3 = n3_for(lambda1, lambda2);
    let n_tiles = n1.max(n2).max(n3);
    let guards = check_guards(lambda, m, lambda1, lambda2, n_tiles, n);
    if !guards.all() {
        return Err(LabError::Invariant(format!(
            "constant guards failed at λ = {lambda}: {guards:?}"
        )));
    }
    Ok(ConstantsBundle {
        mode: ConstantsMode::Full,
        lambda,
        m,
        lambda1,
        lambda2,
        n1,
        n2,
        n3,
        n_tiles,
        c3: (m * n_tiles as f64).powi(2),
        c4: 1.0 / (n_tiles as f64).powi(2),
        n,
        guards,
    })
}

/// Smallest `λ₁` (up to a relative margin of 1e-9) meeting both tile
/// inequalities for the given `N` and `λ₂`.
pub fn minimal_lambda1(n_tiles: f64, lambda2: f64) -> f64 {
    let from_guard1 = guard1_lhs(n_tiles, lambda2);
    let from_guard2 =
        (1.0 + SQRT5) / n_tiles + (1.0 / (n_tiles * n_tiles) + 2.0 * lambda2 / n_tiles).sqrt();
    from_guard1.max(from_guard2) * (1.0 + 1e-9)
}

/// Desk-scale bundle: `M`, `N` and `λ₂` chosen by the caller, `λ₁` solved
/// from the two tile inequalities. `N₁..N₃` are reported for the solved
/// radii but `N` is not forced to dominate them; the inequalities they
/// stand for are checked directly.
pub fn scaled_constants(
    lambda: f64,
    n: f64,
    m: f64,
    n_tiles: u64,
    lambda2: f64,
) -> Result<ConstantsBundle> {
    check_inputs(lambda, n)?;
    if !(m > 0.0) || !m.is_finite() || n_tiles == 0 {
        return invalid(format!("need M > 0 and N >= 1, got M = {m}, N = {n_tiles}"));
    }
    if !(lambda2 > 0.0) || !lambda2.is_finite() {
        return invalid(format!("λ₂ must be positive, got {lambda2}"));
    }
    let nt = n_tiles as f64;
    let lambda1 = minimal_lambda1(nt, lambda2);
    let guards = check_guards(lambda, m, lambda1, lambda2, n_tiles, n);
    let bundle = ConstantsBundle {
        mode: ConstantsMode::Scaled,
        lambda,
        m,
        lambda1,
        lambda2,
        n1: n1_for(lambda1),
        n2: n2_for(lambda1, lambda2),
        n3: n3_for(lambda1, lambda2),
        n_tiles,
        c3: (m * nt).powi(2),
        c4: 1.0 / (nt * nt),
        n,
        guards,
    };
    bundle.tiles_per_side()?;
    if !guards.all() {
        return Err(LabError::Invariant(format!(
            "scaled constants M = {m}, N = {n_tiles}, λ₂ = {lambda2} violate {guards:?}"
        )));
    }
    Ok(bundle)
}

pub const DEFAULT_SCALED_M: f64 = 10.0;
pub const DEFAULT_SCALED_N_TILES: u64 = 100_000;
pub const DEFAULT_SCALED_LAMBDA2: f64 = 1.5;

pub fn default_scaled_constants(lambda: f64, n: f64) -> Result<ConstantsBundle> {
    scaled_constants(
        lambda,
        n,
        DEFAULT_SCALED_M,
        DEFAULT_SCALED_N_TILES,
        DEFAULT_SCALED_LAMBDA2,
    )
}

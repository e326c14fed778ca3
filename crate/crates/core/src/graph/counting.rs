//! Integer-grid counting of small components.
//!
//! Every small component is charged to the point of Z^2 nearest its
//! bottom-most vertex. `X(x)` does this for the global graph on the square
//! of area `n`; `Y(x)` does it for the graph built only on the points inside
//! the window `V_n(x)` of side `4 λ √(log n)` centred at `x`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::components::{connected_components, ComponentSummary};
use crate::error::{invalid, Result};
use crate::model::{build_knn_graph, longest_edge_length, Point, PointSet, Region};

/// A point of Z^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub gx: i64,
    pub gy: i64,
}

impl GridPoint {
    pub const fn new(gx: i64, gy: i64) -> Self {
        Self { gx, gy }
    }

    pub fn as_point(self) -> Point {
        Point::new(self.gx as f64, self.gy as f64)
    }
}

/// Nearest point of Z^2 and whether it is unique. Uniqueness fails exactly
/// when a coordinate is a half-integer.
pub fn nearest_grid_point(p: Point) -> (GridPoint, bool) {
    let half = |v: f64| v - v.floor() == 0.5;
    let unique = !half(p.x) && !half(p.y);
    (
        GridPoint::new(p.x.round() as i64, p.y.round() as i64),
        unique,
    )
}

/// Scale parameters shared by the counting functions and bad events for a
/// square of area `n` and component scale `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingGeometry {
    pub n: f64,
    pub lambda: f64,
    /// `√n`, side of the square.
    pub side: f64,
    pub sqrt_log_n: f64,
    /// First and last grid coordinate of Γ on each axis (`lo > hi` if empty).
    pub gamma_lo: i64,
    pub gamma_hi: i64,
}

impl CountingGeometry {
    pub fn new(n: f64, lambda: f64) -> Result<Self> {
        if !(n > 1.0) || !n.is_finite() {
            return invalid(format!("n must exceed 1, got {n}"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        let side = n.sqrt();
        let sqrt_log_n = n.ln().sqrt();
        let half = 2.0 * lambda * sqrt_log_n;
        Ok(Self {
            n,
            lambda,
            side,
            sqrt_log_n,
            gamma_lo: half.ceil() as i64,
            gamma_hi: (side - half).floor() as i64,
        })
    }

    /// The square of area `n`.
    pub fn square(&self) -> Region {
        Region::new(0.0, 0.0, self.side, self.side).expect("n > 1")
    }

    /// Components with diameter strictly below this are small.
    pub fn small_threshold(&self) -> f64 {
        self.lambda * self.sqrt_log_n
    }

    /// Small components with points closer than this are close.
    pub fn close_threshold(&self) -> f64 {
        8.0 * self.small_threshold()
    }

    /// Half the side of `V_n(x)`.
    pub fn window_half_side(&self) -> f64 {
        2.0 * self.small_threshold()
    }

    /// `V_n(x)`.
    pub fn window(&self, x: GridPoint) -> Region {
        Region::square(x.as_point(), 2.0 * self.window_half_side()).expect("positive side")
    }

    /// Γ along one axis.
    pub fn gamma_axis_len(&self) -> usize {
        (self.gamma_hi - self.gamma_lo + 1).max(0) as usize
    }

    pub fn gamma_len(&self) -> usize {
        self.gamma_axis_len().pow(2)
    }

    pub fn in_gamma(&self, x: GridPoint) -> bool {
        (self.gamma_lo..=self.gamma_hi).contains(&x.gx)
            && (self.gamma_lo..=self.gamma_hi).contains(&x.gy)
    }

    /// Γ in row-major order.
    pub fn gamma_points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (self.gamma_lo..=self.gamma_hi).flat_map(move |gy| {
            (self.gamma_lo..=self.gamma_hi).map(move |gx| GridPoint::new(gx, gy))
        })
    }

    /// `index`-th member of Γ in row-major order.
    pub fn gamma_point(&self, index: usize) -> GridPoint {
        let w = self.gamma_axis_len();
        GridPoint::new(
            self.gamma_lo + (index % w) as i64,
            self.gamma_lo + (index / w) as i64,
        )
    }
}

/// How a small component maps onto the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Charge {
    /// Unique bottom-most vertex with a unique nearest grid point.
    At(GridPoint),
    /// A tie in the bottom-most vertex or in the rounding.
    Ambiguous,
}

pub fn charge_of(component: &ComponentSummary, pointset: &PointSet) -> Charge {
    if !component.bottom_most_unique {
        return Charge::Ambiguous;
    }
    match nearest_grid_point(pointset.points[component.bottom_most_vertex]) {
        (g, true) => Charge::At(g),
        (_, false) => Charge::Ambiguous,
    }
}

/// Values of the global counting function. Only grid points of Γ with
/// `X(x) = 1` are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountingField {
    pub ones: BTreeSet<GridPoint>,
    /// Small components charged to a grid point outside Γ.
    pub outside_gamma: usize,
    /// Small components with an ambiguous charge.
    pub ambiguous: usize,
}

impl CountingField {
    pub fn get(&self, x: GridPoint) -> u8 {
        u8::from(self.ones.contains(&x))
    }

    pub fn total(&self) -> usize {
        self.ones.len()
    }
}

/// `X(x)` over Γ from precomputed components of the global graph.
pub fn counting_field(
    components: &[ComponentSummary],
    pointset: &PointSet,
    geometry: &CountingGeometry,
) -> CountingField {
    let mut field = CountingField::default();
    for c in components.iter().filter(|c| c.is_small) {
        match charge_of(c, pointset) {
            Charge::At(g) if geometry.in_gamma(g) => {
                field.ones.insert(g);
            }
            Charge::At(_) => field.outside_gamma += 1,
            Charge::Ambiguous => field.ambiguous += 1,
        }
    }
    field
}

/// Builds the global graph and evaluates `X(x)` over Γ.
pub fn global_counting_function(
    pointset: &PointSet,
    k: usize,
    geometry: &CountingGeometry,
) -> Result<CountingField> {
    check_square(pointset, geometry)?;
    let graph = build_knn_graph(pointset, k);
    let comps = connected_components(&graph, pointset, geometry.small_threshold())?;
    Ok(counting_field(&comps, pointset, geometry))
}

pub(crate) fn check_square(pointset: &PointSet, geometry: &CountingGeometry) -> Result<()> {
    if pointset.region != geometry.square() {
        return invalid("pointset region is not the square [0, sqrt(n)]^2");
    }
    Ok(())
}

/// Outcome of the local graph `V_{n,k}(x)` at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalProbe {
    pub x: GridPoint,
    /// `Y(x)`.
    pub y: bool,
    /// The local graph has an edge of length at least `λ√(log n)`.
    pub long_edge: bool,
    /// Some small local component has an ambiguous charge.
    pub ambiguous: bool,
}

/// Builds `V_{n,k}(x)` from the points of `pointset` inside `V_n(x)` and
/// evaluates `Y(x)` along with the local bad-event inputs.
pub fn local_probe(
    pointset: &PointSet,
    k: usize,
    geometry: &CountingGeometry,
    x: GridPoint,
) -> Result<LocalProbe> {
    let (local, _) = pointset.restrict(&geometry.window(x));
    let graph = build_knn_graph(&local, k);
    let threshold = geometry.small_threshold();
    let long_edge = longest_edge_length(&graph, &local)? >= threshold;
    let comps = connected_components(&graph, &local, threshold)?;
    let mut y = false;
    let mut ambiguous = false;
    for c in comps.iter().filter(|c| c.is_small) {
        match charge_of(c, &local) {
            Charge::At(g) => y |= g == x,
            Charge::Ambiguous => ambiguous = true,
        }
    }
    Ok(LocalProbe {
        x,
        y,
        long_edge,
        ambiguous,
    })
}

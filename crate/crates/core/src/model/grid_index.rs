//! Uniform bucket grid for exact k-nearest-neighbour queries.
//!
//! Points are bucketed into square cells sized for roughly two points per
//! cell. A query visits Chebyshev rings of cells around the query cell and
//! stops once the current k-th candidate is strictly closer than anything
//! an unvisited ring could hold, so ties at the frontier are always resolved
//! by index exactly as in a full scan.

use super::region::{Point, Region};

/// Candidate neighbour ordered by `(squared distance, index)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub dist2: f64,
    pub index: usize,
}

impl Candidate {
    #[inline]
    fn before(&self, other: &Candidate) -> bool {
        self.dist2 < other.dist2 || (self.dist2 == other.dist2 && self.index < other.index)
    }
}

/// Keeps the `k` best candidates in ascending order.
#[derive(Debug)]
pub(crate) struct BestK {
    k: usize,
    items: Vec<Candidate>,
}

impl BestK {
    pub(crate) fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    pub(crate) fn offer(&mut self, c: Candidate) {
        if self.k == 0 {
            return;
        }
        if self.items.len() == self.k {
            if !c.before(self.items.last().unwrap()) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(|x| x.before(&c));
        self.items.insert(pos, c);
    }

    #[inline]
    pub(crate) fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    #[inline]
    pub(crate) fn worst_dist2(&self) -> f64 {
        self.items.last().map_or(f64::INFINITY, |c| c.dist2)
    }

    pub(crate) fn into_vec(self) -> Vec<Candidate> {
        self.items
    }
}

#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    cell_start: Vec<usize>,
    order: Vec<usize>,
    points: Vec<Point>,
}

impl GridIndex {
    /// Builds the index over `points` lying in `region`. Points outside the
    /// region are clamped into the border cells.
    pub fn new(points: &[Point], region: &Region) -> Self {
        let n = points.len().max(1);
        let target = (region.area() * 2.0 / n as f64).sqrt();
        let cell = if target.is_finite() && target > 0.0 {
            target
        } else {
            region.width().max(region.height()).max(1.0)
        };
        let nx = ((region.width() / cell).ceil() as usize).clamp(1, 1 << 15);
        let ny = ((region.height() / cell).ceil() as usize).clamp(1, 1 << 15);
        let cell = (region.width() / nx as f64).max(region.height() / ny as f64);
        let origin = Point::new(region.x_min, region.y_min);

        let mut idx = Self {
            origin,
            cell,
            nx,
            ny,
            cell_start: vec![0; nx * ny + 1],
            order: vec![0; points.len()],
            points: points.to_vec(),
        };
        let cells: Vec<usize> = points.iter().map(|p| idx.cell_of(*p)).collect();
        for &c in &cells {
            idx.cell_start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            idx.cell_start[c + 1] += idx.cell_start[c];
        }
        let mut fill = idx.cell_start.clone();
        for (i, &c) in cells.iter().enumerate() {
            idx.order[fill[c]] = i;
            fill[c] += 1;
        }
        idx
    }

    #[inline]
    fn cell_coords(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor();
        let cy = ((p.y - self.origin.y) / self.cell).floor();
        let cx = if cx.is_nan() { 0.0 } else { cx };
        let cy = if cy.is_nan() { 0.0 } else { cy };
        (
            (cx.max(0.0) as usize).min(self.nx - 1),
            (cy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    #[inline]
    fn cell_of(&self, p: Point) -> usize {
        let (cx, cy) = self.cell_coords(p);
        cy * self.nx + cx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest indexed points to `q` in `(distance, index)` order,
    /// skipping `exclude` (the query vertex itself when querying a member).
    pub fn nearest(&self, q: Point, k: usize, exclude: Option<usize>) -> Vec<Candidate> {
        let available = self.points.len() - usize::from(exclude.is_some());
        let k = k.min(available);
        let mut best = BestK::new(k);
        if k == 0 {
            return Vec::new();
        }
        let (qx, qy) = self.cell_coords(q);
        let max_ring = self.nx.max(self.ny);
        for r in 0..=max_ring {
            self.visit_ring(qx, qy, r, q, exclude, &mut best);
            if best.is_full() {
                let bound = self.ring_clearance(qx, qy, r, q);
                // unvisited cells lie at distance >= bound from q
                if bound.is_infinite() || best.worst_dist2() < bound * bound {
                    break;
                }
            }
        }
        best.into_vec()
    }

    fn visit_ring(
        &self,
        qx: usize,
        qy: usize,
        r: usize,
        q: Point,
        exclude: Option<usize>,
        best: &mut BestK,
    ) {
        let (qx, qy, r) = (qx as isize, qy as isize, r as isize);
        let x0 = qx - r;
        let x1 = qx + r;
        let y0 = qy - r;
        let y1 = qy + r;
        for cy in y0..=y1 {
            if cy < 0 || cy >= self.ny as isize {
                continue;
            }
            let on_edge_row = cy == y0 || cy == y1;
            let mut cx = x0;
            while cx <= x1 {
                if cx >= 0 && cx < self.nx as isize {
                    let c = cy as usize * self.nx + cx as usize;
                    for &i in &self.order[self.cell_start[c]..self.cell_start[c + 1]] {
                        if Some(i) == exclude {
                            continue;
                        }
                        best.offer(Candidate {
                            dist2: q.dist2(self.points[i]),
                            index: i,
                        });
                    }
                }
                cx = if on_edge_row || cx == x1 { cx + 1 } else { x1 };
            }
        }
    }

    /// Lower bound on the distance from `q` to any cell outside the block of
    /// rings `0..=r`; infinite once that block covers the whole grid.
    fn ring_clearance(&self, qx: usize, qy: usize, r: usize, q: Point) -> f64 {
        let lo_x = qx as isize - r as isize;
        let hi_x = qx + r;
        let lo_y = qy as isize - r as isize;
        let hi_y = qy + r;
        let mut bound = f64::INFINITY;
        if lo_x > 0 {
            bound = bound.min(q.x - (self.origin.x + lo_x as f64 * self.cell));
        }
        if hi_x + 1 < self.nx {
            bound = bound.min(self.origin.x + (hi_x + 1) as f64 * self.cell - q.x);
        }
        if lo_y > 0 {
            bound = bound.min(q.y - (self.origin.y + lo_y as f64 * self.cell));
        }
        if hi_y + 1 < self.ny {
            bound = bound.min(self.origin.y + (hi_y + 1) as f64 * self.cell - q.y);
        }
        // absorb rounding in the cell assignment
        (bound * (1.0 - 1e-12)).max(0.0)
    }
}

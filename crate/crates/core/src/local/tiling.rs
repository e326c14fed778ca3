use serde::{Deserialize, Serialize};

use super::constants::ConstantsBundle;
use crate::error::{invalid, Result};
use crate::model::{Point, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileIndex {
    pub ix: u64,
    pub iy: u64,
}

/// Square tiling of `U_n`, `M·N` tiles per side. Tiles are computed on
/// demand; at full scale there are about 10²⁶ of them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tiling {
    pub region: Region,
    pub tiles_per_side: u64,
    pub tile_side: f64,
}

impl Tiling {
    pub fn new(constants: &ConstantsBundle) -> Result<Self> {
        let region = constants.u_n();
        let tiles_per_side = constants.tiles_per_side()?;
        Ok(Self {
            region,
            tiles_per_side,
            tile_side: region.width() / tiles_per_side as f64,
        })
    }

    pub fn tile_count(&self) -> u128 {
        (self.tiles_per_side as u128).pow(2)
    }

    pub fn tile_area(&self) -> f64 {
        self.tile_side * self.tile_side
    }

    /// Tile containing `p`; points on a shared edge go to the upper/right
    /// tile except on the far boundary of `U_n`.
    pub fn tile_of(&self, p: Point) -> TileIndex {
        let last = self.tiles_per_side - 1;
        let idx = |v: f64, lo: f64| {
            let t = ((v - lo) / self.tile_side).floor();
            if t <= 0.0 {
                0
            } else {
                (t as u64).min(last)
            }
        };
        TileIndex {
            ix: idx(p.x, self.region.x_min),
            iy: idx(p.y, self.region.y_min),
        }
    }

    pub fn tile_region(&self, t: TileIndex) -> Result<Region> {
        if t.ix >= self.tiles_per_side || t.iy >= self.tiles_per_side {
            return invalid(format!("tile ({}, {}) outside the tiling", t.ix, t.iy));
        }
        let edge = |i: u64, lo: f64, hi: f64| {
            if i + 1 == self.tiles_per_side {
                hi
            } else {
                lo + (i + 1) as f64 * self.tile_side
            }
        };
        let r = &self.region;
        Region::new(
            r.x_min + t.ix as f64 * self.tile_side,
            r.y_min + t.iy as f64 * self.tile_side,
            edge(t.ix, r.x_min, r.x_max),
            edge(t.iy, r.y_min, r.y_max),
        )
    }

    /// All tiles, row by row. Refuses tilings with more than `limit` tiles.
    pub fn tiles(&self, limit: u128) -> Result<Vec<Region>> {
        if self.tile_count() > limit {
            return invalid(format!(
                "{} tiles exceed the limit {limit}",
                self.tile_count()
            ));
        }
        let mut out = Vec::with_capacity(self.tile_count() as usize);
        for iy in 0..self.tiles_per_side {
            for ix in 0..self.tiles_per_side {
                out.push(self.tile_region(TileIndex { ix, iy })?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::constants::scaled_constants;
    use std::f64::consts::E;

    #[test]
    fn small_tiling_partitions_the_box() {
        let c = scaled_constants(E * E, 6f64.exp(), 10.0, 8, 1.5).unwrap();
        let t = Tiling::new(&c).unwrap();
        assert_eq!(t.tiles_per_side, 80);
        let tiles = t.tiles(10_000).unwrap();
        let total: f64 = tiles.iter().map(Region::area).sum();
        assert!((total - c.u_n().area()).abs() < 1e-9 * total);
        assert!((t.tile_area() - c.log_n() / 64.0).abs() < 1e-12);
        for (i, a) in tiles.iter().enumerate().step_by(97) {
            for b in tiles.iter().skip(i + 1).step_by(13) {
                let overlap_w = a.x_max.min(b.x_max) - a.x_min.max(b.x_min);
                let overlap_h = a.y_max.min(b.y_max) - a.y_min.max(b.y_min);
                assert!(overlap_w <= 1e-12 || overlap_h <= 1e-12);
            }
        }
        let u = c.u_n();
        assert_eq!(
            t.tile_of(Point::new(u.x_min, u.y_min)),
            TileIndex { ix: 0, iy: 0 }
        );
        assert_eq!(
            t.tile_of(Point::new(u.x_max, u.y_max)),
            TileIndex { ix: 79, iy: 79 }
        );
        let p = Point::new(0.3, -1.7);
        assert!(t.tile_region(t.tile_of(p)).unwrap().contains(p));
        assert!(t.tiles(100).is_err());
    }
}

//! Rate-1 Poisson points on the space-time plane, generated cell by cell
//! from seeds derived from the cell coordinates.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::{tag, RngStream};

pub const DEFAULT_CELL: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub space: f64,
    pub time: f64,
}

/// Points in `(space_lo, space_hi] x (0, time_hi]`, sorted by space.
///
/// Enlarging the rectangle keeps every point already present, because each
/// cell of the fixed lattice draws from its own stream.
#[derive(Clone, Debug)]
pub struct PoissonField {
    seed: u64,
    cell: f64,
    space_lo: f64,
    space_hi: f64,
    time_hi: f64,
    points: Vec<Point>,
}

impl PoissonField {
    pub fn new(seed: u64, space_lo: f64, space_hi: f64, time_hi: f64) -> Result<Self> {
        Self::with_cell(seed, space_lo, space_hi, time_hi, DEFAULT_CELL)
    }

    pub fn with_cell(
        seed: u64,
        space_lo: f64,
        space_hi: f64,
        time_hi: f64,
        cell: f64,
    ) -> Result<Self> {
        let finite = [space_lo, space_hi, time_hi, cell].iter().all(|v| v.is_finite());
        if !finite || space_hi < space_lo || time_hi < 0.0 || cell <= 0.0 {
            return Err(Error::Degenerate(format!(
                "bad field rectangle ({space_lo}, {space_hi}] x (0, {time_hi}] with cell {cell}"
            )));
        }
        let mut points = Vec::new();
        let (cx_lo, cx_hi) = ((space_lo / cell).floor() as i64, (space_hi / cell).floor() as i64);
        let cy_hi = (time_hi / cell).ceil() as i64;
        let count = Poisson::new(cell * cell).expect("positive cell area");
        for cx in cx_lo..=cx_hi {
            for cy in 0..cy_hi {
                let mut rng = RngStream::derive(seed, &[tag::FIELD, cx as u64, cy as u64]);
                let k = count.sample(&mut rng) as usize;
                for _ in 0..k {
                    let space = (cx as f64 + rng.random::<f64>()) * cell;
                    let time = (cy as f64 + rng.random::<f64>()) * cell;
                    if space > space_lo && space <= space_hi && time > 0.0 && time <= time_hi {
                        points.push(Point { space, time });
                    }
                }
            }
        }
        points.sort_by(|a, b| a.space.total_cmp(&b.space));
        Ok(Self {
            seed,
            cell,
            space_lo,
            space_hi,
            time_hi,
            points,
        })
    }

    /// Field with explicit points; `seed` and `cell` are unused.
    pub fn from_points(
        mut points: Vec<Point>,
        space_lo: f64,
        space_hi: f64,
        time_hi: f64,
    ) -> Result<Self> {
        if points
            .iter()
            .any(|p| !(p.space > space_lo && p.space <= space_hi && p.time > 0.0 && p.time <= time_hi))
        {
            return Err(Error::Degenerate("point outside the field rectangle".into()));
        }
        points.sort_by(|a, b| a.space.total_cmp(&b.space));
        Ok(Self {
            seed: 0,
            cell: DEFAULT_CELL,
            space_lo,
            space_hi,
            time_hi,
            points,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn space_lo(&self) -> f64 {
        self.space_lo
    }

    pub fn space_hi(&self) -> f64 {
        self.space_hi
    }

    pub fn time_hi(&self) -> f64 {
        self.time_hi
    }

    pub fn area(&self) -> f64 {
        (self.space_hi - self.space_lo) * self.time_hi
    }

    /// Index of the first point with space coordinate strictly above `s`.
    pub fn first_after(&self, s: f64) -> usize {
        self.points.partition_point(|p| p.space <= s)
    }
}

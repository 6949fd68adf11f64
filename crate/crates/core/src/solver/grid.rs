use serde::Serialize;

pub use crate::numerics::fd::Boundary;
use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// Node values (h, u) on a uniform grid at one time level.
///
/// Periodic grids have `n` distinct nodes covering [x_lo, x_hi) with
/// Δx = (x_hi − x_lo)/n; outflow grids include both ends with
/// Δx = (x_hi − x_lo)/(n − 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub x_lo: f64,
    pub dx: f64,
    pub boundary: Boundary,
    pub t: f64,
    /// Number of steps taken to reach this level.
    pub steps: usize,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
}

impl GridState {
    pub fn new(x_lo: f64, x_hi: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Grid(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(x_hi > x_lo) {
            return Err(Error::Grid(format!("empty interval [{x_lo}, {x_hi}]")));
        }
        let dx = match boundary {
            Boundary::Periodic => (x_hi - x_lo) / n as f64,
            Boundary::Outflow => (x_hi - x_lo) / (n - 1) as f64,
        };
        Ok(GridState {
            x_lo,
            dx,
            boundary,
            t: 0.0,
            steps: 0,
            h: vec![0.0; n],
            u: vec![0.0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.x(i)).collect()
    }

    pub fn x_hi(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.x_lo + self.n() as f64 * self.dx,
            Boundary::Outflow => self.x(self.n() - 1),
        }
    }

    pub fn length(&self) -> f64 {
        self.x_hi() - self.x_lo
    }
}

//! MacCormack predictor–corrector stepping for the quasilinear system
//! h_t + c(h, μ)·u_x = 0, u_t + (p(h, μ))_x = 0.
//!
//! The momentum equation differences the nodal pressure directly, so p_x
//! already carries c·h_x + p_μ and a stationary state with constant p is
//! preserved up to rounding.

use rayon::prelude::*;

use super::grid::{Boundary, GridState};
use crate::coords::Chart;
use crate::error::{Error, Result};

pub const MAX_CFL: f64 = 0.9;

/// Direction of the one-sided difference used in a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Forward,
    Backward,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Forward => Side::Backward,
            Side::Backward => Side::Forward,
        }
    }

    /// Predictor direction for a given step count; alternating removes the
    /// directional bias of a fixed ordering.
    pub fn for_step(steps: usize) -> Side {
        if steps % 2 == 0 {
            Side::Forward
        } else {
            Side::Backward
        }
    }
}

/// First-order one-sided difference. Non-periodic ends use a linearly
/// extrapolated ghost value, which makes the end difference copy its
/// neighbour.
pub fn one_sided(f: &[f64], dx: f64, side: Side, boundary: Boundary) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    match (side, boundary) {
        (Side::Forward, Boundary::Periodic) => {
            for i in 0..n {
                d[i] = (f[(i + 1) % n] - f[i]) / dx;
            }
        }
        (Side::Backward, Boundary::Periodic) => {
            for i in 0..n {
                d[i] = (f[i] - f[(i + n - 1) % n]) / dx;
            }
        }
        (Side::Forward, Boundary::Outflow) => {
            for i in 0..n - 1 {
                d[i] = (f[i + 1] - f[i]) / dx;
            }
            d[n - 1] = d[n - 2];
        }
        (Side::Backward, Boundary::Outflow) => {
            for i in 1..n {
                d[i] = (f[i] - f[i - 1]) / dx;
            }
            d[0] = d[1];
        }
    }
    d
}

/// A semi-discrete system advanced by [`maccormack`].
pub trait Evolution: Sync {
    /// Time derivatives of every field using one-sided differences on `side`.
    fn rates(&self, t: f64, fields: &[Vec<f64>], side: Side) -> Result<Vec<Vec<f64>>>;

    /// Largest characteristic speed over the nodes.
    fn max_speed(&self, t: f64, fields: &[Vec<f64>]) -> Result<f64>;
}

pub fn check_finite(fields: &[Vec<f64>], t: f64) -> Result<()> {
    for f in fields {
        if let Some(node) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical { node, t });
        }
    }
    Ok(())
}

/// One predictor–corrector step of size `dt`.
pub fn maccormack<S: Evolution + ?Sized>(
    sys: &S,
    t: f64,
    fields: &[Vec<f64>],
    dt: f64,
    first: Side,
) -> Result<Vec<Vec<f64>>> {
    let k1 = sys.rates(t, fields, first)?;
    let pred: Vec<Vec<f64>> = fields
        .iter()
        .zip(&k1)
        .map(|(f, k)| f.iter().zip(k).map(|(a, b)| a + dt * b).collect())
        .collect();
    check_finite(&pred, t + dt)?;
    let k2 = sys.rates(t + dt, &pred, first.flip())?;
    let next: Vec<Vec<f64>> = fields
        .iter()
        .zip(pred.iter().zip(&k2))
        .map(|(f, (p, k))| {
            f.iter()
                .zip(p.iter().zip(k))
                .map(|(a, (b, r))| 0.5 * (a + b + dt * r))
                .collect()
        })
        .collect();
    check_finite(&next, t + dt)?;
    Ok(next)
}

pub fn check_cfl(cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= MAX_CFL) {
        return Err(Error::Grid(format!("cfl must lie in (0, {MAX_CFL}], got {cfl}")));
    }
    Ok(())
}

/// The wave system on a uniform grid for a given chart.
pub struct WaveSystem<'a> {
    pub chart: &'a Chart,
    pub x_lo: f64,
    pub dx: f64,
    pub boundary: Boundary,
}

impl<'a> WaveSystem<'a> {
    pub fn for_state(chart: &'a Chart, state: &GridState) -> Self {
        WaveSystem {
            chart,
            x_lo: state.x_lo,
            dx: state.dx,
            boundary: state.boundary,
        }
    }

    /// Nodal pressure and wavespeed, with admissible-set exits reported
    /// against the offending node.
    pub fn pressure_and_speed(&self, t: f64, h: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(node) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical { node, t });
        }
        let law = self.chart.law();
        let pc: Vec<(f64, f64)> = h
            .par_iter()
            .enumerate()
            .map(|(i, &hi)| {
                let x = self.x_lo + i as f64 * self.dx;
                let d = self
                    .chart
                    .v_of_h(hi, x)
                    .and_then(|v| law.eval(v, x))
                    .map_err(|e| Error::DomainExit {
                        node: i,
                        t,
                        reason: e.to_string(),
                    })?;
                Ok((d.p, d.c))
            })
            .collect::<Result<_>>()?;
        Ok(pc.into_iter().unzip())
    }
}

impl Evolution for WaveSystem<'_> {
    fn rates(&self, t: f64, fields: &[Vec<f64>], side: Side) -> Result<Vec<Vec<f64>>> {
        let (h, u) = (&fields[0], &fields[1]);
        let (p, c) = self.pressure_and_speed(t, h)?;
        let du = one_sided(u, self.dx, side, self.boundary);
        let dp = one_sided(&p, self.dx, side, self.boundary);
        let h_t = c.iter().zip(&du).map(|(c, d)| -c * d).collect();
        let u_t = dp.iter().map(|d| -d).collect();
        Ok(vec![h_t, u_t])
    }

    fn max_speed(&self, t: f64, fields: &[Vec<f64>]) -> Result<f64> {
        let (_, c) = self.pressure_and_speed(t, &fields[0])?;
        Ok(c.into_iter().fold(0.0, f64::max))
    }
}

/// Stable step size cfl·Δx / max c.
pub fn time_step(state: &GridState, chart: &Chart, cfl: f64) -> Result<f64> {
    check_cfl(cfl)?;
    let sys = WaveSystem::for_state(chart, state);
    let c = sys.max_speed(state.t, &[state.h.clone()])?;
    Ok(cfl * state.dx / c)
}

/// Advance by one step of size cfl·Δx/max c.
pub fn step(state: &GridState, chart: &Chart, cfl: f64) -> Result<GridState> {
    let dt = time_step(state, chart, cfl)?;
    step_by(state, chart, dt)
}

/// Advance by a prescribed `dt`.
pub fn step_by(state: &GridState, chart: &Chart, dt: f64) -> Result<GridState> {
    let sys = WaveSystem::for_state(chart, state);
    let fields = [state.h.clone(), state.u.clone()];
    let mut next = maccormack(&sys, state.t, &fields, dt, Side::for_step(state.steps))?;
    let u = next.pop().unwrap_or_default();
    let h = next.pop().unwrap_or_default();
    // Catch exits caused by the final update, not only by the stages.
    sys.pressure_and_speed(state.t + dt, &h)?;
    Ok(GridState {
        t: state.t + dt,
        steps: state.steps + 1,
        h,
        u,
        ..state.clone()
    })
}

/// Step until `t_end`, shortening the last step to land on it.
pub fn advance_to(state: &GridState, chart: &Chart, cfl: f64, t_end: f64) -> Result<GridState> {
    let mut s = state.clone();
    while s.t < t_end {
        let dt = time_step(&s, chart, cfl)?.min(t_end - s.t);
        s = step_by(&s, chart, dt)?;
    }
    Ok(s)
}

//! Characteristic tracing through a stored solution history, with the
//! gradient variables and Riccati coefficients sampled along each path.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Boundary, GridState};
use super::scheme::WaveSystem;
use crate::coords::Chart;
use crate::error::{Error, Result};
use crate::gradients::{alpha_beta, y_q};
use crate::numerics::fd::{derivative, interp_cubic};
use crate::riccati::{alpha_prime, beta_backprime, coefficients_at, Branch};

/// Spatial interpolation order used for all sampled quantities.
pub const INTERPOLATION_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    /// Position, wrapped into the grid interval on periodic grids.
    pub x: f64,
    pub c: f64,
    pub h: f64,
    /// y on forward paths, q on backward paths.
    pub yq: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// (yq)′ − (a₀ ± a₁·yq − a₂·yq²) with the time derivative taken along
    /// the samples.
    pub residual: f64,
    /// Same check for α′ (forward) or β‵ (backward) against the
    /// right-hand side in α, β form.
    pub alpha_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicTrace {
    pub family: Branch,
    pub x0: f64,
    pub interpolation_order: usize,
    pub samples: Vec<TraceSample>,
    /// Why the path ended before the last stored level, if it did.
    pub truncated: Option<String>,
}

impl CharacteristicTrace {
    /// Samples whose time derivative used the centered three-point formula.
    pub fn interior(&self) -> &[TraceSample] {
        match self.samples.len() {
            0..=2 => &[],
            m => &self.samples[1..m - 1],
        }
    }

    /// max |residual| over interior samples.
    pub fn max_residual(&self) -> f64 {
        self.interior().iter().map(|s| s.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_alpha_residual(&self) -> f64 {
        self.interior().iter().map(|s| s.alpha_residual.abs()).fold(0.0, f64::max)
    }

    /// (inf a₂, sup a₂) over the samples.
    pub fn a2_range(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.a2), hi.max(s.a2)))
    }
}

/// Per-level nodal data shared by all paths.
struct LevelData {
    c: Vec<f64>,
    u_x: Vec<f64>,
    h_x: Vec<f64>,
}

fn level_data(chart: &Chart, state: &GridState) -> Result<LevelData> {
    let sys = WaveSystem::for_state(chart, state);
    let (_, c) = sys.pressure_and_speed(state.t, &state.h)?;
    Ok(LevelData {
        c,
        u_x: derivative(&state.u, state.dx, state.boundary)?,
        h_x: derivative(&state.h, state.dx, state.boundary)?,
    })
}

struct Walker {
    family: Branch,
    x0: f64,
    /// Unwrapped position.
    x: f64,
    samples: Vec<TraceSample>,
    truncated: Option<String>,
}

fn interp(f: &[f64], s: &GridState, x: f64) -> Option<f64> {
    interp_cubic(f, s.x_lo, s.dx, x, s.boundary)
}

fn wrap(s: &GridState, x: f64) -> f64 {
    match s.boundary {
        Boundary::Periodic => s.x_lo + (x - s.x_lo).rem_euclid(s.length()),
        Boundary::Outflow => x,
    }
}

fn sample(chart: &Chart, s: &GridState, d: &LevelData, family: Branch, x: f64) -> Result<Option<TraceSample>> {
    let (Some(h), Some(u_x), Some(h_x)) = (interp(&s.h, s, x), interp(&d.u_x, s, x), interp(&d.h_x, s, x)) else {
        return Ok(None);
    };
    let xw = wrap(s, x);
    let p = chart.point_h(h, xw)?;
    let f = chart.integrating_factor(h, xw)?;
    let k = coefficients_at(&p, &f, chart.h0())?;
    let c = p.c();
    let (alpha, beta) = alpha_beta(u_x, h_x, p.p_mu, c);
    let (y, q) = y_q(alpha, beta, c, f.value);
    Ok(Some(TraceSample {
        t: s.t,
        x: xw,
        c,
        h,
        yq: if family == Branch::Forward { y } else { q },
        alpha,
        beta,
        a0: k.a0,
        a1: k.a1,
        a2: k.a2,
        residual: 0.0,
        alpha_residual: 0.0,
    }))
}

/// RK4 for dx/dt = ±c from level `a` to level `b`, with c interpolated
/// cubically in space and linearly in time.
fn advance(family: Branch, x: f64, a: (&GridState, &LevelData), b: (&GridState, &LevelData)) -> Option<f64> {
    let (sa, da) = a;
    let (sb, db) = b;
    let dt = sb.t - sa.t;
    let sign = family.sign();
    let speed = |x: f64, theta: f64| -> Option<f64> {
        let ca = interp(&da.c, sa, x)?;
        let cb = interp(&db.c, sb, x)?;
        Some(sign * ((1.0 - theta) * ca + theta * cb))
    };
    let k1 = speed(x, 0.0)?;
    let k2 = speed(x + 0.5 * dt * k1, 0.5)?;
    let k3 = speed(x + 0.5 * dt * k2, 0.5)?;
    let k4 = speed(x + dt * k3, 1.0)?;
    Some(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Derivative at each sample from the quadratic through it and its
/// neighbours (one-sided at the ends).
pub fn sample_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 3 {
        return vec![f64::NAN; n];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let h0 = t[k] - t[k - 1];
        let h1 = t[k + 1] - t[k];
        d[k] = (h0 * h0 * y[k + 1] - h1 * h1 * y[k - 1] + (h1 * h1 - h0 * h0) * y[k]) / (h0 * h1 * (h0 + h1));
    }
    let end = |h0: f64, h1: f64, y0: f64, y1: f64, y2: f64| {
        -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y0 + (h0 + h1) / (h0 * h1) * y1 - h0 / (h1 * (h0 + h1)) * y2
    };
    d[0] = end(t[1] - t[0], t[2] - t[1], y[0], y[1], y[2]);
    d[n - 1] = -end(
        t[n - 1] - t[n - 2],
        t[n - 2] - t[n - 3],
        y[n - 1],
        y[n - 2],
        y[n - 3],
    );
    d
}

fn fill_residuals(chart: &Chart, tr: &mut CharacteristicTrace) -> Result<()> {
    let t: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
    let w: Vec<f64> = tr.samples.iter().map(|s| s.yq).collect();
    let ab: Vec<f64> = tr
        .samples
        .iter()
        .map(|s| if tr.family == Branch::Forward { s.alpha } else { s.beta })
        .collect();
    let dw = sample_derivative(&t, &w);
    let dab = sample_derivative(&t, &ab);
    let sign = tr.family.sign();
    for (k, s) in tr.samples.iter_mut().enumerate() {
        s.residual = dw[k] - (s.a0 + sign * s.a1 * s.yq - s.a2 * s.yq * s.yq);
        let p = chart.point_h(s.h, s.x)?;
        let rhs = match tr.family {
            Branch::Forward => alpha_prime(&p, s.alpha, s.beta),
            Branch::Backward => beta_backprime(&p, s.alpha, s.beta),
        };
        s.alpha_residual = dab[k] - rhs;
    }
    Ok(())
}

/// Trace several characteristics through the same history. Levels must be
/// strictly increasing in time and share one grid.
pub fn trace_many(chart: &Chart, history: &[GridState], seeds: &[(f64, Branch)]) -> Result<Vec<CharacteristicTrace>> {
    let Some(first) = history.first() else {
        return Err(Error::Grid("empty solution history".into()));
    };
    for w in history.windows(2) {
        if !(w[1].t > w[0].t) || w[1].n() != w[0].n() {
            return Err(Error::Grid("history levels must share a grid and increase in time".into()));
        }
    }
    let mut walkers: Vec<Walker> = seeds
        .iter()
        .map(|&(x0, family)| {
            let inside = x0 >= first.x_lo && x0 <= first.x_hi();
            Walker {
                family,
                x0,
                x: x0,
                samples: Vec::new(),
                truncated: if inside {
                    None
                } else {
                    Some(format!("seed {x0} is outside the grid"))
                },
            }
        })
        .collect();
    let mut data = level_data(chart, first)?;
    for k in 0..history.len() {
        let s = &history[k];
        let next = match history.get(k + 1) {
            Some(n) => Some((n, level_data(chart, n)?)),
            None => None,
        };
        walkers.par_iter_mut().try_for_each(|w| -> Result<()> {
            if w.truncated.is_some() {
                return Ok(());
            }
            match sample(chart, s, &data, w.family, w.x)? {
                Some(smp) => w.samples.push(smp),
                None => {
                    w.truncated = Some(format!("left the grid at t = {}", s.t));
                    return Ok(());
                }
            }
            if let Some((ns, nd)) = &next {
                match advance(w.family, w.x, (s, &data), (ns, nd)) {
                    Some(x) => w.x = x,
                    None => w.truncated = Some(format!("left the grid at t = {}", s.t)),
                }
            }
            Ok(())
        })?;
        if let Some((_, nd)) = next {
            data = nd;
        }
    }
    walkers
        .into_par_iter()
        .map(|w| {
            let mut tr = CharacteristicTrace {
                family: w.family,
                x0: w.x0,
                interpolation_order: INTERPOLATION_ORDER,
                samples: w.samples,
                truncated: w.truncated,
            };
            fill_residuals(chart, &mut tr)?;
            Ok(tr)
        })
        .collect()
}

pub fn trace_characteristic(
    chart: &Chart,
    history: &[GridState],
    x0: f64,
    family: Branch,
) -> Result<CharacteristicTrace> {
    let mut v = trace_many(chart, history, &[(x0, family)])?;
    Ok(v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{PowerLaw, PressureLaw, ValidityDomain};
    use crate::solver::scheme::step;
    use std::sync::Arc;

    fn iso_chart() -> Chart {
        let dom = ValidityDomain::new(0.2, 5.0, -1.0, 2.0).unwrap();
        let law: Arc<dyn PressureLaw> = Arc::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap());
        Chart::new(law).unwrap()
    }

    fn history(chart: &Chart, s: GridState, steps: usize) -> Vec<GridState> {
        let mut h = vec![s];
        for _ in 0..steps {
            let n = step(h.last().unwrap(), chart, 0.8).unwrap();
            h.push(n);
        }
        h
    }

    #[test]
    fn sample_derivative_is_exact_for_quadratics() {
        let t = [0.0, 0.1, 0.25, 0.3, 0.5];
        let y: Vec<f64> = t.iter().map(|t| 1.0 + 2.0 * t - 3.0 * t * t).collect();
        let d = sample_derivative(&t, &y);
        for (k, tk) in t.iter().enumerate() {
            assert!((d[k] - (2.0 - 6.0 * tk)).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn constant_state_path_is_straight() {
        let chart = iso_chart();
        let mut s = GridState::new(0.0, 1.0, 64, Boundary::Periodic).unwrap();
        s.h.fill(2.0 * 2f64.sqrt());
        let c0 = 2f64.sqrt();
        let hist = history(&chart, s, 40);
        let tr = trace_many(&chart, &hist, &[(0.3, Branch::Forward), (0.3, Branch::Backward)]).unwrap();
        for (tr, sign) in tr.iter().zip([1.0, -1.0]) {
            assert!(tr.truncated.is_none());
            for smp in &tr.samples {
                let expect = 0.3 + sign * c0 * smp.t;
                let expect = expect.rem_euclid(1.0);
                let d = (smp.x - expect).abs();
                assert!(d.min(1.0 - d) <= 1e-10, "{} {}", smp.x, expect);
            }
        }
    }

    #[test]
    fn outflow_paths_are_truncated() {
        let chart = iso_chart();
        let mut s = GridState::new(0.0, 1.0, 33, Boundary::Outflow).unwrap();
        s.h.fill(2.0 * 2f64.sqrt());
        let hist = history(&chart, s, 60);
        let tr = trace_characteristic(&chart, &hist, 0.9, Branch::Forward).unwrap();
        assert!(tr.truncated.is_some());
        assert!(tr.samples.len() < hist.len());
    }

    #[test]
    fn simple_wave_reciprocal_grows_at_rate_a2() {
        use crate::solver::initial::{build, Family, GridSpec, InitialData, Shape, Strength};
        let chart = iso_chart();
        let grid = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            n: 256,
            boundary: Boundary::Periodic,
        };
        let data = InitialData {
            shape: Shape::Sine {
                wavenumber: 1.0,
                phase: 0.0,
            },
            family: Family::Forward,
            strength: Strength::Amplitude(0.05),
            v_ref: 1.0,
            x_ref: None,
        };
        let (s, _) = build(&chart, &grid, &data).unwrap();
        let hist = history(&chart, s, 60);
        let tr = trace_characteristic(&chart, &hist, 0.5, Branch::Forward).unwrap();
        let t: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
        let inv: Vec<f64> = tr.samples.iter().map(|s| 1.0 / s.yq).collect();
        let d = sample_derivative(&t, &inv);
        for (k, smp) in tr.samples.iter().enumerate() {
            assert!((d[k] - smp.a2).abs() < 1e-3, "{} {}", d[k], smp.a2);
            assert_eq!(smp.a0, 0.0);
            assert_eq!(smp.a1, 0.0);
        }
    }

    #[test]
    fn rejects_non_increasing_history() {
        let chart = iso_chart();
        let mut s = GridState::new(0.0, 1.0, 32, Boundary::Periodic).unwrap();
        s.h.fill(2.0);
        assert!(trace_many(&chart, &[s.clone(), s], &[(0.5, Branch::Forward)]).is_err());
        assert!(trace_many(&chart, &[], &[(0.5, Branch::Forward)]).is_err());
    }
}

//! Initial data: smooth perturbations of a stationary state u ≡ 0,
//! p(h(x), x) ≡ p*.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{Boundary, GridState};
use crate::coords::Chart;
use crate::error::{Error, Result};
use crate::gradients::compute_field;
use crate::numerics::roots::brent;

/// Perturbation profile φ(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// No perturbation.
    Flat,
    /// sin(2πk(x − x_lo)/L + phase); k should be an integer on periodic grids.
    Sine { wavenumber: f64, phase: f64 },
    Gaussian { center: f64, width: f64 },
    Tanh { center: f64, width: f64 },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Flat => "flat",
            Shape::Sine { .. } => "sine",
            Shape::Gaussian { .. } => "gaussian",
            Shape::Tanh { .. } => "tanh",
        }
    }

    pub fn eval(&self, x: f64, x_lo: f64, length: f64) -> f64 {
        match *self {
            Shape::Flat => 0.0,
            Shape::Sine { wavenumber, phase } => (2.0 * PI * wavenumber * (x - x_lo) / length + phase).sin(),
            Shape::Gaussian { center, width } => (-((x - center) / width).powi(2)).exp(),
            Shape::Tanh { center, width } => ((x - center) / width).tanh(),
        }
    }
}

/// Which wave family the perturbation excites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// u = εφ, h = h̄ + εφ: right-moving (u − h unchanged).
    Forward,
    /// u = −εφ, h = h̄ + εφ: left-moving (u + h unchanged).
    Backward,
    /// u = εφ, h = h̄: splits into both families.
    Velocity,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Forward => "forward",
            Family::Backward => "backward",
            Family::Velocity => "velocity",
        }
    }
}

/// How the perturbation size is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Amplitude(f64),
    /// Solve for the amplitude giving this min over x of y.
    MinY(f64),
    /// Solve for the amplitude giving this min over x of q.
    MinQ(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn empty_state(&self) -> Result<GridState> {
        GridState::new(self.x_lo, self.x_hi, self.n, self.boundary)
    }

    pub fn refined(&self, factor: usize) -> GridSpec {
        let n = match self.boundary {
            Boundary::Periodic => self.n * factor,
            Boundary::Outflow => (self.n - 1) * factor + 1,
        };
        GridSpec { n, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub shape: Shape,
    pub family: Family,
    pub strength: Strength,
    /// Background specific volume at `x_ref`; fixes p*.
    pub v_ref: f64,
    /// Defaults to the left end of the grid.
    pub x_ref: Option<f64>,
}

/// Specific volume with p(v, x) = p*, by Brent's method over the law's
/// v-range.
pub fn stationary_volume(chart: &Chart, p_star: f64, x: f64) -> Result<f64> {
    let law = chart.law();
    let dom = law.domain();
    let g = |v: f64| law.kernel(v, x).p - p_star;
    let (g_lo, g_hi) = (g(dom.v_min), g(dom.v_max));
    if !(g_lo >= 0.0 && g_hi <= 0.0) {
        return Err(Error::Model(format!(
            "no stationary state with p = {p_star} at x = {x} inside v ∈ [{}, {}]",
            dom.v_min, dom.v_max
        )));
    }
    brent(g, dom.v_min, dom.v_max, 1e-15, 200)
}

/// State with u ≡ 0 and constant pressure p(v_ref, x_ref).
pub fn stationary_state(chart: &Chart, grid: &GridSpec, v_ref: f64, x_ref: Option<f64>) -> Result<GridState> {
    let mut s = grid.empty_state()?;
    let x_ref = x_ref.unwrap_or(grid.x_lo);
    let p_star = chart.law().eval(v_ref, x_ref)?.p;
    for i in 0..s.n() {
        let x = s.x(i);
        let v = stationary_volume(chart, p_star, x)?;
        s.h[i] = chart.h_of_v(v, x)?;
    }
    Ok(s)
}

pub fn perturb(base: &GridState, shape: &Shape, family: Family, amplitude: f64) -> GridState {
    let mut s = base.clone();
    let length = base.length();
    for i in 0..s.n() {
        let phi = amplitude * shape.eval(s.x(i), s.x_lo, length);
        match family {
            Family::Forward => {
                s.u[i] += phi;
                s.h[i] += phi;
            }
            Family::Backward => {
                s.u[i] -= phi;
                s.h[i] += phi;
            }
            Family::Velocity => s.u[i] += phi,
        }
    }
    s
}

/// (min y, min q) of a snapshot.
pub fn min_yq(chart: &Chart, state: &GridState) -> Result<(f64, f64)> {
    let f = compute_field(chart, state)?;
    Ok((f.min_y().1, f.min_q().1))
}

/// Amplitude ε > 0 for which the selected minimum hits `target`.
pub fn solve_amplitude(
    chart: &Chart,
    base: &GridState,
    shape: &Shape,
    family: Family,
    target: f64,
    use_q: bool,
) -> Result<f64> {
    let g = |eps: f64| -> Result<f64> {
        let (y, q) = min_yq(chart, &perturb(base, shape, family, eps))?;
        Ok(if use_q { q } else { y } - target)
    };
    let g0 = g(0.0)?;
    if g0 == 0.0 {
        return Ok(0.0);
    }
    let scale = base.h.iter().fold(0.0f64, |m, h| m.max(h.abs())).max(1.0);
    let mut lo = 0.0;
    let mut hi = 1e-3 * scale;
    loop {
        let unreachable = || {
            Error::Model(format!(
                "target {target} is not reachable by scaling the {} perturbation inside the admissible set",
                shape.name()
            ))
        };
        let ghi = g(hi).map_err(|_| unreachable())?;
        if ghi.signum() != g0.signum() {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 * scale {
            return Err(unreachable());
        }
    }
    let tol = 1e-14 * hi;
    brent(|e| g(e).unwrap_or(f64::NAN), lo, hi, tol, 200)
}

/// Build the perturbed state and report the amplitude used.
pub fn build(chart: &Chart, grid: &GridSpec, data: &InitialData) -> Result<(GridState, f64)> {
    let base = stationary_state(chart, grid, data.v_ref, data.x_ref)?;
    let eps = match data.strength {
        Strength::Amplitude(a) => a,
        Strength::MinY(t) => solve_amplitude(chart, &base, &data.shape, data.family, t, false)?,
        Strength::MinQ(t) => solve_amplitude(chart, &base, &data.shape, data.family, t, true)?,
    };
    let s = perturb(&base, &data.shape, data.family, eps);
    // Surface admissibility problems here rather than in the first step.
    for i in 0..s.n() {
        chart.v_of_h(s.h[i], s.x(i))?;
    }
    Ok((s, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{make_mhd_law, PowerLaw, PressureLaw, Profile, ValidityDomain};
    use std::sync::Arc;

    fn mhd_chart() -> Chart {
        let dom = ValidityDomain::new(0.2, 5.0, -0.1, 7.0).unwrap();
        let b = Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1.0,
            phase: 0.0,
        };
        let law: Arc<dyn PressureLaw> = Arc::new(make_mhd_law(b, dom).unwrap());
        Chart::new(law).unwrap()
    }

    #[test]
    fn stationary_pressure_is_constant() {
        let chart = mhd_chart();
        let grid = GridSpec {
            x_lo: 0.0,
            x_hi: 2.0 * PI,
            n: 64,
            boundary: Boundary::Periodic,
        };
        let s = stationary_state(&chart, &grid, 1.0, None).unwrap();
        let p0 = chart.law().eval(1.0, 0.0).unwrap().p;
        for i in 0..s.n() {
            let v = chart.v_of_h(s.h[i], s.x(i)).unwrap();
            let p = chart.law().eval(v, s.x(i)).unwrap().p;
            assert!((p - p0).abs() <= 2e-15 * p0, "{p} {p0}");
        }
        assert!(s.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn forward_family_keeps_backward_invariant() {
        let dom = ValidityDomain::new(0.2, 5.0, -1.0, 2.0).unwrap();
        let law: Arc<dyn PressureLaw> = Arc::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let grid = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            n: 64,
            boundary: Boundary::Periodic,
        };
        let base = stationary_state(&chart, &grid, 1.0, None).unwrap();
        let shape = Shape::Sine {
            wavenumber: 1.0,
            phase: 0.0,
        };
        let s = perturb(&base, &shape, Family::Forward, 0.1);
        let r0 = s.u[0] - s.h[0];
        assert!(s.u.iter().zip(&s.h).all(|(u, h)| (u - h - r0).abs() < 1e-14));
        let f = compute_field(&chart, &s).unwrap();
        assert!(f.beta.iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn amplitude_hits_target() {
        let dom = ValidityDomain::new(0.2, 5.0, -1.0, 2.0).unwrap();
        let law: Arc<dyn PressureLaw> = Arc::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let grid = GridSpec {
            x_lo: 0.0,
            x_hi: 1.0,
            n: 128,
            boundary: Boundary::Periodic,
        };
        let data = InitialData {
            shape: Shape::Sine {
                wavenumber: 1.0,
                phase: 0.0,
            },
            family: Family::Forward,
            strength: Strength::MinY(-2.0),
            v_ref: 1.0,
            x_ref: None,
        };
        let (s, eps) = build(&chart, &grid, &data).unwrap();
        assert!(eps > 0.0);
        let (y, _) = min_yq(&chart, &s).unwrap();
        assert!((y + 2.0).abs() < 1e-10, "{y}");
    }

    #[test]
    fn unreachable_target_is_reported() {
        let chart = mhd_chart();
        let grid = GridSpec {
            x_lo: 0.0,
            x_hi: 2.0 * PI,
            n: 32,
            boundary: Boundary::Periodic,
        };
        let data = InitialData {
            shape: Shape::Sine {
                wavenumber: 1.0,
                phase: 0.0,
            },
            family: Family::Forward,
            strength: Strength::MinY(-1e6),
            v_ref: 1.0,
            x_ref: None,
        };
        assert!(matches!(build(&chart, &grid, &data), Err(Error::Model(_))));
    }

    #[test]
    fn refined_grid_keeps_spacing_ratio() {
        let g = GridSpec {
            x_lo: -1.0,
            x_hi: 1.0,
            n: 101,
            boundary: Boundary::Outflow,
        };
        let r = g.refined(2);
        assert_eq!(r.n, 201);
        let a = g.empty_state().unwrap();
        let b = r.empty_state().unwrap();
        assert!((a.dx - 2.0 * b.dx).abs() < 1e-15);
    }
}

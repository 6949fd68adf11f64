//! Time integration with per-step gradient monitoring, history storage and
//! the blowup report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blowup::{detect_blowup, refinement_agrees, BlowupReport, GradientSample, RcAudit, DEFAULT_CUT};
use super::grid::{Boundary, GridState};
use super::initial::{build, GridSpec, InitialData, Strength};
use super::scheme::{check_cfl, step_by, time_step};
use super::trace::{trace_characteristic, CharacteristicTrace};
use crate::coords::{Chart, ChartPoint};
use crate::error::{Error, Result};
use crate::gradients::{alpha_beta, compute_field, rc_transition_sign, GradientField};
use crate::numerics::fd::{derivative, interp_cubic};
use crate::riccati::{coefficients_at, lifespan_bound, threshold_n, Branch, CoefficientBounds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub cfl: f64,
    pub t_max: f64,
    pub blowup_cut: f64,
    /// Store every k-th step in the history (plus the first and last).
    pub store_every: usize,
    pub max_steps: usize,
    pub nu: f64,
    pub confirm_refinement: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            cfl: 0.8,
            t_max: 1.0,
            blowup_cut: DEFAULT_CUT,
            store_every: 1,
            max_steps: 10_000_000,
            nu: 0.01,
            confirm_refinement: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FinalTime,
    Blowup,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub levels: Vec<GridState>,
    pub gradients: Vec<GradientSample>,
    pub t_obs: Option<f64>,
    /// Riccati coefficient extremes over every node of every stored level.
    pub bounds: CoefficientBounds,
    pub rc_audit: RcAudit,
    pub stopped: StopReason,
}

impl RunRecord {
    pub fn last(&self) -> &GridState {
        self.levels.last().expect("history always holds the initial level")
    }

    /// Largest monitored gradient relative to its initial value.
    pub fn growth_ratio(&self) -> f64 {
        let g0 = self.gradients[0].max_gradient;
        self.gradients.iter().map(|g| g.max_gradient).fold(0.0, f64::max) / g0
    }
}

/// Per-step diagnostics of one level.
struct Monitor {
    max_gradient: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    c: Vec<f64>,
    points: Vec<ChartPoint>,
    /// Per-node difference between 4th- and 2nd-order estimates of u_x and
    /// h_x, summed; both α and β inherit this error.
    noise: Vec<f64>,
}

fn central2(f: &[f64], dx: f64, boundary: Boundary) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| match boundary {
            Boundary::Periodic => (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx),
            Boundary::Outflow => {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (f[b] - f[a]) / ((b - a) as f64 * dx)
            }
        })
        .collect()
}

fn monitor(chart: &Chart, s: &GridState) -> Result<Monitor> {
    let points: Vec<ChartPoint> = (0..s.n())
        .into_par_iter()
        .map(|i| {
            chart.point_h(s.h[i], s.x(i)).map_err(|e| Error::DomainExit {
                node: i,
                t: s.t,
                reason: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let v: Vec<f64> = points.iter().map(|p| p.v).collect();
    let u_x = derivative(&s.u, s.dx, s.boundary)?;
    let h_x = derivative(&s.h, s.dx, s.boundary)?;
    let v_x = derivative(&v, s.dx, s.boundary)?;
    let u2 = central2(&s.u, s.dx, s.boundary);
    let h2 = central2(&s.h, s.dx, s.boundary);
    let n = s.n();
    let mut m = Monitor {
        max_gradient: 0.0,
        alpha: vec![0.0; n],
        beta: vec![0.0; n],
        c: vec![0.0; n],
        points,
        noise: vec![0.0; n],
    };
    for i in 0..n {
        let p = &m.points[i];
        let c = p.c();
        let (a, b) = alpha_beta(u_x[i], h_x[i], p.p_mu, c);
        m.alpha[i] = a;
        m.beta[i] = b;
        m.c[i] = c;
        m.noise[i] = (u_x[i] - u2[i]).abs() + (h_x[i] - h2[i]).abs();
        m.max_gradient = m.max_gradient.max(u_x[i].abs()).max(v_x[i].abs());
    }
    if !m.max_gradient.is_finite() {
        return Err(Error::Numerical { node: 0, t: s.t });
    }
    Ok(m)
}

fn include_level(chart: &Chart, m: &Monitor, s: &GridState, bounds: &mut CoefficientBounds) -> Result<()> {
    let coeffs: Vec<_> = m
        .points
        .par_iter()
        .map(|p| {
            let f = chart.integrating_factor(p.h, p.mu)?;
            coefficients_at(p, &f, chart.h0())
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::DomainExit {
            node: 0,
            t: s.t,
            reason: e.to_string(),
        })?;
    for c in &coeffs {
        bounds.include(c);
    }
    Ok(())
}

/// Compare β at each node with β at the foot of the backward characteristic
/// through it one step earlier; where the sign flips, check the direction of
/// change against sign(α·(p_μ/c)_h).
fn audit(prev: (&GridState, &Monitor), next: (&GridState, &Monitor), audit: &mut RcAudit) {
    let (s0, m0) = prev;
    let (s1, m1) = next;
    let dt = s1.t - s0.t;
    for i in 0..s1.n() {
        let foot = s1.x(i) + m1.c[i] * dt;
        let Some(b0) = interp_cubic(&m0.beta, s0.x_lo, s0.dx, foot, s0.boundary) else {
            continue;
        };
        let b1 = m1.beta[i];
        if !(b0 * b1 < 0.0) {
            continue;
        }
        audit.transitions += 1;
        let predicted = rc_transition_sign(m1.alpha[i], m1.points[i].pmu_c_h);
        let alpha = m1.alpha[i];
        // Expected change of β over the step at a zero of β.
        let change = 0.5 * m1.c[i] * m1.points[i].pmu_c_h * alpha * dt;
        let floor = m0.noise[i].max(m1.noise[i]) + 1e-12 * (b0.abs() + b1.abs());
        if predicted == 0.0 || alpha.abs() <= 10.0 * floor || change.abs() <= floor {
            continue;
        }
        audit.checked += 1;
        if (b1 - b0).signum() == predicted {
            audit.agreed += 1;
        }
    }
}

/// Step size that reaches the final time without a sliver step at the end:
/// when less than two steps remain the remainder is split evenly.
pub(crate) fn final_approach(dt: f64, remaining: f64) -> f64 {
    if remaining <= dt {
        remaining
    } else if remaining < 2.0 * dt {
        0.5 * remaining
    } else {
        dt
    }
}

/// Integrate from `initial` until t_max, the blowup cut, or the step limit.
pub fn evolve(chart: &Chart, initial: GridState, settings: &RunSettings) -> Result<RunRecord> {
    check_cfl(settings.cfl)?;
    if !(settings.t_max >= 0.0) {
        return Err(Error::Grid(format!("t_max must be non-negative, got {}", settings.t_max)));
    }
    let store_every = settings.store_every.max(1);
    let mut bounds = CoefficientBounds::empty();
    let mut mon = monitor(chart, &initial)?;
    include_level(chart, &mon, &initial, &mut bounds)?;
    let mut gradients = vec![GradientSample {
        t: initial.t,
        max_gradient: mon.max_gradient,
    }];
    let mut rc = RcAudit::default();
    let mut cur = initial.clone();
    let mut levels = vec![initial];
    let mut stopped = StopReason::FinalTime;
    let mut t_obs = detect_blowup(&gradients, settings.blowup_cut);
    if t_obs.is_some() {
        stopped = StopReason::Blowup;
    }
    while t_obs.is_none() && cur.t < settings.t_max {
        if cur.steps >= settings.max_steps {
            stopped = StopReason::StepLimit;
            break;
        }
        let dt = final_approach(time_step(&cur, chart, settings.cfl)?, settings.t_max - cur.t);
        let next = step_by(&cur, chart, dt)?;
        let m = monitor(chart, &next)?;
        audit((&cur, &mon), (&next, &m), &mut rc);
        gradients.push(GradientSample {
            t: next.t,
            max_gradient: m.max_gradient,
        });
        t_obs = detect_blowup(&gradients[gradients.len() - 2..], settings.blowup_cut);
        let last = t_obs.is_some() || next.t >= settings.t_max;
        if next.steps % store_every == 0 || last {
            include_level(chart, &m, &next, &mut bounds)?;
            levels.push(next.clone());
        }
        if t_obs.is_some() {
            stopped = StopReason::Blowup;
        }
        cur = next;
        mon = m;
    }
    if levels.last().map(|l| l.steps) != Some(cur.steps) {
        include_level(chart, &mon, &cur, &mut bounds)?;
        levels.push(cur);
    }
    Ok(RunRecord {
        levels,
        gradients,
        t_obs,
        bounds,
        rc_audit: rc,
        stopped,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub initial_field: GradientField,
    pub amplitude: f64,
    pub critical: CharacteristicTrace,
    pub report: BlowupReport,
}

/// Build initial data, integrate, trace the critical characteristic and
/// compare the observed blowup time with the predictions.
pub fn run(chart: &Chart, grid: &GridSpec, data: &InitialData, settings: &RunSettings) -> Result<RunOutcome> {
    let (state, amplitude) = build(chart, grid, data)?;
    let initial_field = compute_field(chart, &state)?;
    let record = evolve(chart, state, settings)?;
    let (iy, y0) = initial_field.min_y();
    let (iq, q0) = initial_field.min_q();
    let s0 = &record.levels[0];
    let (family, m0, x0) = if y0 <= q0 {
        (Branch::Forward, y0, s0.x(iy))
    } else {
        (Branch::Backward, q0, s0.x(iq))
    };
    let critical = trace_characteristic(chart, &record.levels, x0, family)?;
    let (a2_inf, a2_sup) = critical.a2_range();
    let n = threshold_n(&record.bounds, settings.nu)?;
    let t_pred = lifespan_bound(m0, n, record.bounds.inf_a2, settings.nu).ok();
    let bracket = (m0 < 0.0).then(|| (1.0 / (m0.abs() * a2_sup), 1.0 / (m0.abs() * a2_inf)));

    let mut t_obs_refined = None;
    let mut refinement_confirmed = None;
    if let (Some(t), true) = (record.t_obs, settings.confirm_refinement) {
        let fine_data = InitialData {
            strength: Strength::Amplitude(amplitude),
            ..*data
        };
        let fine_settings = RunSettings {
            store_every: usize::MAX,
            ..*settings
        };
        let fine = build(chart, &grid.refined(2), &fine_data).and_then(|(s, _)| evolve(chart, s, &fine_settings));
        t_obs_refined = fine.ok().and_then(|r| r.t_obs);
        refinement_confirmed = Some(t_obs_refined.is_some_and(|tf| refinement_agrees(t, tf)));
    }
    let report = BlowupReport {
        n,
        nu: settings.nu,
        h0: chart.h0(),
        y0_min: y0,
        q0_min: q0,
        x_y0_min: s0.x(iy),
        x_q0_min: s0.x(iq),
        critical_family: match family {
            Branch::Forward => "forward".into(),
            Branch::Backward => "backward".into(),
        },
        a2_inf,
        a2_sup,
        bracket,
        t_pred,
        t_obs: record.t_obs,
        t_obs_refined,
        refinement_confirmed,
        resolution_limited: record.t_obs.is_some() && refinement_confirmed != Some(true),
        cut: settings.blowup_cut,
        initial_max_gradient: record.gradients[0].max_gradient,
        bounds: record.bounds,
        rc_audit: record.rc_audit,
        amplitude,
        steps: record.last().steps,
        t_end: record.last().t,
    };
    Ok(RunOutcome {
        record,
        initial_field,
        amplitude,
        critical,
        report,
    })
}

//! Gradient variables α, β and their integrating-factor forms y, q, the
//! rarefactive/compressive classification, and pointwise identity checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::coords::{Chart, ChartPoint, IntegratingFactor};
use crate::error::{Error, Result};
use crate::numerics::fd::{derivative, interior_range};
use crate::pressure::PressureLaw;
use crate::solver::grid::GridState;

pub fn alpha_beta(u_x: f64, h_x: f64, p_mu: f64, c: f64) -> (f64, f64) {
    let s = h_x + p_mu / c;
    (u_x + s, u_x - s)
}

pub fn y_q(alpha: f64, beta: f64, c: f64, i: f64) -> (f64, f64) {
    let r = c.sqrt();
    (r * alpha - i, r * beta + i)
}

/// Inverse of `y_q`.
pub fn alpha_beta_from_yq(y: f64, q: f64, c: f64, i: f64) -> (f64, f64) {
    let r = c.sqrt();
    ((y + i) / r, (q - i) / r)
}

/// Inverse of `alpha_beta`: (u_x, h_x).
pub fn gradients_from_alpha_beta(alpha: f64, beta: f64, p_mu: f64, c: f64) -> (f64, f64) {
    (0.5 * (alpha + beta), 0.5 * (alpha - beta) - p_mu / c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Character {
    /// rarefactive
    R,
    /// compressive
    C,
    Neutral,
}

impl Character {
    fn of(s: f64) -> Self {
        if s > 0.0 {
            Character::R
        } else if s < 0.0 {
            Character::C
        } else {
            Character::Neutral
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Character::R => "R",
            Character::C => "C",
            Character::Neutral => "N",
        }
    }
}

/// (forward, backward) character from the signs of α and β.
pub fn classify(alpha: f64, beta: f64) -> (Character, Character) {
    (Character::of(alpha), Character::of(beta))
}

/// Chart record and integrating factor at every node of a snapshot.
pub fn node_points(chart: &Chart, state: &GridState) -> Result<Vec<(ChartPoint, IntegratingFactor)>> {
    (0..state.n())
        .into_par_iter()
        .map(|i| {
            let x = state.x(i);
            let p = chart.point_h(state.h[i], x)?;
            let f = chart.integrating_factor(state.h[i], x)?;
            Ok((p, f))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientField {
    pub u_x: Vec<f64>,
    pub h_x: Vec<f64>,
    pub v_x: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub i: Vec<f64>,
    pub y: Vec<f64>,
    pub q: Vec<f64>,
    pub forward: Vec<Character>,
    pub backward: Vec<Character>,
    pub h0: f64,
    #[serde(skip)]
    pub points: Vec<ChartPoint>,
    #[serde(skip)]
    pub factors: Vec<IntegratingFactor>,
}

impl GradientField {
    /// max over nodes of max(|u_x|, |v_x|).
    pub fn max_gradient(&self) -> f64 {
        self.u_x
            .iter()
            .zip(&self.v_x)
            .map(|(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }

    pub fn min_y(&self) -> (usize, f64) {
        argmin(&self.y)
    }

    pub fn min_q(&self) -> (usize, f64) {
        argmin(&self.q)
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, x)| if x < a.1 { (i, x) } else { a })
}

pub fn compute_field(chart: &Chart, state: &GridState) -> Result<GradientField> {
    let pts = node_points(chart, state)?;
    field_from_points(chart, state, pts)
}

pub fn field_from_points(
    chart: &Chart,
    state: &GridState,
    pts: Vec<(ChartPoint, IntegratingFactor)>,
) -> Result<GradientField> {
    let n = state.n();
    let u_x = derivative(&state.u, state.dx, state.boundary)?;
    let h_x = derivative(&state.h, state.dx, state.boundary)?;
    let vs: Vec<f64> = pts.iter().map(|(p, _)| p.v).collect();
    let v_x = derivative(&vs, state.dx, state.boundary)?;
    let mut f = GradientField {
        u_x,
        h_x,
        v_x,
        alpha: vec![0.0; n],
        beta: vec![0.0; n],
        i: vec![0.0; n],
        y: vec![0.0; n],
        q: vec![0.0; n],
        forward: vec![Character::Neutral; n],
        backward: vec![Character::Neutral; n],
        h0: chart.h0(),
        points: Vec::with_capacity(n),
        factors: Vec::with_capacity(n),
    };
    for (k, (p, fac)) in pts.into_iter().enumerate() {
        let c = p.c();
        let (a, b) = alpha_beta(f.u_x[k], f.h_x[k], p.p_mu, c);
        let (y, q) = y_q(a, b, c, fac.value);
        let (fw, bw) = classify(a, b);
        f.alpha[k] = a;
        f.beta[k] = b;
        f.i[k] = fac.value;
        f.y[k] = y;
        f.q[k] = q;
        f.forward[k] = fw;
        f.backward[k] = bw;
        f.points.push(p);
        f.factors.push(fac);
    }
    Ok(f)
}

/// Two-sided bound on max(|α|, |β|) over a snapshot in terms of
/// max(|u_x|), max(|v_x|) and constants of the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientEnvelope {
    pub sup_c: f64,
    pub inf_c: f64,
    /// sup |∂h/∂x̄| + sup |p_μ/c|
    pub offset: f64,
}

impl GradientEnvelope {
    pub fn from_points(pts: &[ChartPoint]) -> Self {
        let mut e = GradientEnvelope {
            sup_c: 0.0,
            inf_c: f64::INFINITY,
            offset: 0.0,
        };
        let mut sup_hx: f64 = 0.0;
        let mut sup_pm: f64 = 0.0;
        for p in pts {
            e.sup_c = e.sup_c.max(p.c());
            e.inf_c = e.inf_c.min(p.c());
            sup_hx = sup_hx.max(p.h_x.abs());
            sup_pm = sup_pm.max((p.p_mu / p.c()).abs());
        }
        e.offset = sup_hx + sup_pm;
        e
    }

    /// (lower, upper) bounds for max(|α|, |β|).
    pub fn bounds(&self, max_ux: f64, max_vx: f64) -> (f64, f64) {
        let lower = max_ux.max(self.inf_c * max_vx - self.offset);
        let upper = max_ux + self.sup_c * max_vx + self.offset;
        (lower, upper)
    }
}

/// How time derivatives are obtained for the directional-derivative check.
#[derive(Debug, Clone, Copy)]
pub enum TimeDerivative<'a> {
    /// From the equations themselves: h_t = −c u_x, u_t = −c h_x − p_μ.
    FromPde,
    /// Centered differences between neighbouring stored levels.
    FromLevels {
        prev: &'a GridState,
        next: &'a GridState,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalResiduals {
    /// max |p′ + c u′|
    pub forward: f64,
    /// max |p‵ − c u‵|
    pub backward: f64,
}

/// Interior maxima of p′ + c·u′ and p‵ − c·u‵, where ′ and ‵ are the
/// derivatives along dx/dt = +c and dx/dt = −c.
pub fn directional_residuals(chart: &Chart, state: &GridState, time: TimeDerivative) -> Result<DirectionalResiduals> {
    let n = state.n();
    if n < 5 {
        return Err(Error::Grid(format!("directional residuals need at least 5 nodes, got {n}")));
    }
    let pts = node_points(chart, state)?;
    let p: Vec<f64> = pts.iter().map(|(q, _)| q.derivs.p).collect();
    let c: Vec<f64> = pts.iter().map(|(q, _)| q.c()).collect();
    let p_x = derivative(&p, state.dx, state.boundary)?;
    let u_x = derivative(&state.u, state.dx, state.boundary)?;
    let (p_t, u_t): (Vec<f64>, Vec<f64>) = match time {
        TimeDerivative::FromPde => {
            let h_x = derivative(&state.h, state.dx, state.boundary)?;
            (0..n)
                .map(|i| {
                    let (pt, _) = &pts[i];
                    (-c[i] * c[i] * u_x[i], -c[i] * h_x[i] - pt.p_mu)
                })
                .unzip()
        }
        TimeDerivative::FromLevels { prev, next } => {
            if prev.n() != n || next.n() != n {
                return Err(Error::Grid("levels differ in node count".into()));
            }
            let dt = next.t - prev.t;
            if !(dt > 0.0) {
                return Err(Error::Grid("levels must be strictly increasing in time".into()));
            }
            let pp = node_points(chart, prev)?;
            let pn = node_points(chart, next)?;
            (0..n)
                .map(|i| {
                    (
                        (pn[i].0.derivs.p - pp[i].0.derivs.p) / dt,
                        (next.u[i] - prev.u[i]) / dt,
                    )
                })
                .unzip()
        }
    };
    let mut r = DirectionalResiduals {
        forward: 0.0,
        backward: 0.0,
    };
    for i in interior_range(n, state.boundary) {
        let fwd_p = p_t[i] + c[i] * p_x[i];
        let fwd_u = u_t[i] + c[i] * u_x[i];
        let bwd_p = p_t[i] - c[i] * p_x[i];
        let bwd_u = u_t[i] - c[i] * u_x[i];
        r.forward = r.forward.max((fwd_p + c[i] * fwd_u).abs());
        r.backward = r.backward.max((bwd_p - c[i] * bwd_u).abs());
    }
    Ok(r)
}

/// Sign of β‵ forced at a point where β = 0: sign(α·(p_μ/c)_h).
pub fn rc_transition_sign(alpha: f64, pmu_c_h: f64) -> f64 {
    let s = alpha * pmu_c_h;
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RcCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

/// (p_x̄/p_v)_v against (2/c)·c_x along a curve with p_x = 0, where
/// v_x = −p_x̄/p_v and c_x = c_v·v_x + c_x̄.
pub fn rc_consistency_check(law: &dyn PressureLaw, v: f64, x: f64) -> Result<RcCheck> {
    let d = law.eval(v, x)?;
    let lhs = (d.p_xv * d.p_v - d.p_x * d.p_vv) / (d.p_v * d.p_v);
    let v_x = -d.p_x / d.p_v;
    let c_x = d.c_v * v_x + d.c_x;
    let rhs = 2.0 / d.c * c_x;
    Ok(RcCheck {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
    })
}

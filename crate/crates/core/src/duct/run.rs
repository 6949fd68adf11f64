//! Lagrangian duct solver on the fields (z, u, x̃), where x̃ is the spatial
//! position of each mass node, plus the consistency checks run on its
//! output.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{duct_alpha_beta, DuctConstants, DuctGradients, DuctNode, DuctProfile};
use crate::coords::Chart;
use crate::error::{Error, Result};
use crate::gradients::alpha_beta;
use crate::numerics::fd::{derivative, interior_range, Boundary};
use crate::numerics::ode::{dopri5, OdeOptions};
use crate::pressure::PowerLaw;
use crate::pressure::Profile;
use crate::pressure::ValidityDomain;
use crate::riccati::{alpha_prime, beta_backprime};
use crate::solver::blowup::{detect_blowup, GradientSample, DEFAULT_CUT};
use crate::solver::grid::MIN_NODES;
use crate::solver::run::{final_approach, StopReason};
use crate::solver::scheme::{check_cfl, maccormack, one_sided, Evolution, Side};

/// Gaussian velocity perturbation in the mass coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityPulse {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl VelocityPulse {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.amplitude * (-s * s).exp()
    }
}

/// One time level on an outflow grid in the mass coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuctState {
    pub x_lo: f64,
    pub dx: f64,
    pub t: f64,
    pub steps: usize,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub m: Vec<f64>,
    pub m_x: Vec<f64>,
    /// Spatial position x̃ of each node.
    pub position: Vec<f64>,
}

impl DuctState {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    pub fn node(&self, profile: &DuctProfile, i: usize) -> DuctNode {
        let (a, a_dot, a_ddot) = profile.eval(self.position[i]);
        DuctNode {
            z: self.z[i],
            m: self.m[i],
            m_x: self.m_x[i],
            u: self.u[i],
            a,
            a_dot,
            a_ddot,
        }
    }

    pub fn vhat(&self, consts: &DuctConstants) -> Vec<f64> {
        self.z.iter().map(|&z| consts.vhat_of_z(z)).collect()
    }

    /// Gradient variables and their characteristic rates at every node.
    pub fn gradients(&self, consts: &DuctConstants, profile: &DuctProfile) -> Result<Vec<DuctGradients>> {
        let u_x = derivative(&self.u, self.dx, Boundary::Outflow)?;
        let z_x = derivative(&self.z, self.dx, Boundary::Outflow)?;
        Ok((0..self.n())
            .map(|i| duct_alpha_beta(consts, &self.node(profile, i), u_x[i], z_x[i]))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuctRunSettings {
    pub cfl: f64,
    pub t_max: f64,
    pub blowup_cut: f64,
    pub store_every: usize,
    pub max_steps: usize,
}

impl Default for DuctRunSettings {
    fn default() -> Self {
        DuctRunSettings {
            cfl: 0.8,
            t_max: 1.0,
            blowup_cut: DEFAULT_CUT,
            store_every: 1,
            max_steps: 10_000_000,
        }
    }
}

/// Problem description: gas, duct shape, mass interval and initial data.
///
/// The initial state has uniform pressure K·volume^{−γ}, entropy
/// `entropy(x)` and velocity `pulse(x)`; node positions follow from
/// dx̃/dx = v̂ starting at `position_lo`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuctRun {
    pub constants: DuctConstants,
    pub profile: DuctProfile,
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub entropy: Profile,
    /// Specific volume a·v̂ where m = 1.
    pub volume: f64,
    pub position_lo: f64,
    pub pulse: VelocityPulse,
}

#[derive(Debug, Clone)]
pub struct DuctHistory {
    pub constants: DuctConstants,
    pub profile: DuctProfile,
    pub levels: Vec<DuctState>,
    /// max(|u_x|, |v̂_x|) after every step.
    pub gradients: Vec<GradientSample>,
    pub t_obs: Option<f64>,
    pub stopped: StopReason,
}

impl DuctHistory {
    pub fn last(&self) -> &DuctState {
        self.levels.last().expect("history always holds the initial level")
    }
}

impl DuctRun {
    pub fn new(gamma: f64, k: f64, cv: f64, profile: DuctProfile, n: usize) -> Result<Self> {
        profile.validate()?;
        Ok(DuctRun {
            constants: DuctConstants::new(gamma, k, cv)?,
            profile,
            x_lo: 0.0,
            x_hi: 2.0,
            n,
            entropy: Profile::constant(0.0),
            volume: 1.0,
            position_lo: 0.0,
            pulse: VelocityPulse {
                amplitude: 0.05,
                center: 1.0,
                width: 0.1,
            },
        })
    }

    pub fn initial_state(&self) -> Result<DuctState> {
        self.profile.validate()?;
        if self.n < MIN_NODES {
            return Err(Error::Grid(format!("grid needs at least {MIN_NODES} nodes, got {}", self.n)));
        }
        if !(self.x_hi > self.x_lo) {
            return Err(Error::Grid(format!("empty interval [{}, {}]", self.x_lo, self.x_hi)));
        }
        if !(self.volume > 0.0) {
            return Err(Error::Model(format!("volume must be positive, got {}", self.volume)));
        }
        let k = &self.constants;
        let dx = (self.x_hi - self.x_lo) / (self.n - 1) as f64;
        let xs: Vec<f64> = (0..self.n).map(|i| self.x_lo + i as f64 * dx).collect();
        let entropy = |x: f64| self.entropy.eval(x);
        let m: Vec<f64> = xs.iter().map(|&x| k.m_of_entropy(entropy(x).0)).collect();
        let m_x: Vec<f64> = xs
            .iter()
            .zip(&m)
            .map(|(&x, &m)| m * entropy(x).1 / (2.0 * k.cv))
            .collect();
        let volume = |x: f64| self.volume * k.m_of_entropy(entropy(x).0).powf(2.0 / k.gamma);
        let profile = self.profile;
        let rhs = |x: f64, y: &[f64], d: &mut [f64]| d[0] = volume(x) / profile.eval(y[0]).0;
        let opts = OdeOptions {
            rtol: 1e-13,
            atol: 1e-14,
            blowup: None,
            ..Default::default()
        };
        let mut position = vec![self.position_lo];
        for i in 1..self.n {
            let traj = dopri5(rhs, xs[i - 1], &[position[i - 1]], xs[i], &opts)?;
            position.push(traj.last().1[0]);
        }
        let mut z = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let a = self.profile.eval(position[i]).0;
            if !(a > 0.0) {
                return Err(Error::Model(format!(
                    "duct area {a} is not positive at x̃ = {}",
                    position[i]
                )));
            }
            z.push(k.z_of_vhat(volume(xs[i]) / a));
        }
        Ok(DuctState {
            x_lo: self.x_lo,
            dx,
            t: 0.0,
            steps: 0,
            u: xs.iter().map(|&x| self.pulse.eval(x)).collect(),
            z,
            m,
            m_x,
            position,
        })
    }

    pub fn evolve(&self, settings: &DuctRunSettings) -> Result<DuctHistory> {
        check_cfl(settings.cfl)?;
        if !(settings.t_max >= 0.0) {
            return Err(Error::Grid(format!("t_max must be non-negative, got {}", settings.t_max)));
        }
        let store_every = settings.store_every.max(1);
        let k = &self.constants;
        let mut cur = self.initial_state()?;
        let mut gradients = vec![GradientSample {
            t: 0.0,
            max_gradient: max_gradient(k, &cur)?,
        }];
        let mut levels = vec![cur.clone()];
        let mut t_obs = detect_blowup(&gradients, settings.blowup_cut);
        let mut stopped = if t_obs.is_some() {
            StopReason::Blowup
        } else {
            StopReason::FinalTime
        };
        while t_obs.is_none() && cur.t < settings.t_max {
            if cur.steps >= settings.max_steps {
                stopped = StopReason::StepLimit;
                break;
            }
            let sys = DuctSystem {
                consts: k,
                profile: &self.profile,
                m: &cur.m,
                dx: cur.dx,
            };
            let fields = [cur.z.clone(), cur.u.clone(), cur.position.clone()];
            let speed = sys.max_speed(cur.t, &fields)?;
            let dt = final_approach(settings.cfl * cur.dx / speed, settings.t_max - cur.t);
            let mut next_fields = maccormack(&sys, cur.t, &fields, dt, Side::for_step(cur.steps))?;
            let t = if settings.t_max - cur.t == dt { settings.t_max } else { cur.t + dt };
            sys.max_speed(t, &next_fields)?;
            let position = next_fields.pop().unwrap();
            let u = next_fields.pop().unwrap();
            let z = next_fields.pop().unwrap();
            let next = DuctState {
                t,
                steps: cur.steps + 1,
                z,
                u,
                position,
                ..cur.clone()
            };
            gradients.push(GradientSample {
                t,
                max_gradient: max_gradient(k, &next)?,
            });
            t_obs = detect_blowup(&gradients[gradients.len() - 2..], settings.blowup_cut);
            if t_obs.is_some() {
                stopped = StopReason::Blowup;
            }
            if next.steps % store_every == 0 || t_obs.is_some() || next.t >= settings.t_max {
                levels.push(next.clone());
            }
            cur = next;
        }
        if levels.last().map(|l| l.steps) != Some(cur.steps) {
            levels.push(cur);
        }
        Ok(DuctHistory {
            constants: *k,
            profile: self.profile,
            levels,
            gradients,
            t_obs,
            stopped,
        })
    }
}

fn max_gradient(consts: &DuctConstants, s: &DuctState) -> Result<f64> {
    let u_x = derivative(&s.u, s.dx, Boundary::Outflow)?;
    let v_x = derivative(&s.vhat(consts), s.dx, Boundary::Outflow)?;
    let g = u_x.iter().chain(&v_x).fold(0.0f64, |g, d| g.max(d.abs()));
    if !g.is_finite() {
        return Err(Error::Numerical { node: 0, t: s.t });
    }
    Ok(g)
}

/// z_t = −K_c z^{(γ+1)/(γ−1)}·u_x, u_t = −a·p_x, x̃_t = u, with the nodal
/// pressure differenced directly so that uniform pressure at rest is kept.
struct DuctSystem<'a> {
    consts: &'a DuctConstants,
    profile: &'a DuctProfile,
    m: &'a [f64],
    dx: f64,
}

impl DuctSystem<'_> {
    fn areas_and_pressures(&self, t: f64, z: &[f64], position: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        (0..z.len())
            .into_par_iter()
            .map(|i| {
                let a = self.profile.eval(position[i]).0;
                if !(z[i] > 0.0 && z[i].is_finite()) {
                    return Err(Error::DomainExit {
                        node: i,
                        t,
                        reason: format!("z = {} is not positive", z[i]),
                    });
                }
                if !(a > 0.0) {
                    return Err(Error::DomainExit {
                        node: i,
                        t,
                        reason: format!("duct area {a} is not positive at x̃ = {}", position[i]),
                    });
                }
                Ok((a, self.consts.pressure(z[i], self.m[i], a)))
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().unzip())
    }
}

impl Evolution for DuctSystem<'_> {
    fn rates(&self, t: f64, fields: &[Vec<f64>], side: Side) -> Result<Vec<Vec<f64>>> {
        let (z, u, position) = (&fields[0], &fields[1], &fields[2]);
        let (a, p) = self.areas_and_pressures(t, z, position)?;
        let u_x = one_sided(u, self.dx, side, Boundary::Outflow);
        let p_x = one_sided(&p, self.dx, side, Boundary::Outflow);
        let power = (self.consts.gamma + 1.0) / (self.consts.gamma - 1.0);
        let z_t = z
            .iter()
            .zip(&u_x)
            .map(|(&z, &d)| -self.consts.k_c * z.powf(power) * d)
            .collect();
        let u_t = a.iter().zip(&p_x).map(|(&a, &d)| -a * d).collect();
        Ok(vec![z_t, u_t, u.clone()])
    }

    fn max_speed(&self, t: f64, fields: &[Vec<f64>]) -> Result<f64> {
        let (a, _) = self.areas_and_pressures(t, &fields[0], &fields[2])?;
        Ok((0..a.len())
            .map(|i| self.consts.sound_speed(fields[0][i], self.m[i], a[i]))
            .fold(0.0, f64::max))
    }
}

/// Maxima of |a_t − uȧ|, |a_x − v̂ȧ|, |(ȧ)_t − uä| and |(ȧ)_x − v̂ä| over
/// interior nodes of interior levels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MetricResiduals {
    pub a_t: f64,
    pub a_x: f64,
    pub a_dot_t: f64,
    pub a_dot_x: f64,
}

impl MetricResiduals {
    pub fn max(&self) -> f64 {
        self.a_t.max(self.a_x).max(self.a_dot_t).max(self.a_dot_x)
    }
}

/// Derivative at the middle of three unevenly spaced samples.
fn middle_derivative(t: [f64; 3], y: [f64; 3]) -> f64 {
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    (h0 * h0 * y[2] - h1 * h1 * y[0] + (h1 * h1 - h0 * h0) * y[1]) / (h0 * h1 * (h0 + h1))
}

fn check_history(h: &DuctHistory) -> Result<()> {
    if h.levels.len() < 3 {
        return Err(Error::Grid(format!(
            "time differences need at least 3 stored levels, got {}",
            h.levels.len()
        )));
    }
    let n = h.levels[0].n();
    if h.levels.iter().any(|l| l.n() != n) {
        return Err(Error::Grid("levels differ in node count".into()));
    }
    if h.levels.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Grid("levels must be strictly increasing in time".into()));
    }
    Ok(())
}

pub fn metric_identities_residual(h: &DuctHistory) -> Result<MetricResiduals> {
    check_history(h)?;
    let shape = |s: &DuctState| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(s.n());
        let mut a_dot = Vec::with_capacity(s.n());
        let mut a_ddot = Vec::with_capacity(s.n());
        for &x in &s.position {
            let (f, d, dd) = h.profile.eval(x);
            a.push(f);
            a_dot.push(d);
            a_ddot.push(dd);
        }
        (a, a_dot, a_ddot)
    };
    let shapes: Vec<_> = h.levels.iter().map(shape).collect();
    let mut r = MetricResiduals::default();
    for k in 1..h.levels.len() - 1 {
        let s = &h.levels[k];
        let t = [h.levels[k - 1].t, s.t, h.levels[k + 1].t];
        let (a, a_dot, a_ddot) = &shapes[k];
        let a_x = derivative(a, s.dx, Boundary::Outflow)?;
        let a_dot_x = derivative(a_dot, s.dx, Boundary::Outflow)?;
        let vhat = s.vhat(&h.constants);
        for i in interior_range(s.n(), Boundary::Outflow) {
            let a_t = middle_derivative(t, [shapes[k - 1].0[i], a[i], shapes[k + 1].0[i]]);
            let a_dot_t = middle_derivative(t, [shapes[k - 1].1[i], a_dot[i], shapes[k + 1].1[i]]);
            r.a_t = r.a_t.max((a_t - s.u[i] * a_dot[i]).abs());
            r.a_x = r.a_x.max((a_x[i] - vhat[i] * a_dot[i]).abs());
            r.a_dot_t = r.a_dot_t.max((a_dot_t - s.u[i] * a_ddot[i]).abs());
            r.a_dot_x = r.a_dot_x.max((a_dot_x[i] - vhat[i] * a_ddot[i]).abs());
        }
    }
    Ok(r)
}

/// Interior maxima of |α_t + cα_x − α′| and |β_t − cβ_x − β‵| at stored
/// level `k`, with time derivatives from the neighbouring levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientResiduals {
    pub forward: f64,
    pub backward: f64,
}

pub fn alpha_residuals(h: &DuctHistory, k: usize) -> Result<GradientResiduals> {
    check_history(h)?;
    if k == 0 || k + 1 >= h.levels.len() {
        return Err(Error::Grid(format!(
            "level {k} has no neighbours on both sides among {} levels",
            h.levels.len()
        )));
    }
    let g: Vec<Vec<DuctGradients>> = h.levels[k - 1..=k + 1]
        .iter()
        .map(|s| s.gradients(&h.constants, &h.profile))
        .collect::<Result<_>>()?;
    let s = &h.levels[k];
    let t = [h.levels[k - 1].t, s.t, h.levels[k + 1].t];
    let alpha: Vec<f64> = g[1].iter().map(|d| d.alpha).collect();
    let beta: Vec<f64> = g[1].iter().map(|d| d.beta).collect();
    let alpha_x = derivative(&alpha, s.dx, Boundary::Outflow)?;
    let beta_x = derivative(&beta, s.dx, Boundary::Outflow)?;
    let mut r = GradientResiduals {
        forward: 0.0,
        backward: 0.0,
    };
    for i in interior_range(s.n(), Boundary::Outflow) {
        let node = s.node(&h.profile, i);
        let c = h.constants.sound_speed(node.z, node.m, node.a);
        let alpha_t = middle_derivative(t, [g[0][i].alpha, alpha[i], g[2][i].alpha]);
        let beta_t = middle_derivative(t, [g[0][i].beta, beta[i], g[2][i].beta]);
        r.forward = r.forward.max((alpha_t + c * alpha_x[i] - g[1][i].alpha_rate).abs());
        r.backward = r.backward.max((beta_t - c * beta_x[i] - g[1][i].beta_rate).abs());
    }
    Ok(r)
}

/// Largest discrepancy, relative to max(1, |reference|), between the duct
/// formulas with a ≡ 1 and the general γ-law machinery at `samples` random
/// states with varying entropy.
pub fn uniform_duct_agreement(samples: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let entropy = Profile::Sinusoidal {
        mean: 0.1,
        amplitude: 0.3,
        wavenumber: 2.0 * std::f64::consts::PI,
        phase: 0.4,
    };
    let (k_gas, cv) = (1.3, 0.9);
    let domain = ValidityDomain::new(0.05, 20.0, -0.5, 1.5)?;
    let mut worst = 0.0f64;
    for gamma in [1.4, 5.0 / 3.0, 2.0, 3.0] {
        let consts = DuctConstants::new(gamma, k_gas, cv)?;
        let chart = Chart::new(Arc::new(PowerLaw::with_entropy(gamma, k_gas, cv, entropy, domain)?))?;
        for _ in 0..samples {
            let x = rng.gen_range(0.0..1.0);
            let v = rng.gen_range(0.3..3.0);
            let u = rng.gen_range(-1.0..1.0);
            let u_x = rng.gen_range(-2.0..2.0);
            let v_x = rng.gen_range(-2.0..2.0);
            let p = chart.point(v, x)?;
            let c = p.c();
            let (alpha, beta) = alpha_beta(u_x, p.h_x - c * v_x, p.p_mu, c);
            let reference = [alpha, beta, alpha_prime(&p, alpha, beta), beta_backprime(&p, alpha, beta)];
            let (s, s_x, _) = entropy.eval(x);
            let m = consts.m_of_entropy(s);
            let z = consts.z_of_vhat(v);
            let node = DuctNode {
                z,
                m,
                m_x: m * s_x / (2.0 * cv),
                u,
                a: 1.0,
                a_dot: 0.0,
                a_ddot: 0.0,
            };
            let z_x = -0.5 * (gamma - 1.0) * z / v * v_x;
            let d = duct_alpha_beta(&consts, &node, u_x, z_x);
            for (ours, theirs) in [d.alpha, d.beta, d.alpha_rate, d.beta_rate].iter().zip(reference) {
                worst = worst.max((ours - theirs).abs() / theirs.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(n: usize) -> DuctRun {
        DuctRun::new(2.0, 1.0, 1.0, DuctProfile::Linear { value: 1.0, slope: 0.1 }, n).unwrap()
    }

    fn order(a: f64, b: f64) -> f64 {
        (a / b).log2()
    }

    #[test]
    fn initial_state_is_consistent() {
        let mut run = linear(201);
        run.entropy = Profile::Sinusoidal {
            mean: 0.0,
            amplitude: 0.2,
            wavenumber: 3.0,
            phase: 0.0,
        };
        let s = run.initial_state().unwrap();
        let k = &run.constants;
        let p0 = k.pressure(s.z[0], s.m[0], run.profile.eval(s.position[0]).0);
        for i in 0..s.n() {
            let node = s.node(&run.profile, i);
            assert!(node.z > 0.0 && node.m > 0.0 && node.a > 0.0);
            let (vhat, entropy) = super::super::zm_inverse(k, node.z, node.m).unwrap();
            let direct = k.sound_speed_direct(vhat, entropy, node.a);
            assert!((k.sound_speed(node.z, node.m, node.a) - direct).abs() <= 1e-10 * direct);
            assert!((k.pressure(node.z, node.m, node.a) - p0).abs() <= 1e-13 * p0);
        }
    }

    #[test]
    fn uniform_duct_has_zero_metric_residual() {
        let run = DuctRun::new(1.4, 1.0, 1.0, DuctProfile::Constant { value: 1.5 }, 101).unwrap();
        let h = run
            .evolve(&DuctRunSettings {
                t_max: 0.2,
                ..Default::default()
            })
            .unwrap();
        assert!(metric_identities_residual(&h).unwrap().max() <= 1e-12);
    }

    #[test]
    fn gas_at_rest_stays_at_rest() {
        let mut run = linear(101);
        run.pulse.amplitude = 0.0;
        let h = run
            .evolve(&DuctRunSettings {
                t_max: 0.5,
                ..Default::default()
            })
            .unwrap();
        let r = metric_identities_residual(&h).unwrap();
        assert!(r.a_t <= 1e-10 && r.a_dot_t <= 1e-10, "{r:?}");
        assert!(h.last().u.iter().all(|u| u.abs() < 1e-12));
    }

    #[test]
    fn metric_residual_converges() {
        let settings = DuctRunSettings {
            t_max: 0.3,
            ..Default::default()
        };
        let r: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&n| metric_identities_residual(&linear(n).evolve(&settings).unwrap()).unwrap().max())
            .collect();
        assert!(order(r[0], r[1]) >= 1.8 && order(r[1], r[2]) >= 1.8, "{r:?}");
    }

    #[test]
    fn gradient_dynamics_match_the_flow() {
        let settings = DuctRunSettings {
            t_max: 0.3,
            ..Default::default()
        };
        let r: Vec<GradientResiduals> = [200, 400, 800]
            .iter()
            .map(|&n| {
                let mut run = DuctRun::new(
                    1.4,
                    1.0,
                    1.0,
                    DuctProfile::SmoothNozzle {
                        inlet: 1.0,
                        outlet: 0.7,
                        center: 1.0,
                        width: 0.3,
                    },
                    n,
                )
                .unwrap();
                run.entropy = Profile::Sinusoidal {
                    mean: 0.0,
                    amplitude: 0.2,
                    wavenumber: 3.0,
                    phase: 0.5,
                };
                let h = run.evolve(&settings).unwrap();
                alpha_residuals(&h, h.levels.len() / 2).unwrap()
            })
            .collect();
        for pair in r.windows(2) {
            assert!(order(pair[0].forward, pair[1].forward) >= 1.8, "{r:?}");
            assert!(order(pair[0].backward, pair[1].backward) >= 1.8, "{r:?}");
        }
    }

    #[test]
    fn uniform_duct_matches_general_law() {
        assert!(uniform_duct_agreement(200).unwrap() <= 1e-10);
    }

    #[test]
    fn short_history_is_rejected() {
        let h = linear(50)
            .evolve(&DuctRunSettings {
                t_max: 0.0,
                ..Default::default()
            })
            .unwrap();
        assert!(matches!(metric_identities_residual(&h), Err(Error::Grid(_))));
    }
}

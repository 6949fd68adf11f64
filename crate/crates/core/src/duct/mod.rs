//! Compressible flow through a duct of varying cross-section in Lagrangian
//! mass coordinates, written in the variables
//! z = (2√(Kγ)/(γ−1))·v̂^{−(γ−1)/2} and m = e^{S/2c_v},
//! where v̂ = 1/(aρ) is the volume per unit cross-section.

pub mod run;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure::Profile;

pub use run::{
    alpha_residuals, metric_identities_residual, GradientResiduals, uniform_duct_agreement, DuctHistory, DuctRun, DuctRunSettings,
    DuctState, MetricResiduals, VelocityPulse,
};

/// Polytropic gas constants and the derived scalings
/// v̂ = K_v z^{−2/(γ−1)}, p = K_p a^{−γ} m² z^{2γ/(γ−1)},
/// c = K_c a^{−(γ−1)/2} m z^{(γ+1)/(γ−1)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuctConstants {
    pub gamma: f64,
    pub k: f64,
    pub cv: f64,
    pub k_v: f64,
    pub k_p: f64,
    pub k_c: f64,
}

impl DuctConstants {
    pub fn new(gamma: f64, k: f64, cv: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Model(format!("duct flow needs γ > 1, got {gamma}")));
        }
        if !(k > 0.0 && k.is_finite()) || !(cv > 0.0 && cv.is_finite()) {
            return Err(Error::Model(format!("K and c_v must be positive, got K={k}, c_v={cv}")));
        }
        let scale = 2.0 * (k * gamma).sqrt() / (gamma - 1.0);
        let k_v = scale.powf(2.0 / (gamma - 1.0));
        Ok(DuctConstants {
            gamma,
            k,
            cv,
            k_v,
            k_p: k * k_v.powf(-gamma),
            k_c: (k * gamma).sqrt() * k_v.powf(-0.5 * (gamma + 1.0)),
        })
    }

    fn z_scale(&self) -> f64 {
        2.0 * (self.k * self.gamma).sqrt() / (self.gamma - 1.0)
    }

    pub fn z_of_vhat(&self, vhat: f64) -> f64 {
        self.z_scale() * vhat.powf(-0.5 * (self.gamma - 1.0))
    }

    pub fn vhat_of_z(&self, z: f64) -> f64 {
        self.k_v * z.powf(-2.0 / (self.gamma - 1.0))
    }

    pub fn m_of_entropy(&self, s: f64) -> f64 {
        (s / (2.0 * self.cv)).exp()
    }

    pub fn entropy_of_m(&self, m: f64) -> f64 {
        2.0 * self.cv * m.ln()
    }

    pub fn pressure(&self, z: f64, m: f64, a: f64) -> f64 {
        let g = self.gamma;
        self.k_p * a.powf(-g) * m * m * z.powf(2.0 * g / (g - 1.0))
    }

    /// Lagrangian sound speed √(−a·p_v̂).
    pub fn sound_speed(&self, z: f64, m: f64, a: f64) -> f64 {
        let g = self.gamma;
        self.k_c * a.powf(-0.5 * (g - 1.0)) * m * z.powf((g + 1.0) / (g - 1.0))
    }

    /// The same speed evaluated from (v̂, S) without passing through z.
    pub fn sound_speed_direct(&self, vhat: f64, s: f64, a: f64) -> f64 {
        let g = self.gamma;
        (self.k * g).sqrt() * a.powf(-0.5 * (g - 1.0)) * vhat.powf(-0.5 * (g + 1.0)) * self.m_of_entropy(s)
    }
}

/// (v̂, S) → (z, m).
pub fn zm_transform(consts: &DuctConstants, vhat: f64, s: f64) -> Result<(f64, f64)> {
    if !(vhat > 0.0 && vhat.is_finite()) || !s.is_finite() {
        return Err(Error::Model(format!("need finite v̂ > 0 and S, got v̂={vhat}, S={s}")));
    }
    Ok((consts.z_of_vhat(vhat), consts.m_of_entropy(s)))
}

/// (z, m) → (v̂, S).
pub fn zm_inverse(consts: &DuctConstants, z: f64, m: f64) -> Result<(f64, f64)> {
    if !(z > 0.0 && z.is_finite()) || !(m > 0.0 && m.is_finite()) {
        return Err(Error::Model(format!("need z > 0 and m > 0, got z={z}, m={m}")));
    }
    Ok((consts.vhat_of_z(z), consts.entropy_of_m(m)))
}

/// Cross-section a as a function of spatial position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DuctProfile {
    Constant { value: f64 },
    /// value + slope·x̃
    Linear { value: f64, slope: f64 },
    /// Area moving smoothly from `inlet` to `outlet` around `center`.
    SmoothNozzle {
        inlet: f64,
        outlet: f64,
        center: f64,
        width: f64,
    },
}

impl DuctProfile {
    fn as_profile(&self) -> Profile {
        match *self {
            DuctProfile::Constant { value } => Profile::Constant { value },
            DuctProfile::Linear { value, slope } => Profile::Linear { value, slope },
            DuctProfile::SmoothNozzle {
                inlet,
                outlet,
                center,
                width,
            } => Profile::TanhStep {
                mean: 0.5 * (inlet + outlet),
                amplitude: 0.5 * (outlet - inlet),
                center,
                width,
            },
        }
    }

    /// (a, ȧ, ä) at spatial position x̃.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        self.as_profile().eval(x)
    }

    pub fn is_uniform(&self) -> bool {
        self.as_profile().is_constant()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DuctProfile::Constant { value } => value > 0.0,
            DuctProfile::Linear { value, slope } => value > 0.0 && slope.is_finite(),
            DuctProfile::SmoothNozzle {
                inlet,
                outlet,
                width,
                center,
            } => inlet > 0.0 && outlet > 0.0 && width > 0.0 && center.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Model(format!("invalid duct profile {self:?}")))
        }
    }
}

/// State and duct geometry at one Lagrangian node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuctNode {
    pub z: f64,
    pub m: f64,
    pub m_x: f64,
    pub u: f64,
    pub a: f64,
    pub a_dot: f64,
    pub a_ddot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuctCoefficients {
    pub k1: f64,
    pub k2: f64,
    /// Part of k₃ carrying m z ȧ.
    pub k3_mass: f64,
    /// Part of k₃ carrying u ȧ.
    pub k3_velocity: f64,
    /// Forcing by the duct shape, A(x, t).
    pub area_term: f64,
}

impl DuctCoefficients {
    pub fn k3(&self) -> f64 {
        self.k3_mass + self.k3_velocity
    }
}

pub fn duct_coeffs(consts: &DuctConstants, node: &DuctNode) -> DuctCoefficients {
    let g = consts.gamma;
    let gm = g - 1.0;
    let DuctNode {
        z,
        m,
        m_x,
        u,
        a,
        a_dot,
        a_ddot,
    } = *node;
    let k1 = (g + 1.0) / (2.0 * gm) * consts.k_c * z.powf(2.0 / gm);
    let k2 = gm / (g * (g + 1.0)) * m_x * z * a.powf(-0.5 * gm);
    let k3_mass = 3.0 * gm * gm / 8.0 * m * z * a.powf(-0.5 * (g + 1.0)) * a_dot;
    let k3_velocity = -0.25 * gm * u * a_dot / a;
    let area_term = gm.powi(3) / (8.0 * consts.k_c)
        * m
        * m
        * z.powf((2.0 * g - 4.0) / gm)
        * a.powf(-g - 1.0)
        * (a * a_ddot - g * a_dot * a_dot)
        + gm * gm / (2.0 * g) * m * m_x * z * z * a.powf(-g) * a_dot;
    DuctCoefficients {
        k1,
        k2,
        k3_mass,
        k3_velocity,
        area_term,
    }
}

/// Gradient variables at a node and their rates of change along the
/// forward (dx/dt = +c) and backward (dx/dt = −c) characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuctGradients {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_rate: f64,
    pub beta_rate: f64,
}

pub fn duct_alpha_beta(consts: &DuctConstants, node: &DuctNode, u_x: f64, z_x: f64) -> DuctGradients {
    let g = consts.gamma;
    let w = node.a.powf(-0.5 * (g - 1.0));
    let wave = w * node.m * z_x + (g - 1.0) / g * w * node.m_x * node.z;
    let alpha = u_x + wave;
    let beta = u_x - wave;
    let k = duct_coeffs(consts, node);
    let alpha_rate = k.k1 * (k.k2 * (3.0 * alpha + beta) + alpha * beta - alpha * alpha)
        + (k.k3_mass + k.k3_velocity) * (alpha - beta)
        + k.area_term;
    let beta_rate = -k.k1 * k.k2 * (3.0 * beta + alpha)
        + k.k1 * (alpha * beta - beta * beta)
        + (k.k3_velocity - k.k3_mass) * (beta - alpha)
        + k.area_term;
    DuctGradients {
        alpha,
        beta,
        alpha_rate,
        beta_rate,
    }
}

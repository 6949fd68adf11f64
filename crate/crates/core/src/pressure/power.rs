use std::collections::BTreeMap;

use super::{LawMeta, PressureDerivs, PressureLaw, Profile, VStar, ValidityDomain};
use crate::coords::ClosedChart;
use crate::error::{Error, Result};

/// The x̄-dependent factor A in p = A(x̄)·v^{−γ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Constant(f64),
    /// K·exp(S(x̄)/c_v)
    Entropy { k: f64, cv: f64, entropy: Profile },
    /// B(x̄) directly (the transverse-field effective pressure when γ = 2).
    Field(Profile),
}

impl Amplitude {
    /// (A, A′, A″)
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Amplitude::Constant(k) => (k, 0.0, 0.0),
            Amplitude::Entropy { k, cv, entropy } => {
                let (s, s1, s2) = entropy.eval(x);
                let a = k * (s / cv).exp();
                let r = s1 / cv;
                (a, a * r, a * (s2 / cv + r * r))
            }
            Amplitude::Field(b) => b.eval(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Amplitude::Constant(_) => true,
            Amplitude::Entropy { entropy, .. } => entropy.is_constant(),
            Amplitude::Field(b) => b.is_constant(),
        }
    }
}

/// p(v, x̄) = A(x̄)·v^{−γ} with γ > 1.
#[derive(Debug, Clone)]
pub struct PowerLaw {
    gamma: f64,
    amplitude: Amplitude,
    domain: ValidityDomain,
    name: &'static str,
}

impl PowerLaw {
    pub fn new(gamma: f64, amplitude: Amplitude, domain: ValidityDomain) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Model(format!("power law needs γ > 1, got {gamma}")));
        }
        let name = match amplitude {
            Amplitude::Constant(_) => "isentropic",
            Amplitude::Entropy { .. } => "entropy",
            Amplitude::Field(_) => "mhd",
        };
        match amplitude {
            Amplitude::Constant(k) | Amplitude::Entropy { k, .. } if !(k > 0.0) => {
                return Err(Error::Model(format!("pressure constant K must be positive, got {k}")));
            }
            Amplitude::Entropy { cv, .. } if !(cv > 0.0) => {
                return Err(Error::Model(format!("c_v must be positive, got {cv}")));
            }
            Amplitude::Field(b) => {
                let lo = b.min_over(domain.x_min, domain.x_max);
                if !(lo > 0.0) {
                    return Err(Error::Model(format!(
                        "field profile must stay positive on [{}, {}]; minimum sampled value {lo}",
                        domain.x_min, domain.x_max
                    )));
                }
            }
            _ => {}
        }
        Ok(PowerLaw {
            gamma,
            amplitude,
            domain,
            name,
        })
    }

    pub fn isentropic(gamma: f64, k: f64, domain: ValidityDomain) -> Result<Self> {
        Self::new(gamma, Amplitude::Constant(k), domain)
    }

    pub fn with_entropy(gamma: f64, k: f64, cv: f64, entropy: Profile, domain: ValidityDomain) -> Result<Self> {
        Self::new(gamma, Amplitude::Entropy { k, cv, entropy }, domain)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn amplitude(&self) -> &Amplitude {
        &self.amplitude
    }
}

/// Transverse-field law p = B(x̄)·v^{−2}.
pub fn make_mhd_law(b: Profile, domain: ValidityDomain) -> Result<PowerLaw> {
    PowerLaw::new(2.0, Amplitude::Field(b), domain)
}

impl PressureLaw for PowerLaw {
    fn kernel(&self, v: f64, x: f64) -> PressureDerivs {
        let g = self.gamma;
        let (a, a1, a2) = self.amplitude.eval(x);
        let w = v.powf(-g);
        let wv = -g * w / v;
        let wvv = g * (g + 1.0) * w / (v * v);
        let c = (g * a).sqrt() * v.powf(-0.5 * (g + 1.0));
        PressureDerivs {
            p: a * w,
            p_v: a * wv,
            p_vv: a * wvv,
            p_x: a1 * w,
            p_xv: a1 * wv,
            p_xx: a2 * w,
            c,
            c_v: -0.5 * (g + 1.0) * c / v,
            c_x: 0.5 * c * a1 / a,
        }
    }

    fn meta(&self) -> LawMeta {
        let mut params = BTreeMap::new();
        params.insert("gamma".to_string(), self.gamma);
        match self.amplitude {
            Amplitude::Constant(k) => {
                params.insert("K".to_string(), k);
            }
            Amplitude::Entropy { k, cv, .. } => {
                params.insert("K".to_string(), k);
                params.insert("cv".to_string(), cv);
            }
            Amplitude::Field(_) => {}
        }
        LawMeta {
            name: self.name.to_string(),
            params,
            v_star: VStar::Infinite,
        }
    }

    fn domain(&self) -> ValidityDomain {
        self.domain
    }

    fn closed_chart(&self) -> Option<&dyn ClosedChart> {
        Some(self)
    }
}

//! Closed forms for the transverse-field law p = B(μ)·v^{−2} (γ = 2),
//! written directly in terms of B, Ḃ, B̈ and h with reference level h₀ = 0.
//!
//! These are kept separate from the general power-law chart so the two can
//! be checked against each other and against the quadrature path.

use crate::pressure::Profile;

/// B and its first two derivatives at one μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Field {
    pub fn at(profile: &Profile, mu: f64) -> Self {
        let (b, b1, b2) = profile.eval(mu);
        Field { b, b1, b2 }
    }

    pub fn wavespeed_v(&self, v: f64) -> f64 {
        2f64.sqrt() * self.b.sqrt() * v.powf(-1.5)
    }

    pub fn h_of_v(&self, v: f64) -> f64 {
        2.0 * 2f64.sqrt() * self.b.sqrt() / v.sqrt()
    }

    pub fn v_of_h(&self, h: f64) -> f64 {
        8.0 * self.b / (h * h)
    }

    pub fn pressure(&self, h: f64) -> f64 {
        h.powi(4) / (64.0 * self.b)
    }

    pub fn wavespeed(&self, h: f64) -> f64 {
        h.powi(3) / (16.0 * self.b)
    }

    /// p_μ/c
    pub fn pmu_over_c(&self, h: f64) -> f64 {
        -0.25 * h * self.b1 / self.b
    }

    pub fn integrating_factor(&self, h: f64) -> f64 {
        -(1.0 / 80.0) * self.b1 / self.b.powf(1.5) * h.powf(2.5)
    }

    pub fn y(&self, h: f64, u_x: f64, h_x: f64) -> f64 {
        h.powf(1.5) / (4.0 * self.b.sqrt()) * (u_x + h_x - 0.2 * h * self.b1 / self.b)
    }

    pub fn q(&self, h: f64, u_x: f64, h_x: f64) -> f64 {
        h.powf(1.5) / (4.0 * self.b.sqrt()) * (u_x - h_x + 0.2 * h * self.b1 / self.b)
    }

    pub fn a2(&self, h: f64) -> f64 {
        0.375 * h.sqrt() / self.b.sqrt()
    }

    pub fn a1(&self, h: f64) -> f64 {
        (1.0 / 40.0) * self.b1 / (self.b * self.b) * h.powi(3)
    }

    pub fn a0(&self, h: f64) -> f64 {
        h.powf(5.5) / 1280.0
            * (self.b2 / self.b.powf(2.5) - 1.2 * self.b1 * self.b1 / self.b.powf(3.5))
    }

    /// G = 1 − (5/6)·B·B̈/Ḃ²; undefined where Ḃ = 0.
    pub fn g(&self) -> f64 {
        1.0 - 5.0 / 6.0 * self.b * self.b2 / (self.b1 * self.b1)
    }

    /// a₀ written as −6(√h/√B)·G·I².
    pub fn a0_factored(&self, h: f64) -> f64 {
        let i = self.integrating_factor(h);
        -6.0 * (h.sqrt() / self.b.sqrt()) * self.g() * i * i
    }

    /// ψ_± at ν = 0 in factored form.
    pub fn psi(&self, h: f64, xi: f64, forward: bool) -> f64 {
        let i = self.integrating_factor(h);
        let sign = if forward { 1.0 } else { -1.0 };
        -(h.sqrt() / self.b.sqrt()) * (6.0 * self.g() * i * i + sign * 2.0 * i * xi + 0.375 * xi * xi)
    }
}

//! Gradient-blowup detection and the report comparing it with the Riccati
//! predictions.

use serde::Serialize;

use crate::riccati::CoefficientBounds;

pub const DEFAULT_CUT: f64 = 1e4;

/// Relative change in T_obs under Δx → Δx/2 below which a detection counts
/// as confirmed.
pub const CONFIRM_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientSample {
    pub t: f64,
    /// max over nodes of max(|u_x|, |v_x|)
    pub max_gradient: f64,
}

/// First time the monitored gradient exceeds `cut`.
///
/// Between the last sample below the cut and the first above it the
/// crossing is located by linear interpolation of 1/g, which is exact for
/// the g ∝ 1/(T* − t) growth seen near blowup.
pub fn detect_blowup(history: &[GradientSample], cut: f64) -> Option<f64> {
    let k = history.iter().position(|s| s.max_gradient > cut)?;
    if k == 0 {
        return Some(history[0].t);
    }
    let (a, b) = (history[k - 1], history[k]);
    let (ra, rb, rc) = (1.0 / a.max_gradient, 1.0 / b.max_gradient, 1.0 / cut);
    let theta = if ra > rb { (ra - rc) / (ra - rb) } else { 1.0 };
    Some(a.t + theta.clamp(0.0, 1.0) * (b.t - a.t))
}

pub fn refinement_agrees(coarse: f64, fine: f64) -> bool {
    (fine - coarse).abs() < CONFIRM_TOLERANCE * coarse.abs()
}

/// Counts from the R/C transition audit: nodes where β changed sign along
/// a backward characteristic between consecutive steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RcAudit {
    pub transitions: usize,
    /// Transitions with a definite predicted sign and |α| above the noise
    /// floor.
    pub checked: usize,
    pub agreed: usize,
}

impl RcAudit {
    pub fn passed(&self) -> bool {
        self.agreed == self.checked
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    #[serde(rename = "N")]
    pub n: f64,
    pub nu: f64,
    pub h0: f64,
    pub y0_min: f64,
    pub q0_min: f64,
    pub x_y0_min: f64,
    pub x_q0_min: f64,
    /// Family whose initial minimum is the smaller one.
    pub critical_family: String,
    /// inf/sup of a₂ along the traced critical characteristic.
    pub a2_inf: f64,
    pub a2_sup: f64,
    /// [1/(|m|·sup a₂), 1/(|m|·inf a₂)] for the critical minimum m < 0; the
    /// exact lifespan range when a₀ = a₁ = 0.
    pub bracket: Option<(f64, f64)>,
    #[serde(rename = "T_pred")]
    pub t_pred: Option<f64>,
    #[serde(rename = "T_obs")]
    pub t_obs: Option<f64>,
    #[serde(rename = "T_obs_refined")]
    pub t_obs_refined: Option<f64>,
    pub refinement_confirmed: Option<bool>,
    pub resolution_limited: bool,
    pub cut: f64,
    /// max(|u_x|, |v_x|) of the initial data, for choosing a cut.
    pub initial_max_gradient: f64,
    pub bounds: CoefficientBounds,
    pub rc_audit: RcAudit,
    pub amplitude: f64,
    pub steps: usize,
    pub t_end: f64,
}

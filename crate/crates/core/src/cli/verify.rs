//! The `verify` suite: chart identities on the configured law, the
//! p-system degeneration, the transverse-field closed forms and the duct
//! checks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ModelName, RunConfig};
use crate::coords::{Chart, ChartMode};
use crate::duct::{metric_identities_residual, uniform_duct_agreement};
use crate::error::Result;
use crate::gradients::{compute_field, rc_consistency_check};
use crate::mhd::Field;
use crate::pressure::{make_mhd_law, validate_law, PowerLaw, PressureLaw, Profile, ValidityDomain};
use crate::riccati::{coefficients, coefficients_at};
use crate::solver::grid::Boundary;
use crate::solver::initial::{build, Family, GridSpec, InitialData, Shape, Strength};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Observed convergence order, for checks judged by order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    fn measured(name: &str, max_error: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
            order: None,
            error: None,
        }
    }

    fn from_result(name: &str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(e) => Self::measured(name, e, tolerance),
            Err(e) => CheckResult {
                name: name.into(),
                max_error: f64::NAN,
                tolerance,
                pass: false,
                order: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

const DEGENERATION_TOLERANCE: f64 = 1e-12;
const CLOSED_FORM_TOLERANCE: f64 = 1e-7;
const DUCT_MIN_ORDER: f64 = 1.8;
const DUCT_AGREEMENT_TOLERANCE: f64 = 1e-10;

pub fn verify(cfg: &RunConfig) -> VerifyReport {
    let mut checks = match cfg.chart() {
        Ok(chart) => law_checks(&chart, cfg.verify.samples, cfg.verify.tolerance, cfg.seed),
        Err(e) => vec![CheckResult::from_result("law", 0.0, Err(e))],
    };
    checks.push(CheckResult::from_result(
        "psystem_degeneration",
        DEGENERATION_TOLERANCE,
        psystem_degeneration(cfg.model.gamma, cfg.model.k),
    ));
    let field = match cfg.model.name {
        ModelName::Mhd => cfg.model.profile,
        _ => Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1.0,
            phase: 0.0,
        },
    };
    checks.push(CheckResult::from_result(
        "mhd_closed_forms",
        CLOSED_FORM_TOLERANCE,
        mhd_closed_forms(field, cfg.verify.samples, cfg.seed),
    ));
    checks.push(duct_order(cfg));
    checks.push(CheckResult::from_result(
        "duct_uniform_agreement",
        DUCT_AGREEMENT_TOLERANCE,
        uniform_duct_agreement(cfg.verify.samples.div_ceil(4)),
    ));
    VerifyReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

/// Sign conditions and the three chart identities at random points of the
/// law's domain. Identity errors are relative to max(1, |value|).
pub fn law_checks(chart: &Chart, samples: usize, tolerance: f64, seed: u64) -> Vec<CheckResult> {
    let law = chart.law_arc();
    let dom = law.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lv, hv) = (dom.v_min.ln(), dom.v_max.ln());
    let points: Vec<(f64, f64)> = (0..samples)
        .map(|_| {
            (
                rng.gen_range(lv..hv).exp(),
                rng.gen_range(dom.x_min..=dom.x_max),
            )
        })
        .collect();
    let validation = validate_law(law.clone(), &points).map(|_| 0.0);
    let mut out = vec![CheckResult::from_result("sign_conditions", 0.0, validation)];
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    let identities = || -> Result<[f64; 3]> {
        let mut worst = [0.0f64; 3];
        for &(v, x) in &points {
            let p = chart.point(v, x)?;
            let c = p.c();
            let lhs = c * p.pmu_c_h;
            let d = p.derivs;
            let ratio_v = (d.p_xv * d.p_v - d.p_x * d.p_vv) / (d.p_v * d.p_v);
            let rc = rc_consistency_check(law.as_ref(), v, x)?;
            worst[0] = worst[0].max(rel(lhs, p.c_mu - p.c_h * p.p_mu / c));
            worst[1] = worst[1].max(rel(lhs, 0.5 * c * ratio_v));
            worst[2] = worst[2].max(rc.diff / rc.lhs.abs().max(1.0));
        }
        Ok(worst)
    };
    match identities() {
        Ok(w) => {
            out.push(CheckResult::measured("c_pmu_c_h_identity", w[0], tolerance));
            out.push(CheckResult::measured("rc_function_identity", w[1], tolerance));
            out.push(CheckResult::measured("rc_consistency_identity", w[2], tolerance));
        }
        Err(e) => out.push(CheckResult::from_result("chart_identities", tolerance, Err(e))),
    }
    out
}

/// max(|a₀|, |a₁|, |I|) over a perturbed isentropic state on 400 nodes.
pub fn psystem_degeneration(gamma: f64, k: f64) -> Result<f64> {
    let dom = ValidityDomain::new(0.05, 20.0, -1.0, 2.0)?;
    let chart = Chart::new(Arc::new(PowerLaw::isentropic(gamma, k, dom)?))?;
    let grid = GridSpec {
        x_lo: 0.0,
        x_hi: 1.0,
        n: 400,
        boundary: Boundary::Periodic,
    };
    let data = InitialData {
        shape: Shape::Sine {
            wavenumber: 1.0,
            phase: 0.0,
        },
        family: Family::Forward,
        strength: Strength::Amplitude(0.2),
        v_ref: 1.0,
        x_ref: None,
    };
    let (s, _) = build(&chart, &grid, &data)?;
    let f = compute_field(&chart, &s)?;
    let mut worst = 0.0f64;
    for (p, fac) in f.points.iter().zip(&f.factors) {
        let c = coefficients_at(p, fac, chart.h0())?;
        worst = worst.max(c.a0.abs()).max(c.a1.abs()).max(fac.value.abs());
    }
    Ok(worst)
}

/// Quadrature-and-difference chart against the closed forms for
/// p = B(μ)v^{−2}, at random (v, μ) over one period of B. Errors are
/// relative; a₀ is measured against the sum of its term magnitudes since
/// it changes sign.
pub fn mhd_closed_forms(field: Profile, samples: usize, seed: u64) -> Result<f64> {
    let span = 2.0 * std::f64::consts::PI;
    let dom = ValidityDomain::new(0.1, 10.0, -0.5, span + 0.5)?;
    let law: Arc<dyn PressureLaw> = Arc::new(make_mhd_law(field, dom)?);
    let chart = Chart::with_options(law, ChartMode::Generic, Some(0.0), 1 << 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x006d_6864);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mu = rng.gen_range(0.0..span);
        let f = Field::at(&field, mu);
        let v = rng.gen_range(0.3..3.0);
        let h = f.h_of_v(v);
        let k = coefficients(&chart, h, mu)?;
        let i = chart.integrating_factor(h, mu)?.value;
        let a0_scale = h.powf(5.5) / 1280.0 * (f.b2.abs() / f.b.powf(2.5) + 1.2 * f.b1 * f.b1 / f.b.powf(3.5));
        let i_scale = f.b1.abs() / (80.0 * f.b.powf(1.5)) * h.powf(2.5);
        let a1_scale = f.b1.abs() / (40.0 * f.b * f.b) * h.powi(3);
        let pairs = [
            (chart.h_of_v(v, mu)?, h, h),
            (i, f.integrating_factor(h), i_scale),
            (k.a0, f.a0(h), a0_scale),
            (k.a1, f.a1(h), a1_scale),
            (k.a2, f.a2(h), f.a2(h)),
        ];
        for (ours, exact, scale) in pairs {
            let e = (ours - exact).abs();
            worst = worst.max(if scale > 0.0 { e / scale } else { e });
        }
    }
    Ok(worst)
}

/// Metric-identity residual at n and 2n − 1 nodes. The fine residual must
/// fall below the coarse one by 2^1.8, unless both are at rounding level.
fn duct_order(cfg: &RunConfig) -> CheckResult {
    let residual = |n: usize| -> Result<f64> {
        let mut run = cfg.duct_run()?;
        run.n = n;
        let h = run.evolve(&cfg.duct_settings())?;
        Ok(metric_identities_residual(&h)?.max())
    };
    let n = cfg.duct.n;
    match residual(n).and_then(|a| residual(2 * n - 1).map(|b| (a, b))) {
        Ok((a, b)) => {
            let order = (a / b).log2();
            let pass = order >= DUCT_MIN_ORDER || a <= 1e-12;
            CheckResult {
                name: "duct_metric_identities".into(),
                max_error: b,
                tolerance: (a * (-DUCT_MIN_ORDER).exp2()).max(1e-12),
                pass,
                order: Some(order),
                error: (!pass).then(|| format!("observed order {order:.3} below {DUCT_MIN_ORDER}")),
            }
        }
        Err(e) => CheckResult::from_result("duct_metric_identities", 0.0, Err(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pressure::{LawMeta, PressureDerivs};

    #[derive(Debug)]
    struct Flipped(PowerLaw);

    impl PressureLaw for Flipped {
        fn kernel(&self, v: f64, x: f64) -> PressureDerivs {
            let mut d = self.0.kernel(v, x);
            d.p_vv = -d.p_vv;
            d
        }
        fn meta(&self) -> LawMeta {
            self.0.meta()
        }
        fn domain(&self) -> ValidityDomain {
            self.0.domain()
        }
    }

    #[test]
    fn isentropic_law_passes() {
        let dom = ValidityDomain::new(0.1, 10.0, 0.0, 1.0).unwrap();
        let chart = Chart::new(Arc::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap())).unwrap();
        let r = law_checks(&chart, 200, 1e-8, 1);
        assert!(r.iter().all(|c| c.pass), "{r:?}");
        assert!(psystem_degeneration(2.0, 1.0).unwrap() <= 1e-12);
    }

    #[test]
    fn flipped_curvature_is_reported() {
        let dom = ValidityDomain::new(0.1, 10.0, 0.0, 1.0).unwrap();
        let law: Arc<dyn PressureLaw> = Arc::new(Flipped(PowerLaw::isentropic(2.0, 1.0, dom).unwrap()));
        let chart = Chart::generic(law).unwrap();
        let r = law_checks(&chart, 50, 1e-8, 1);
        let sign = r.iter().find(|c| c.name == "sign_conditions").unwrap();
        assert!(!sign.pass);
        assert!(sign.error.as_deref().unwrap().contains("hyperbolicity"), "{sign:?}");
    }

    #[test]
    fn closed_forms_agree() {
        let b = Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1.0,
            phase: 0.0,
        };
        assert!(mhd_closed_forms(b, 100, 3).unwrap() <= 1e-7);
    }
}

//! Riccati coefficients a₀, a₁, a₂ of the decoupled gradient equations
//! y′ = a₀ + a₁y − a₂y², q‵ = a₀ − a₁q − a₂q², phase-line analysis, the
//! blowup threshold N(ν) and the lifespan bound.

use serde::Serialize;

use crate::coords::{Chart, ChartPoint, IntegratingFactor};
use crate::error::{Error, Result};
use crate::numerics::ode::{dopri5, OdeOptions, OdeStop, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub h: f64,
    pub mu: f64,
    pub h0: f64,
}

/// Coefficients from a chart record and the integrating factor there.
pub fn coefficients_at(p: &ChartPoint, f: &IntegratingFactor, h0: f64) -> Result<RiccatiCoefficients> {
    if !(p.c_h > 0.0) {
        return Err(Error::Hyperbolicity {
            v: p.v,
            x: p.x,
            what: format!("c_h = {} is not positive", p.c_h),
        });
    }
    let c = p.c();
    let rc = c.sqrt();
    let i = f.value;
    let a2 = p.c_h / (2.0 * rc);
    let a1 = -(p.c_h / rc) * i - 2.0 * rc * f.d_h;
    let a0 = -c * f.d_mu + 0.5 * rc * p.pmu_c_h * p.p_mu - c * p.pmu_c_h * i - a2 * i * i;
    Ok(RiccatiCoefficients {
        a0,
        a1,
        a2,
        h: p.h,
        mu: p.mu,
        h0,
    })
}

pub fn coefficients(chart: &Chart, h: f64, mu: f64) -> Result<RiccatiCoefficients> {
    let p = chart.point_h(h, mu)?;
    let f = chart.integrating_factor(h, mu)?;
    coefficients_at(&p, &f, chart.h0())
}

/// α′ along dx/dt = +c.
pub fn alpha_prime(p: &ChartPoint, alpha: f64, beta: f64) -> f64 {
    -0.5 * p.c() * p.pmu_c_h * (3.0 * alpha + beta) + 0.5 * p.c_h * (alpha * beta - alpha * alpha)
}

/// β‵ along dx/dt = −c.
pub fn beta_backprime(p: &ChartPoint, alpha: f64, beta: f64) -> f64 {
    0.5 * p.c() * p.pmu_c_h * (alpha + 3.0 * beta) + 0.5 * p.c_h * (alpha * beta - beta * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// y, along dx/dt = +c: ψ₊
    Forward,
    /// q, along dx/dt = −c: ψ₋
    Backward,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Forward => 1.0,
            Branch::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseLine {
    pub nu: f64,
    pub branch: Branch,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub discriminant: f64,
    /// ξ₁ ≤ ξ₂ when real.
    pub roots: Option<(f64, f64)>,
}

impl PhaseLine {
    /// ψ^ν_±(ξ) = a₀ ± a₁ξ − (1 − ν)a₂ξ²
    pub fn psi(&self, xi: f64) -> f64 {
        self.a0 + self.branch.sign() * self.a1 * xi - (1.0 - self.nu) * self.a2 * xi * xi
    }
}

pub fn phase_roots(c: &RiccatiCoefficients, nu: f64, branch: Branch) -> PhaseLine {
    let k = 1.0 - nu;
    let b = branch.sign() * c.a1;
    let disc = c.a1 * c.a1 + 4.0 * k * c.a0 * c.a2;
    let roots = if disc >= 0.0 {
        let s = disc.sqrt();
        let r1 = (b - s) / (2.0 * k * c.a2);
        let r2 = (b + s) / (2.0 * k * c.a2);
        Some((r1.min(r2), r1.max(r2)))
    } else {
        None
    };
    PhaseLine {
        nu,
        branch,
        a0: c.a0,
        a1: c.a1,
        a2: c.a2,
        discriminant: disc,
        roots,
    }
}

/// Extremes of the coefficients over the admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientBounds {
    pub sup_abs_a1: f64,
    pub sup_a0_plus: f64,
    pub sup_a2: f64,
    pub inf_a2: f64,
}

impl CoefficientBounds {
    pub fn empty() -> Self {
        CoefficientBounds {
            sup_abs_a1: 0.0,
            sup_a0_plus: 0.0,
            sup_a2: 0.0,
            inf_a2: f64::INFINITY,
        }
    }

    pub fn include(&mut self, c: &RiccatiCoefficients) {
        self.sup_abs_a1 = self.sup_abs_a1.max(c.a1.abs());
        self.sup_a0_plus = self.sup_a0_plus.max(c.a0.max(0.0));
        self.sup_a2 = self.sup_a2.max(c.a2);
        self.inf_a2 = self.inf_a2.min(c.a2);
    }

    pub fn from_coefficients<'a>(it: impl IntoIterator<Item = &'a RiccatiCoefficients>) -> Self {
        let mut b = Self::empty();
        for c in it {
            b.include(c);
        }
        b
    }

    pub fn merge(&self, o: &CoefficientBounds) -> Self {
        CoefficientBounds {
            sup_abs_a1: self.sup_abs_a1.max(o.sup_abs_a1),
            sup_a0_plus: self.sup_a0_plus.max(o.sup_a0_plus),
            sup_a2: self.sup_a2.max(o.sup_a2),
            inf_a2: self.inf_a2.min(o.inf_a2),
        }
    }
}

/// Uniform lower bound N ≤ 0 for the real roots of ψ^ν_± over the set.
pub fn threshold_n(b: &CoefficientBounds, nu: f64) -> Result<f64> {
    if !(b.inf_a2 > 0.0) {
        return Err(Error::Hyperbolicity {
            v: f64::NAN,
            x: f64::NAN,
            what: format!("inf a2 = {} is not positive", b.inf_a2),
        });
    }
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::Model(format!("ν must lie in [0, 1), got {nu}")));
    }
    if b.sup_abs_a1 == 0.0 && b.sup_a0_plus == 0.0 {
        return Ok(0.0);
    }
    let k = 1.0 - nu;
    let s = (b.sup_abs_a1 * b.sup_abs_a1 + 4.0 * k * b.sup_a0_plus * b.sup_a2).sqrt();
    Ok(-(b.sup_abs_a1 + s) / (2.0 * k * b.inf_a2))
}

/// T = −1/(ν·ā₂·y₀): the time by which y must reach −∞ when y₀ < N and
/// a₂ ≥ ā₂ along the path.
pub fn lifespan_bound(y0: f64, n: f64, a2_lower: f64, nu: f64) -> Result<f64> {
    if !(y0 < n) {
        return Err(Error::NotApplicable(format!(
            "initial value {y0} is not below the threshold {n}"
        )));
    }
    if !(a2_lower > 0.0) {
        return Err(Error::Hyperbolicity {
            v: f64::NAN,
            x: f64::NAN,
            what: format!("a2 lower bound {a2_lower} is not positive"),
        });
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Model(format!("ν must lie in (0, 1], got {nu}")));
    }
    Ok(-1.0 / (nu * a2_lower * y0))
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub trajectory: Trajectory,
    pub blowup: Option<f64>,
}

/// Integrate y′ = a₀ ± a₁y − a₂y² with coefficients given as a function of t.
pub fn integrate_reference<F>(coeffs: F, branch: Branch, y0: f64, t0: f64, t_end: f64) -> Result<ReferenceSolution>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let s = branch.sign();
    let tr = dopri5(
        |t, y, dy| {
            let (a0, a1, a2) = coeffs(t);
            dy[0] = a0 + s * a1 * y[0] - a2 * y[0] * y[0];
        },
        t0,
        &[y0],
        t_end,
        &OdeOptions::default(),
    )?;
    let blowup = match tr.stop {
        OdeStop::Blowup { t } => Some(t),
        OdeStop::Finished => None,
    };
    Ok(ReferenceSolution { trajectory: tr, blowup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::ChartMode;
    use crate::mhd::Field;
    use crate::pressure::{make_mhd_law, PowerLaw, PressureLaw, Profile, ValidityDomain};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn coeffs(a0: f64, a1: f64, a2: f64) -> RiccatiCoefficients {
        RiccatiCoefficients {
            a0,
            a1,
            a2,
            h: 1.0,
            mu: 0.0,
            h0: 0.0,
        }
    }

    fn bounds(a1: f64, a0p: f64, a2: f64) -> CoefficientBounds {
        CoefficientBounds {
            sup_abs_a1: a1,
            sup_a0_plus: a0p,
            sup_a2: a2,
            inf_a2: a2,
        }
    }

    #[test]
    fn isentropic_coefficients() {
        let dom = ValidityDomain::new(0.2, 5.0, -1.0, 1.0).unwrap();
        let law: Arc<dyn PressureLaw> = Arc::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let h = 2.0 * 2f64.sqrt();
        let c = coefficients(&chart, h, 0.0).unwrap();
        assert_eq!((c.a0, c.a1), (0.0, 0.0));
        assert!((c.a2 - 0.75 * 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((c.a2 - 0.630672).abs() < 1e-6);
        let f = Field {
            b: 1.0,
            b1: 0.0,
            b2: 0.0,
        };
        assert!((c.a2 - f.a2(h)).abs() < 1e-15);
    }

    #[test]
    fn mhd_worked_coefficients() {
        let dom = ValidityDomain::new(0.1, 100.0, -0.5, 1.0).unwrap();
        let law: Arc<dyn PressureLaw> =
            Arc::new(make_mhd_law(Profile::Linear { value: 1.0, slope: 1.0 }, dom).unwrap());
        for mode in [ChartMode::Auto, ChartMode::Generic] {
            let chart = Chart::with_options(law.clone(), mode, Some(0.0), 0).unwrap();
            let c = coefficients(&chart, 1.0, 0.0).unwrap();
            assert!((c.a1 - 1.0 / 40.0).abs() < 1e-9, "{mode:?} {c:?}");
            assert!((c.a0 + 6.0 / 6400.0).abs() < 1e-9, "{mode:?} {c:?}");
        }
    }

    #[test]
    fn a1_is_minus_h_derivative_of_two_root_c_i() {
        let dom = ValidityDomain::new(0.2, 5.0, -1.0, 8.0).unwrap();
        let b = Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1.0,
            phase: 0.0,
        };
        let law: Arc<dyn PressureLaw> = Arc::new(make_mhd_law(b, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let g = |h: f64| {
            let p = chart.point_h(h, 0.8).unwrap();
            2.0 * p.c().sqrt() * chart.integrating_factor(h, 0.8).unwrap().value
        };
        let h = 2.4;
        let d = 1e-4;
        let fd = (g(h + d) - g(h - d)) / (2.0 * d);
        let c = coefficients(&chart, h, 0.8).unwrap();
        assert!((c.a1 + fd).abs() < 1e-8);
        assert!(c.a2 > 0.0);
    }

    #[test]
    fn roots_examples() {
        let p = phase_roots(&coeffs(1.0, 0.0, 1.0), 0.0, Branch::Forward);
        assert_eq!(p.roots, Some((-1.0, 1.0)));
        let p = phase_roots(&coeffs(0.0, 0.0, 1.0), 0.3, Branch::Backward);
        assert_eq!(p.roots, Some((0.0, 0.0)));
        let p = phase_roots(&coeffs(-1.0, 0.0, 1.0), 0.0, Branch::Forward);
        assert_eq!(p.roots, None);
        for xi in [-3.0, 0.0, 2.0] {
            assert!(p.psi(xi) < 0.0);
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_n(&bounds(0.0, 0.0, 1.0), 0.01).unwrap(), 0.0);
        assert_eq!(threshold_n(&bounds(0.0, 1.0, 1.0), 0.0).unwrap(), -1.0);
        assert_eq!(threshold_n(&bounds(1.0, 0.0, 1.0), 0.5).unwrap(), -2.0);
        assert!(matches!(threshold_n(&bounds(1.0, 0.0, 0.0), 0.5), Err(Error::Hyperbolicity { .. })));
    }

    #[test]
    fn lifespan_examples() {
        assert_eq!(lifespan_bound(-2.0, 0.0, 1.0, 0.5).unwrap(), 1.0);
        assert!(lifespan_bound(-1e12, 0.0, 1.0, 0.5).unwrap() < 1e-11);
        assert!(matches!(lifespan_bound(-0.5, -1.0, 1.0, 0.5), Err(Error::NotApplicable(_))));
        // exact p-system case y′ = −a₂y²
        assert_eq!(lifespan_bound(-2.0, 0.0, 1.0, 1.0).unwrap(), 0.5);
        let r = integrate_reference(|_| (0.0, 0.0, 1.0), Branch::Forward, -2.0, 0.0, 1.0).unwrap();
        assert!((r.blowup.unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn reference_examples() {
        let r = integrate_reference(|_| (0.0, 0.0, 1.0), Branch::Forward, 1.0, 0.0, 1.0).unwrap();
        assert!((r.trajectory.last().1[0] - 0.5).abs() < 1e-9);
        let r = integrate_reference(|_| (1.0, 0.0, 1.0), Branch::Forward, 0.0, 0.0, 1.0).unwrap();
        assert!((r.trajectory.last().1[0] - 0.761594).abs() < 1e-6);
        assert!(r.blowup.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn phase_line_signs(a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, a2 in 0.1..3.0f64, nu in 0.0..0.9f64) {
            for br in [Branch::Forward, Branch::Backward] {
                let p = phase_roots(&coeffs(a0, a1, a2), nu, br);
                if let Some((r1, r2)) = p.roots {
                    prop_assert!(p.psi(r1).abs() < 1e-9 && p.psi(r2).abs() < 1e-9);
                    if r2 - r1 > 1e-6 {
                        prop_assert!(p.psi(0.5 * (r1 + r2)) > 0.0);
                    }
                    prop_assert!(p.psi(r1 - 1.0) < 0.0 && p.psi(r2 + 1.0) < 0.0);
                } else {
                    prop_assert!(p.psi(0.0) < 0.0 && p.psi(a1) < 0.0);
                }
            }
        }

        #[test]
        fn branch_symmetry(a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, a2 in 0.1..3.0f64,
                           y0 in -0.5..2.0f64, xi in -3.0..3.0f64) {
            let m = phase_roots(&coeffs(a0, a1, a2), 0.0, Branch::Backward);
            let p = phase_roots(&coeffs(a0, -a1, a2), 0.0, Branch::Forward);
            prop_assert_eq!(m.psi(xi), p.psi(xi));
            let q = integrate_reference(|_| (a0, a1, a2), Branch::Backward, y0, 0.0, 1.0).unwrap();
            let y = integrate_reference(|_| (a0, -a1, a2), Branch::Forward, y0, 0.0, 1.0).unwrap();
            if q.blowup.is_none() {
                prop_assert!((q.trajectory.last().1[0] - y.trajectory.last().1[0]).abs() < 1e-12);
            }
        }

        #[test]
        fn invariant_region(a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, a2 in 0.1..3.0f64, off in 0.0..3.0f64) {
            let p = phase_roots(&coeffs(a0, a1, a2), 0.0, Branch::Forward);
            if let Some((r1, _)) = p.roots {
                let y0 = r1 + off + 1e-6;
                let r = integrate_reference(|_| (a0, a1, a2), Branch::Forward, y0, 0.0, 10.0).unwrap();
                prop_assert!(r.blowup.is_none());
                for y in &r.trajectory.y {
                    prop_assert!(y[0] >= r1 - 1e-8);
                }
            }
        }
    }

    /// Along a path obeying μ′ = c, h′ = −cβ − p_μ with prescribed β(t),
    /// the α-equation mapped through y = √c·α − I matches the y-equation.
    #[test]
    fn alpha_form_matches_y_form() {
        let dom = ValidityDomain::new(0.05, 20.0, -5.0, 20.0).unwrap();
        let b = Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.2,
            wavenumber: 1.3,
            phase: 0.4,
        };
        let law: Arc<dyn PressureLaw> = Arc::new(make_mhd_law(b, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let beta = |t: f64| 0.3 * (2.0 * t).sin() - 0.1;
        let (h0, mu0, alpha0) = (2.5, 0.3, -0.4);
        let p0 = chart.point_h(h0, mu0).unwrap();
        let i0 = chart.integrating_factor(h0, mu0).unwrap().value;
        let y0 = p0.c().sqrt() * alpha0 - i0;
        let tr = dopri5(
            |t, s, ds| {
                let (a, h, mu, y) = (s[0], s[1], s[2], s[3]);
                let p = chart.point_h(h, mu).unwrap();
                let f = chart.integrating_factor(h, mu).unwrap();
                let k = coefficients_at(&p, &f, chart.h0()).unwrap();
                let b = beta(t);
                ds[0] = alpha_prime(&p, a, b);
                ds[1] = -p.c() * b - p.p_mu;
                ds[2] = p.c();
                ds[3] = k.a0 + k.a1 * y - k.a2 * y * y;
            },
            0.0,
            &[alpha0, h0, mu0, y0],
            1.0,
            &OdeOptions {
                rtol: 1e-11,
                atol: 1e-13,
                ..OdeOptions::default()
            },
        )
        .unwrap();
        let (_, s) = tr.last();
        let p = chart.point_h(s[1], s[2]).unwrap();
        let i = chart.integrating_factor(s[1], s[2]).unwrap().value;
        let mapped = p.c().sqrt() * s[0] - i;
        assert!((mapped - s[3]).abs() < 1e-6, "{mapped} {}", s[3]);
        assert!((s[1] - h0).abs() > 1e-2);
    }

    /// Mirror of the above for β and q along μ‵ = −c, h‵ = −cα + p_μ.
    #[test]
    fn beta_form_matches_q_form() {
        let dom = ValidityDomain::new(0.05, 20.0, -5.0, 20.0).unwrap();
        let b = Profile::TanhStep {
            mean: 1.0,
            amplitude: 0.2,
            center: 0.0,
            width: 0.8,
        };
        let law: Arc<dyn PressureLaw> = Arc::new(make_mhd_law(b, dom).unwrap());
        let chart = Chart::new(law).unwrap();
        let alpha = |t: f64| 0.2 * (3.0 * t).cos();
        let (h0, mu0, beta0) = (2.0, 1.5, 0.3);
        let p0 = chart.point_h(h0, mu0).unwrap();
        let i0 = chart.integrating_factor(h0, mu0).unwrap().value;
        let q0 = p0.c().sqrt() * beta0 + i0;
        let tr = dopri5(
            |t, s, ds| {
                let (bb, h, mu, q) = (s[0], s[1], s[2], s[3]);
                let p = chart.point_h(h, mu).unwrap();
                let f = chart.integrating_factor(h, mu).unwrap();
                let k = coefficients_at(&p, &f, chart.h0()).unwrap();
                let a = alpha(t);
                ds[0] = beta_backprime(&p, a, bb);
                ds[1] = -p.c() * a + p.p_mu;
                ds[2] = -p.c();
                ds[3] = k.a0 - k.a1 * q - k.a2 * q * q;
            },
            0.0,
            &[beta0, h0, mu0, q0],
            1.0,
            &OdeOptions {
                rtol: 1e-11,
                atol: 1e-13,
                ..OdeOptions::default()
            },
        )
        .unwrap();
        let (_, s) = tr.last();
        let p = chart.point_h(s[1], s[2]).unwrap();
        let i = chart.integrating_factor(s[1], s[2]).unwrap().value;
        let mapped = p.c().sqrt() * s[0] + i;
        assert!((mapped - s[3]).abs() < 1e-6, "{mapped} {}", s[3]);
    }
}

//! Pressure laws p(v, x̄) with the partial derivatives the gradient
//! machinery needs.
//!
//! Throughout, `x` in a field name means the material coordinate x̄ with the
//! specific volume held fixed.

mod power;
mod profile;
mod tabulated;
mod validate;

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::coords::ClosedChart;
use crate::error::{Bound, Error, Result};

pub use power::{make_mhd_law, Amplitude, PowerLaw};
pub use profile::Profile;
pub use tabulated::TabulatedLaw;
pub use validate::{validate_law, BoundsSummary, ValidationReport};

/// Pressure and its partials at one (v, x̄).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PressureDerivs {
    pub p: f64,
    pub p_v: f64,
    pub p_vv: f64,
    pub p_x: f64,
    pub p_xv: f64,
    pub p_xx: f64,
    pub c: f64,
    pub c_v: f64,
    pub c_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityDomain {
    pub v_min: f64,
    pub v_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl ValidityDomain {
    pub fn new(v_min: f64, v_max: f64, x_min: f64, x_max: f64) -> Result<Self> {
        if !(v_min > 0.0 && v_max > v_min && x_max > x_min) {
            return Err(Error::Model(format!(
                "invalid validity domain v∈[{v_min}, {v_max}], x∈[{x_min}, {x_max}]"
            )));
        }
        Ok(ValidityDomain {
            v_min,
            v_max,
            x_min,
            x_max,
        })
    }

    pub fn check(&self, v: f64, x: f64) -> Result<()> {
        let fail = |bound, value, lo, hi| Err(Error::Domain { bound, value, lo, hi });
        if !(v >= self.v_min) {
            return fail(Bound::VMin, v, self.v_min, self.v_max);
        }
        if !(v <= self.v_max) {
            return fail(Bound::VMax, v, self.v_min, self.v_max);
        }
        if !(x >= self.x_min) {
            return fail(Bound::XMin, x, self.x_min, self.x_max);
        }
        if !(x <= self.x_max) {
            return fail(Bound::XMax, x, self.x_min, self.x_max);
        }
        Ok(())
    }

    pub fn contains(&self, v: f64, x: f64) -> bool {
        self.check(v, x).is_ok()
    }
}

/// Upper limit of the integral defining h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VStar {
    Infinite,
    Finite(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawMeta {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub v_star: VStar,
}

pub trait PressureLaw: Debug + Send + Sync {
    /// Raw derivative record, no domain or sign checks.
    fn kernel(&self, v: f64, x: f64) -> PressureDerivs;

    fn meta(&self) -> LawMeta;

    fn domain(&self) -> ValidityDomain;

    fn v_star(&self) -> VStar {
        VStar::Infinite
    }

    /// Closed-form chart quantities, when the law has them.
    fn closed_chart(&self) -> Option<&dyn ClosedChart> {
        None
    }

    /// Checked evaluation. `c` is recomputed as sqrt(−p_v) and p_v is then
    /// replaced by −c², so that c² + p_v = 0 holds exactly.
    fn eval(&self, v: f64, x: f64) -> Result<PressureDerivs> {
        self.domain().check(v, x)?;
        normalize(self.kernel(v, x), v, x)
    }
}

pub(crate) fn normalize(mut d: PressureDerivs, v: f64, x: f64) -> Result<PressureDerivs> {
    if !(d.p_v < 0.0) {
        return Err(Error::Hyperbolicity {
            v,
            x,
            what: format!("p_v = {} is not negative", d.p_v),
        });
    }
    let c = (-d.p_v).sqrt();
    d.c = c;
    d.p_v = -(c * c);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::central2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn builtins() -> Vec<Box<dyn PressureLaw>> {
        let dom = ValidityDomain::new(0.3, 3.0, -2.0, 8.0).unwrap();
        vec![
            Box::new(PowerLaw::isentropic(2.0, 1.0, dom).unwrap()),
            Box::new(PowerLaw::isentropic(1.4, 2.5, dom).unwrap()),
            Box::new(
                PowerLaw::with_entropy(
                    1.4,
                    1.0,
                    1.0,
                    Profile::Sinusoidal {
                        mean: 0.0,
                        amplitude: 0.3,
                        wavenumber: 1.0,
                        phase: 0.0,
                    },
                    dom,
                )
                .unwrap(),
            ),
            Box::new(
                make_mhd_law(
                    Profile::TanhStep {
                        mean: 1.0,
                        amplitude: 0.1,
                        center: 1.0,
                        width: 1.0,
                    },
                    dom,
                )
                .unwrap(),
            ),
            Box::new(
                TabulatedLaw::new(
                    (0..60).map(|i| 0.25 + i as f64 * 0.05).collect(),
                    (0..60).map(|i| (0.25 + i as f64 * 0.05f64).powf(-1.6)).collect(),
                    Profile::Linear {
                        value: 1.0,
                        slope: 0.05,
                    },
                    dom,
                )
                .unwrap(),
            ),
        ]
    }

    #[test]
    fn isentropic_values() {
        let dom = ValidityDomain::new(0.1, 10.0, -1.0, 1.0).unwrap();
        let law = PowerLaw::isentropic(2.0, 1.0, dom).unwrap();
        let d = law.eval(1.0, 0.0).unwrap();
        assert_eq!(d.p, 1.0);
        assert!((d.p_v + 2.0).abs() < 1e-15);
        assert!((d.c - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mhd_unit_field_wavespeed() {
        let dom = ValidityDomain::new(0.1, 10.0, -1.0, 1.0).unwrap();
        let law = make_mhd_law(Profile::constant(1.0), dom).unwrap();
        let d = law.eval(1.0, 0.0).unwrap();
        assert!((d.c - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(law.eval(2.0, 0.0).unwrap().p, 0.25);
        assert_eq!(d.p_x, 0.0);
    }

    #[test]
    fn mhd_linear_field() {
        let dom = ValidityDomain::new(0.1, 10.0, -0.5, 2.0).unwrap();
        let law = make_mhd_law(Profile::Linear { value: 1.0, slope: 1.0 }, dom).unwrap();
        let d = law.eval(1.0, 1.0).unwrap();
        assert_eq!(d.p, 2.0);
        assert_eq!(d.p_x, 1.0);
    }

    #[test]
    fn domain_errors_name_the_bound() {
        let dom = ValidityDomain::new(0.5, 2.0, 0.0, 1.0).unwrap();
        let law = PowerLaw::isentropic(2.0, 1.0, dom).unwrap();
        match law.eval(0.1, 0.5) {
            Err(Error::Domain { bound, .. }) => assert_eq!(bound, Bound::VMin),
            other => panic!("{other:?}"),
        }
        match law.eval(1.0, 1.5) {
            Err(Error::Domain { bound, .. }) => assert_eq!(bound, Bound::XMax),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_p_v_is_rejected() {
        let d = PressureDerivs {
            p_v: 0.5,
            ..Default::default()
        };
        assert!(matches!(normalize(d, 1.0, 0.0), Err(Error::Hyperbolicity { .. })));
    }

    #[test]
    fn derivatives_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for law in builtins() {
            let dom = law.domain();
            for _ in 0..1000 {
                let v = rng.gen_range(dom.v_min + 0.01..dom.v_max - 0.01);
                let x = rng.gen_range(dom.x_min + 0.01..dom.x_max - 0.01);
                let d = law.eval(v, x).unwrap();
                assert_eq!(d.c * d.c + d.p_v, 0.0);
                assert_eq!(d.c, (-d.p_v).sqrt());
                let k = law.kernel(v, x);
                assert!((k.c - d.c).abs() <= 1e-12 * d.c, "{law:?}");
                assert!((k.c_v + k.p_vv / (2.0 * d.c)).abs() <= 1e-10 * k.c_v.abs().max(1e-300));
                let pv = |t: f64| law.kernel(t, x).p_v;
                let fd_vv = central2(pv, v, 1e-5);
                assert!((d.p_vv - fd_vv).abs() <= 1e-6 * (1.0 + d.p_vv.abs()), "{law:?} {v} {x}");
                let p = |t: f64| law.kernel(t, x).p;
                let fd_v = central2(p, v, 1e-5);
                assert!((k.p_v - fd_v).abs() <= 1e-8 * k.p_v.abs(), "{law:?}");
                let px = |t: f64| law.kernel(v, t).p;
                let fd_x = central2(px, x, 1e-5);
                assert!((k.p_x - fd_x).abs() <= 1e-8 * (1.0 + k.p.abs()), "{law:?}");
                let pxv = |t: f64| law.kernel(t, x).p_x;
                assert!((k.p_xv - central2(pxv, v, 1e-5)).abs() <= 1e-7 * (1.0 + k.p_xv.abs()));
                let pxx = |t: f64| law.kernel(v, t).p_x;
                assert!((k.p_xx - central2(pxx, x, 1e-5)).abs() <= 1e-7 * (1.0 + k.p_xx.abs()));
                let cx = |t: f64| law.kernel(v, t).c;
                assert!((k.c_x - central2(cx, x, 1e-5)).abs() <= 1e-8 * (1.0 + k.c.abs()));
            }
        }
    }

    #[test]
    fn flat_field_reproduces_isentropic_bitwise() {
        let dom = ValidityDomain::new(0.3, 3.0, -2.0, 2.0).unwrap();
        let iso = PowerLaw::isentropic(2.0, 1.3, dom).unwrap();
        let flat = [
            Profile::constant(1.3),
            Profile::Linear {
                value: 1.3,
                slope: 0.0,
            },
            Profile::Sinusoidal {
                mean: 1.3,
                amplitude: 0.0,
                wavenumber: 1.0,
                phase: 0.0,
            },
        ];
        for b in flat {
            let mhd = make_mhd_law(b, dom).unwrap();
            for i in 0..50 {
                let v = 0.3 + i as f64 * 0.05;
                let x = -2.0 + i as f64 * 0.08;
                let a = iso.eval(v, x).unwrap();
                let m = mhd.eval(v, x).unwrap();
                assert_eq!(a.p.to_bits(), m.p.to_bits());
                assert_eq!(a.p_v.to_bits(), m.p_v.to_bits());
                assert_eq!(a.p_vv.to_bits(), m.p_vv.to_bits());
            }
        }
    }
}

use std::collections::BTreeMap;

use super::{LawMeta, PressureDerivs, PressureLaw, Profile, VStar, ValidityDomain};
use crate::error::{Error, Result};
use crate::numerics::spline::CubicSpline;

/// p(v, x̄) = A(x̄)·P(v), with P from a natural cubic spline of ln P against ln v.
#[derive(Debug, Clone)]
pub struct TabulatedLaw {
    spline: CubicSpline,
    amplitude: Profile,
    domain: ValidityDomain,
    v_table_max: f64,
}

impl TabulatedLaw {
    pub fn new(v: Vec<f64>, p: Vec<f64>, amplitude: Profile, domain: ValidityDomain) -> Result<Self> {
        if v.len() != p.len() {
            return Err(Error::Model("table columns v and p differ in length".into()));
        }
        if v.iter().chain(&p).any(|t| !(*t > 0.0)) {
            return Err(Error::Model("table entries must be positive".into()));
        }
        let v_lo = v[0];
        let v_hi = *v.last().unwrap_or(&0.0);
        let lv: Vec<f64> = v.iter().map(|t| t.ln()).collect();
        let lp: Vec<f64> = p.iter().map(|t| t.ln()).collect();
        let spline = CubicSpline::new(lv, lp)?;
        if domain.v_min < v_lo || domain.v_max > v_hi {
            return Err(Error::Model(format!(
                "validity domain v∈[{}, {}] exceeds table range [{v_lo}, {v_hi}]",
                domain.v_min, domain.v_max
            )));
        }
        let lo = amplitude.min_over(domain.x_min, domain.x_max);
        if !(lo > 0.0) {
            return Err(Error::Model(format!(
                "amplitude profile must stay positive; minimum sampled value {lo}"
            )));
        }
        Ok(TabulatedLaw {
            spline,
            amplitude,
            domain,
            v_table_max: v_hi,
        })
    }
}

impl PressureLaw for TabulatedLaw {
    fn kernel(&self, v: f64, x: f64) -> PressureDerivs {
        let (l, l1, l2) = self.spline.eval(v.ln());
        let (a, a1, a2) = self.amplitude.eval(x);
        let base = l.exp();
        let bv = base * l1 / v;
        let bvv = base * (l2 + l1 * l1 - l1) / (v * v);
        let p_v = a * bv;
        let p_vv = a * bvv;
        let p_xv = a1 * bv;
        let c = (-p_v).max(0.0).sqrt();
        PressureDerivs {
            p: a * base,
            p_v,
            p_vv,
            p_x: a1 * base,
            p_xv,
            p_xx: a2 * base,
            c,
            c_v: -p_vv / (2.0 * c),
            c_x: -p_xv / (2.0 * c),
        }
    }

    fn meta(&self) -> LawMeta {
        let mut params = BTreeMap::new();
        params.insert("v_table_min".to_string(), self.spline.x_min().exp());
        params.insert("v_table_max".to_string(), self.v_table_max);
        LawMeta {
            name: "tabulated".to_string(),
            params,
            v_star: self.v_star(),
        }
    }

    fn domain(&self) -> ValidityDomain {
        self.domain
    }

    fn v_star(&self) -> VStar {
        VStar::Finite(self.v_table_max)
    }
}

use std::sync::Arc;

use serde::Serialize;

use super::PressureLaw;
use crate::coords::{Chart, ChartPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSummary {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Range of chart quantities over a sample set. Two lists are kept: the
/// quantities named in the compact-set assumption, and those the blowup
/// argument actually uses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub law: String,
    pub samples: usize,
    pub assumption: Vec<BoundsSummary>,
    pub proof: Vec<BoundsSummary>,
}

impl ValidationReport {
    pub fn get(&self, name: &str) -> Option<&BoundsSummary> {
        self.assumption.iter().chain(&self.proof).find(|b| b.name == name)
    }
}

struct Acc(Vec<BoundsSummary>);

impl Acc {
    fn new(names: &[&str]) -> Self {
        Acc(names
            .iter()
            .map(|n| BoundsSummary {
                name: n.to_string(),
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            })
            .collect())
    }

    fn push(&mut self, vals: &[f64]) {
        for (b, v) in self.0.iter_mut().zip(vals) {
            b.min = b.min.min(*v);
            b.max = b.max.max(*v);
        }
    }
}

/// Check the sign conditions at every sample and report the ranges of the
/// chart quantities. Second derivatives in the (h, μ) chart are taken by
/// central differences of the first-derivative fields.
pub fn validate_law(law: Arc<dyn PressureLaw>, samples: &[(f64, f64)]) -> Result<ValidationReport> {
    if samples.is_empty() {
        return Err(Error::Model("validation needs at least one sample point".into()));
    }
    let name = law.meta().name;
    let chart = Chart::new(law.clone())?;
    let mut assumption = Acc::new(&["|h|", "c", "c_h", "|c_mu|", "|c_mumu|", "|c_hmu|", "|p_mu|", "|p_mumu|"]);
    let mut proof = Acc::new(&["h", "c", "c_h", "|p_mu|", "|p_muh|", "|p_muhh|", "|p_mumuh|"]);
    for &(v, x) in samples {
        let k = law.kernel(v, x);
        if !(k.p_vv > 0.0) {
            return Err(Error::Hyperbolicity {
                v,
                x,
                what: format!("p_vv = {} is not positive", k.p_vv),
            });
        }
        let p = chart.point(v, x)?;
        if !(p.c_h > 0.0) {
            return Err(Error::Hyperbolicity {
                v,
                x,
                what: format!("c_h = {} is not positive", p.c_h),
            });
        }
        let second = second_derivatives(&chart, &p)?;
        assumption.push(&[
            p.h.abs(),
            p.c(),
            p.c_h,
            p.c_mu.abs(),
            second.c_mumu.abs(),
            second.c_hmu.abs(),
            p.p_mu.abs(),
            second.p_mumu.abs(),
        ]);
        proof.push(&[
            p.h,
            p.c(),
            p.c_h,
            p.p_mu.abs(),
            second.p_muh.abs(),
            second.p_muhh.abs(),
            second.p_mumuh.abs(),
        ]);
    }
    Ok(ValidationReport {
        law: name,
        samples: samples.len(),
        assumption: assumption.0,
        proof: proof.0,
    })
}

struct Second {
    c_mumu: f64,
    c_hmu: f64,
    p_mumu: f64,
    p_muh: f64,
    p_muhh: f64,
    p_mumuh: f64,
}

fn second_derivatives(chart: &Chart, p: &ChartPoint) -> Result<Second> {
    let dh = 1e-3 * p.h;
    let dm = 1e-3 * p.mu.abs().max(1.0);
    let at = |h: f64, mu: f64| chart.point_h_unchecked(h, mu);
    let (h, mu) = (p.h, p.mu);
    let hp = at(h + dh, mu)?;
    let hm = at(h - dh, mu)?;
    let mp = at(h, mu + dm)?;
    let mm = at(h, mu - dm)?;
    let pp = at(h + dh, mu + dm)?;
    let pm = at(h + dh, mu - dm)?;
    let mpp = at(h - dh, mu + dm)?;
    let mmm = at(h - dh, mu - dm)?;
    let p_muh = (hp.p_mu - hm.p_mu) / (2.0 * dh);
    let p_muhh = (hp.p_mu - 2.0 * p.p_mu + hm.p_mu) / (dh * dh);
    let p_mumu = (mp.p_mu - mm.p_mu) / (2.0 * dm);
    let c_mumu = (mp.c_mu - mm.c_mu) / (2.0 * dm);
    let c_hmu = (hp.c_mu - hm.c_mu) / (2.0 * dh);
    let p_mumuh = ((pp.p_mu - pm.p_mu) - (mpp.p_mu - mmm.p_mu)) / (4.0 * dh * dm);
    Ok(Second {
        c_mumu,
        c_hmu,
        p_mumu,
        p_muh,
        p_muhh,
        p_mumuh,
    })
}

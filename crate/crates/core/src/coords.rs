//! The (v, x̄) ↔ (h, μ) change of variables, with h = ∫_v^{v*} c dv and
//! μ = x̄, plus the integrating factor I(h, μ).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Bound, Error, Result};
use crate::numerics::central4;
use crate::numerics::quadrature::{simpson, simpson_to_infinity};
use crate::pressure::{normalize, PressureDerivs, PressureLaw, PowerLaw, VStar};

/// Tolerance used for the h integrals. Tighter than the integrating-factor
/// tolerance because Newton inversion of h reuses it incrementally.
const H_TOL: f64 = 1e-12;
const I_TOL: f64 = 1e-10;

/// I together with its partials in the (h, μ) chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratingFactor {
    pub value: f64,
    pub d_h: f64,
    pub d_mu: f64,
}

/// Quantities available in closed form for some laws.
pub trait ClosedChart: Send + Sync {
    fn h_of_v(&self, v: f64, x: f64) -> f64;
    fn v_of_h(&self, h: f64, mu: f64) -> f64;
    /// ∂h/∂x̄ at fixed v.
    fn h_x(&self, v: f64, x: f64) -> f64;
    /// (p_μ/c)_h
    fn pmu_c_h(&self, h: f64, mu: f64) -> f64;
    fn integrating_factor(&self, h: f64, mu: f64, h0: f64) -> IntegratingFactor;
}

/// One point expressed in both charts, with the h-chart partials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub v: f64,
    pub x: f64,
    pub h: f64,
    pub mu: f64,
    pub derivs: PressureDerivs,
    pub h_x: f64,
    pub c_h: f64,
    pub c_mu: f64,
    pub p_mu: f64,
    pub pmu_c_h: f64,
}

impl ChartPoint {
    pub fn c(&self) -> f64 {
        self.derivs.c
    }
}

/// (f_h, f_μ) from (f_v, f_x̄).
pub fn chain_rules(f_v: f64, f_x: f64, c: f64, h_x: f64) -> (f64, f64) {
    (-f_v / c, f_v / c * h_x + f_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartMode {
    /// Closed forms when the law provides them.
    Auto,
    /// Quadrature and finite differences only.
    Generic,
}

/// Memo of quadrature results keyed on exact argument bits.
#[derive(Debug)]
pub struct IntegralCache {
    capacity: usize,
    h: Mutex<HashMap<(u64, u64), f64>>,
    i: Mutex<HashMap<(u64, u64), IntegratingFactor>>,
}

impl IntegralCache {
    pub fn new(capacity: usize) -> Self {
        IntegralCache {
            capacity,
            h: Mutex::new(HashMap::new()),
            i: Mutex::new(HashMap::new()),
        }
    }

    fn get_or<T: Copy>(
        &self,
        map: &Mutex<HashMap<(u64, u64), T>>,
        a: f64,
        b: f64,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        if self.capacity == 0 {
            return compute();
        }
        let key = (a.to_bits(), b.to_bits());
        if let Some(v) = map.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        let mut m = map.lock().unwrap();
        if m.len() >= self.capacity {
            m.clear();
        }
        m.insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.h.lock().unwrap().len() + self.i.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub const DEFAULT_CACHE_NODES: usize = 65536;

/// A law together with its chart conventions (h₀, closed or generic path).
#[derive(Debug, Clone)]
pub struct Chart {
    law: Arc<dyn PressureLaw>,
    mode: ChartMode,
    h0: f64,
    cache: Arc<IntegralCache>,
}

impl Chart {
    pub fn new(law: Arc<dyn PressureLaw>) -> Result<Self> {
        Self::with_options(law, ChartMode::Auto, None, DEFAULT_CACHE_NODES)
    }

    /// `h0 = None` uses h(v = 1, x̄ = 0).
    pub fn with_options(
        law: Arc<dyn PressureLaw>,
        mode: ChartMode,
        h0: Option<f64>,
        cache_nodes: usize,
    ) -> Result<Self> {
        let mut chart = Chart {
            law,
            mode,
            h0: 0.0,
            cache: Arc::new(IntegralCache::new(cache_nodes)),
        };
        chart.h0 = match h0 {
            Some(h) if h >= 0.0 && h.is_finite() => h,
            Some(h) => {
                return Err(Error::Domain {
                    bound: Bound::HMin,
                    value: h,
                    lo: 0.0,
                    hi: f64::INFINITY,
                })
            }
            None => chart.h_unchecked(1.0, 0.0)?,
        };
        Ok(chart)
    }

    pub fn generic(law: Arc<dyn PressureLaw>) -> Result<Self> {
        Self::with_options(law, ChartMode::Generic, None, DEFAULT_CACHE_NODES)
    }

    pub fn law(&self) -> &dyn PressureLaw {
        self.law.as_ref()
    }

    pub fn law_arc(&self) -> Arc<dyn PressureLaw> {
        self.law.clone()
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn mode(&self) -> ChartMode {
        self.mode
    }

    pub fn cache(&self) -> &IntegralCache {
        &self.cache
    }

    fn closed(&self) -> Option<&dyn ClosedChart> {
        match self.mode {
            ChartMode::Auto => self.law.closed_chart(),
            ChartMode::Generic => None,
        }
    }

    fn h_unchecked(&self, v: f64, x: f64) -> Result<f64> {
        match self.closed() {
            Some(cc) => Ok(cc.h_of_v(v, x)),
            None => self
                .cache
                .get_or(&self.cache.h, v, x, || generic_h(self.law(), v, x)),
        }
    }

    pub fn h_of_v(&self, v: f64, x: f64) -> Result<f64> {
        self.law.domain().check(v, x)?;
        self.h_unchecked(v, x)
    }

    /// ∂h/∂x̄ at fixed v.
    pub fn h_x(&self, v: f64, x: f64) -> Result<f64> {
        match self.closed() {
            Some(cc) => Ok(cc.h_x(v, x)),
            None => generic_h_x(self.law(), v, x),
        }
    }

    /// Image of the validity domain's v-range under h at fixed μ.
    pub fn h_range(&self, mu: f64) -> Result<(f64, f64)> {
        let dom = self.law.domain();
        Ok((self.h_unchecked(dom.v_max, mu)?, self.h_unchecked(dom.v_min, mu)?))
    }

    pub fn v_of_h(&self, h: f64, mu: f64) -> Result<f64> {
        let dom = self.law.domain();
        if !(mu >= dom.x_min && mu <= dom.x_max) {
            dom.check(dom.v_min, mu)?;
        }
        let (lo, hi) = self.h_range(mu)?;
        if !(h >= lo * (1.0 - 1e-14)) {
            return Err(Error::Domain {
                bound: Bound::HMin,
                value: h,
                lo,
                hi,
            });
        }
        if !(h <= hi * (1.0 + 1e-14)) {
            return Err(Error::Domain {
                bound: Bound::HMax,
                value: h,
                lo,
                hi,
            });
        }
        let v = match self.closed() {
            Some(cc) => cc.v_of_h(h, mu),
            None => generic_v_of_h(self.law(), h, mu)?,
        };
        Ok(v.clamp(dom.v_min, dom.v_max))
    }

    /// Full chart record at (v, x̄).
    pub fn point(&self, v: f64, x: f64) -> Result<ChartPoint> {
        let d = self.law.eval(v, x)?;
        self.point_from(v, x, d)
    }

    /// As `point_h`, but without the validity-domain check (used for
    /// difference stencils that straddle the domain edge).
    pub(crate) fn point_h_unchecked(&self, h: f64, mu: f64) -> Result<ChartPoint> {
        let v = match self.closed() {
            Some(cc) => cc.v_of_h(h, mu),
            None => generic_v_of_h(self.law(), h, mu)?,
        };
        let d = normalize(self.law.kernel(v, mu), v, mu)?;
        let mut p = self.point_from(v, mu, d)?;
        p.h = h;
        Ok(p)
    }

    fn point_from(&self, v: f64, x: f64, d: PressureDerivs) -> Result<ChartPoint> {
        let h = self.h_unchecked(v, x)?;
        let h_x = self.h_x(v, x)?;
        let pmu_c_h = match self.closed() {
            Some(cc) => cc.pmu_c_h(h, x),
            None => generic_pmu_c_h(self.law(), v, x),
        };
        Ok(assemble(v, x, h, d, h_x, pmu_c_h))
    }

    pub fn point_h(&self, h: f64, mu: f64) -> Result<ChartPoint> {
        let v = self.v_of_h(h, mu)?;
        let mut p = self.point(v, mu)?;
        p.h = h;
        Ok(p)
    }

    /// I(h, μ) with the chart's h₀, and its partials.
    pub fn integrating_factor(&self, h: f64, mu: f64) -> Result<IntegratingFactor> {
        self.integrating_factor_from(h, mu, self.h0)
    }

    pub fn integrating_factor_from(&self, h: f64, mu: f64, h0: f64) -> Result<IntegratingFactor> {
        if !(h0 >= 0.0) {
            return Err(Error::Domain {
                bound: Bound::HMin,
                value: h0,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        match self.closed() {
            Some(cc) => Ok(cc.integrating_factor(h, mu, h0)),
            None => {
                let v = self.v_of_h(h, mu)?;
                if h0 == self.h0 {
                    self.cache
                        .get_or(&self.cache.i, h, mu, || generic_integrating_factor(self.law(), v, mu, h0))
                } else {
                    generic_integrating_factor(self.law(), v, mu, h0)
                }
            }
        }
    }
}

fn assemble(v: f64, x: f64, h: f64, d: PressureDerivs, h_x: f64, pmu_c_h: f64) -> ChartPoint {
    let (c_h, c_mu) = chain_rules(d.c_v, d.c_x, d.c, h_x);
    let (_, p_mu) = chain_rules(d.p_v, d.p_x, d.c, h_x);
    ChartPoint {
        v,
        x,
        h,
        mu: x,
        derivs: d,
        h_x,
        c_h,
        c_mu,
        p_mu,
        pmu_c_h,
    }
}

pub fn h_of_v(law: &dyn PressureLaw, v: f64, x: f64) -> Result<f64> {
    law.domain().check(v, x)?;
    match law.closed_chart() {
        Some(cc) => Ok(cc.h_of_v(v, x)),
        None => generic_h(law, v, x),
    }
}

pub fn v_of_h(law: Arc<dyn PressureLaw>, h: f64, mu: f64) -> Result<f64> {
    Chart::with_options(law, ChartMode::Auto, Some(0.0), 0)?.v_of_h(h, mu)
}

pub fn integrating_factor(law: Arc<dyn PressureLaw>, h: f64, mu: f64, h0: f64) -> Result<IntegratingFactor> {
    Chart::with_options(law, ChartMode::Auto, Some(h0), 0)?.integrating_factor(h, mu)
}

fn wavespeed(law: &dyn PressureLaw, w: f64, x: f64) -> f64 {
    (-law.kernel(w, x).p_v).sqrt()
}

fn integrate_to_vstar<F: Fn(f64) -> f64>(law: &dyn PressureLaw, f: F, v: f64, tol: f64) -> Result<f64> {
    match law.v_star() {
        VStar::Infinite => simpson_to_infinity(f, v, tol),
        VStar::Finite(vs) => Ok(simpson(f, v, vs, tol)),
    }
}

/// h by quadrature.
pub fn generic_h(law: &dyn PressureLaw, v: f64, x: f64) -> Result<f64> {
    integrate_to_vstar(law, |w| wavespeed(law, w, x), v, H_TOL)
}

/// ∂h/∂x̄ = ∫_v^{v*} c_x̄ dv by quadrature.
pub fn generic_h_x(law: &dyn PressureLaw, v: f64, x: f64) -> Result<f64> {
    integrate_to_vstar(
        law,
        |w| {
            let k = law.kernel(w, x);
            -k.p_xv / (2.0 * (-k.p_v).sqrt())
        },
        v,
        H_TOL,
    )
}

/// (p_μ/c)_h = −(∂_v[p_x̄/c] + c_x̄)/c, with ∂_v by 4th-order differences.
pub fn generic_pmu_c_h(law: &dyn PressureLaw, v: f64, x: f64) -> f64 {
    let ratio = |w: f64| {
        let k = law.kernel(w, x);
        k.p_x / (-k.p_v).sqrt()
    };
    let k = law.kernel(v, x);
    let c = (-k.p_v).sqrt();
    let c_x = -k.p_xv / (2.0 * c);
    -(central4(ratio, v, 1e-4 * v) + c_x) / c
}

/// Monotone inverse of h by safeguarded Newton, falling back to bisection.
pub fn generic_v_of_h(law: &dyn PressureLaw, h: f64, mu: f64) -> Result<f64> {
    let dom = law.domain();
    let mut lo = dom.v_min;
    let mut hi = match law.v_star() {
        VStar::Finite(vs) => vs,
        VStar::Infinite => dom.v_max,
    };
    let h_hi = generic_h(law, hi, mu)?;
    if h < h_hi {
        if let VStar::Finite(_) = law.v_star() {
            return Err(Error::Domain {
                bound: Bound::HMin,
                value: h,
                lo: h_hi,
                hi: f64::INFINITY,
            });
        }
        // beyond the domain: expand outward (needed for reference points)
        let mut k = 0;
        while generic_h(law, hi, mu)? > h {
            lo = hi;
            hi *= 4.0;
            k += 1;
            if k > 60 {
                return Err(Error::Domain {
                    bound: Bound::HMin,
                    value: h,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
    }
    while generic_h(law, lo, mu)? < h {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::Domain {
                bound: Bound::HMax,
                value: h,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
    }
    let mut w = (lo * hi).sqrt();
    let mut hw = generic_h(law, w, mu)?;
    for _ in 0..200 {
        let r = hw - h;
        if r > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let c = wavespeed(law, w, mu);
        let mut next = w + r / c;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-15 * w {
            return Ok(next);
        }
        hw -= simpson(|t| wavespeed(law, t, mu), w, next, 1e-3 * H_TOL);
        w = next;
        if (hi - lo) <= 1e-15 * w {
            return Ok(w);
        }
    }
    Ok(w)
}

/// Plain bisection inverse, used to cross-check the Newton path.
pub fn v_of_h_bisect(law: &dyn PressureLaw, h: f64, mu: f64) -> Result<f64> {
    let dom = law.domain();
    let (mut lo, mut hi) = (dom.v_min, dom.v_max);
    let (h_lo, h_hi) = (generic_h(law, lo, mu)?, generic_h(law, hi, mu)?);
    if !(h <= h_lo && h >= h_hi) {
        return Err(Error::Domain {
            bound: if h > h_lo { Bound::HMax } else { Bound::HMin },
            value: h,
            lo: h_hi,
            hi: h_lo,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if generic_h(law, mid, mu)? > h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ½√c·(p_μ/c)_h written in v: ¼√c·(p_x̄/p_v)_v.
fn if_density(k: &PressureDerivs) -> f64 {
    let c = (-k.p_v).sqrt();
    let r = (k.p_xv * k.p_v - k.p_x * k.p_vv) / (k.p_v * k.p_v);
    0.25 * c.sqrt() * r
}

/// I = ¼∫_v^{v₀} c^{3/2}(p_x̄/p_v)_v dv, v₀ = v(h₀, μ); I_μ by
/// differentiating under the integral.
pub fn generic_integrating_factor(law: &dyn PressureLaw, v: f64, mu: f64, h0: f64) -> Result<IntegratingFactor> {
    let k = law.kernel(v, mu);
    let density = |w: f64| if_density(&law.kernel(w, mu));
    let integrand = |w: f64| density(w) * wavespeed(law, w, mu);
    let dx = 1e-4 * mu.abs().max(1.0);
    let d_mu_integrand = |w: f64| {
        let kk = law.kernel(w, mu);
        let c = (-kk.p_v).sqrt();
        let c_x = -kk.p_xv / (2.0 * c);
        let f_x = central4(|t| if_density(&law.kernel(w, t)), mu, dx);
        if_density(&kk) * c_x + f_x * c
    };
    let d_h = if_density(&k);
    let h_x_v = generic_h_x(law, v, mu)?;
    let to_star = h0 == 0.0;
    let (value, interior, boundary) = if to_star {
        let value = integrate_to_vstar(law, integrand, v, I_TOL)?;
        let interior = integrate_to_vstar(law, d_mu_integrand, v, I_TOL)?;
        (value, interior, 0.0)
    } else {
        let v0 = generic_v_of_h(law, h0, mu)?;
        let value = simpson(integrand, v, v0, I_TOL);
        let interior = simpson(d_mu_integrand, v, v0, I_TOL);
        let boundary = density(v0) * generic_h_x(law, v0, mu)?;
        (value, interior, boundary)
    };
    Ok(IntegratingFactor {
        value,
        d_h,
        d_mu: boundary - d_h * h_x_v + interior,
    })
}

/// Exponents and constants of the power-law chart, p = A v^{−γ}.
struct PowerChart {
    gamma: f64,
    /// 1/(γ−1)
    m: f64,
    /// (3γ−1)/(2(γ−1)), the exponent in I
    s: f64,
    /// c = c_coef·A^{−m}·h^e
    c_coef: f64,
}

impl PowerChart {
    fn new(gamma: f64) -> Self {
        let m = 1.0 / (gamma - 1.0);
        let e = (gamma + 1.0) * m;
        PowerChart {
            gamma,
            m,
            s: (3.0 * gamma - 1.0) * 0.5 * m,
            c_coef: gamma.sqrt() * ((gamma - 1.0) / (2.0 * gamma.sqrt())).powf(e),
        }
    }
}

impl ClosedChart for PowerLaw {
    fn h_of_v(&self, v: f64, x: f64) -> f64 {
        let g = self.gamma();
        let (a, _, _) = self.amplitude().eval(x);
        2.0 * (g * a).sqrt() / (g - 1.0) * v.powf(-0.5 * (g - 1.0))
    }

    fn v_of_h(&self, h: f64, mu: f64) -> f64 {
        let g = self.gamma();
        let (a, _, _) = self.amplitude().eval(mu);
        (h * (g - 1.0) / (2.0 * (g * a).sqrt())).powf(-2.0 / (g - 1.0))
    }

    fn h_x(&self, v: f64, x: f64) -> f64 {
        let (a, a1, _) = self.amplitude().eval(x);
        0.5 * a1 / a * ClosedChart::h_of_v(self, v, x)
    }

    fn pmu_c_h(&self, _h: f64, mu: f64) -> f64 {
        let (a, a1, _) = self.amplitude().eval(mu);
        -a1 / a / (2.0 * self.gamma())
    }

    fn integrating_factor(&self, h: f64, mu: f64, h0: f64) -> IntegratingFactor {
        let pc = PowerChart::new(self.gamma());
        let (a, a1, a2) = self.amplitude().eval(mu);
        let lambda = a1 / a;
        let lambda_x = a2 / a - lambda * lambda;
        let scale = -pc.c_coef.sqrt() / (4.0 * pc.gamma * pc.s) * a.powf(-0.5 * pc.m);
        let phi = scale * lambda;
        let phi_x = scale * (lambda_x - 0.5 * pc.m * lambda * lambda);
        let span = h.powf(pc.s) - h0.powf(pc.s);
        IntegratingFactor {
            value: phi * span,
            d_h: phi * pc.s * h.powf(pc.s - 1.0),
            d_mu: phi_x * span,
        }
    }
}

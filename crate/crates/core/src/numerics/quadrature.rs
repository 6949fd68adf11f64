use crate::error::{Error, Result};

pub const ABS_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson on [a, b]. Reversed limits give the negated integral.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of `f` over [a, ∞) for a > 0, via w = a·e^τ.
///
/// The τ-integrand is summed over unit panels until it has decayed far enough
/// that an exponential tail estimate is below tolerance.
pub fn simpson_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Model(format!(
            "semi-infinite quadrature needs a positive lower limit, got {a}"
        )));
    }
    let g = |tau: f64| {
        let w = a * tau.exp();
        f(w) * w
    };
    let panel_tol = 0.01 * tol;
    let mut total = 0.0;
    let mut prev = g(0.0).abs();
    let mut k = 0.0;
    while k < 600.0 {
        total += simpson(&g, k, k + 1.0, panel_tol);
        k += 1.0;
        let cur = g(k).abs();
        if cur == 0.0 {
            return Ok(total);
        }
        if k >= 2.0 {
            let rate = (prev / cur).ln();
            if rate > 0.0 {
                let tail = g(k) / rate;
                if tail.abs() < 0.1 * tol {
                    return Ok(total + tail);
                }
            } else if k > 40.0 {
                return Err(divergent());
            }
        }
        prev = cur;
    }
    Err(divergent())
}

fn divergent() -> Error {
    Error::Model(
        "integral to v* = infinity does not converge for this law; configure a finite v_star"
            .into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, ABS_TOL);
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_negate() {
        let a = simpson(f64::exp, 0.0, 1.0, ABS_TOL);
        let b = simpson(f64::exp, 1.0, 0.0, ABS_TOL);
        assert!((a + b).abs() < 1e-14);
        assert!((a - (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn oscillatory() {
        let v = simpson(|x| (10.0 * x).sin(), 0.0, 3.0, ABS_TOL);
        let exact = (1.0 - (30.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn power_tail() {
        // ∫_1^∞ w^{-3/2} dw = 2
        let v = simpson_to_infinity(|w| w.powf(-1.5), 1.0, ABS_TOL).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // slow decay: ∫_2^∞ w^{-1.2} dw = 5·2^{-0.2}
        let v = simpson_to_infinity(|w| w.powf(-1.2), 2.0, ABS_TOL).unwrap();
        assert!((v - 5.0 * 2f64.powf(-0.2)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn divergent_tail_is_an_error() {
        assert!(simpson_to_infinity(|w| 1.0 / w, 1.0, ABS_TOL).is_err());
        assert!(simpson_to_infinity(|w| w.powf(-0.5), 1.0, ABS_TOL).is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Outflow,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Outflow => "outflow",
        }
    }
}

/// Spatial derivative on a uniform grid: 4th-order central in the interior,
/// 2nd-order near non-periodic ends.
pub fn derivative(f: &[f64], dx: f64, boundary: Boundary) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::Grid(format!(
            "derivative stencil needs at least 5 nodes, got {n}"
        )));
    }
    let mut d = vec![0.0; n];
    let c4 = |fm2: f64, fm1: f64, fp1: f64, fp2: f64| (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * dx);
    match boundary {
        Boundary::Periodic => {
            for i in 0..n {
                let at = |k: isize| f[(i as isize + k).rem_euclid(n as isize) as usize];
                d[i] = c4(at(-2), at(-1), at(1), at(2));
            }
        }
        Boundary::Outflow => {
            for i in 2..n - 2 {
                d[i] = c4(f[i - 2], f[i - 1], f[i + 1], f[i + 2]);
            }
            d[1] = (f[2] - f[0]) / (2.0 * dx);
            d[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * dx);
            d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
            d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
        }
    }
    Ok(d)
}

/// Indices of nodes whose derivative used the full 4th-order stencil.
pub fn interior_range(n: usize, boundary: Boundary) -> std::ops::Range<usize> {
    match boundary {
        Boundary::Periodic => 0..n,
        Boundary::Outflow => 2..n.saturating_sub(2),
    }
}

/// Four-point Lagrange interpolation of nodal values at position `x`.
///
/// Near non-periodic ends the stencil is shifted inward; positions outside
/// the grid return `None`.
pub fn interp_cubic(f: &[f64], x_lo: f64, dx: f64, x: f64, boundary: Boundary) -> Option<f64> {
    let n = f.len();
    let s = (x - x_lo) / dx;
    match boundary {
        Boundary::Periodic => {
            let period = n as f64;
            let s = s.rem_euclid(period);
            let i = s.floor() as isize;
            let r = s - i as f64;
            let at = |k: isize| f[(i + k).rem_euclid(n as isize) as usize];
            Some(lagrange4(at(-1), at(0), at(1), at(2), r))
        }
        Boundary::Outflow => {
            if s < -1e-12 || s > (n - 1) as f64 + 1e-12 {
                return None;
            }
            let i = (s.floor() as isize).clamp(1, n as isize - 3);
            let r = s - i as f64;
            let i = i as usize;
            Some(lagrange4(f[i - 1], f[i], f[i + 1], f[i + 2], r))
        }
    }
}

/// Cubic through values at offsets −1, 0, 1, 2, evaluated at offset `r`.
fn lagrange4(fm1: f64, f0: f64, f1: f64, f2: f64, r: f64) -> f64 {
    let wm1 = -r * (r - 1.0) * (r - 2.0) / 6.0;
    let w0 = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0;
    let w1 = -(r + 1.0) * r * (r - 2.0) / 2.0;
    let w2 = (r + 1.0) * r * (r - 1.0) / 6.0;
    wm1 * fm1 + w0 * f0 + w1 * f1 + w2 * f2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, periodic: bool) -> (Vec<f64>, f64) {
        let dx = if periodic { 1.0 / n as f64 } else { 1.0 / (n - 1) as f64 };
        ((0..n).map(|i| i as f64 * dx).collect(), dx)
    }

    #[test]
    fn periodic_sine_is_fourth_order() {
        let err = |n: usize| {
            let (x, dx) = grid(n, true);
            let f: Vec<f64> = x.iter().map(|t| (2.0 * std::f64::consts::PI * t).sin()).collect();
            let d = derivative(&f, dx, Boundary::Periodic).unwrap();
            x.iter()
                .zip(&d)
                .map(|(t, di)| (di - 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * t).cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 3.9, "{order}");
    }

    #[test]
    fn outflow_exact_on_quadratics() {
        let (x, dx) = grid(11, false);
        let f: Vec<f64> = x.iter().map(|t| 1.0 + 2.0 * t + 3.0 * t * t).collect();
        let d = derivative(&f, dx, Boundary::Outflow).unwrap();
        for (t, di) in x.iter().zip(&d) {
            assert!((di - (2.0 + 6.0 * t)).abs() < 1e-11);
        }
    }

    #[test]
    fn too_small_grid() {
        assert!(derivative(&[1.0; 4], 0.1, Boundary::Outflow).is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let (x, dx) = grid(12, false);
        let p = |t: f64| 0.5 - t + 2.0 * t * t * t;
        let f: Vec<f64> = x.iter().map(|t| p(*t)).collect();
        for &t in &[0.0, 0.013, 0.5, 0.97, 1.0] {
            let v = interp_cubic(&f, 0.0, dx, t, Boundary::Outflow).unwrap();
            assert!((v - p(t)).abs() < 1e-12, "{t}");
        }
        assert!(interp_cubic(&f, 0.0, dx, 1.2, Boundary::Outflow).is_none());
    }

    #[test]
    fn periodic_interpolation_wraps() {
        let (x, dx) = grid(64, true);
        let f: Vec<f64> = x.iter().map(|t| (2.0 * std::f64::consts::PI * t).cos()).collect();
        let a = interp_cubic(&f, 0.0, dx, 0.3, Boundary::Periodic).unwrap();
        let b = interp_cubic(&f, 0.0, dx, 2.3, Boundary::Periodic).unwrap();
        let c = interp_cubic(&f, 0.0, dx, -0.7, Boundary::Periodic).unwrap();
        assert!((a - b).abs() < 1e-13 && (a - c).abs() < 1e-13);
        assert!((a - (0.6 * std::f64::consts::PI).cos()).abs() < 1e-5);
    }
}

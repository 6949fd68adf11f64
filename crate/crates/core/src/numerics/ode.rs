use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub first_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
    /// Stop once any component exceeds this magnitude.
    pub blowup: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            first_step: None,
            min_step: 1e-14,
            max_steps: 1_000_000,
            blowup: Some(1e8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeStop {
    Finished,
    Blowup { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub stop: OdeStop,
}

impl Trajectory {
    pub fn last(&self) -> (f64, &[f64]) {
        let i = self.t.len() - 1;
        (self.t[i], &self.y[i])
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) with FSAL and standard step-size control.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Trajectory {
        t: vec![t0],
        y: vec![y.clone()],
        stop: OdeStop::Finished,
    };
    if t_end <= t0 {
        return Ok(out);
    }
    let span = t_end - t0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k1);
    let mut h = opts.first_step.unwrap_or_else(|| initial_step(&y, &k1, opts, span));
    let mut steps = 0usize;
    let mut rejected_last = false;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::Integration(format!(
                "step budget {} exhausted at t={t}",
                opts.max_steps
            )));
        }
        steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < opts.min_step * t.abs().max(1.0) {
            return Err(Error::Integration(format!(
                "step size underflow (h={h:e}) at t={t}"
            )));
        }
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &y_new, &mut k7);

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            if !r.is_finite() || !y_new[i].is_finite() {
                finite = false;
            }
            err += r * r;
        }
        let err = (err / n as f64).sqrt();

        if !finite {
            h *= 0.25;
            rejected_last = true;
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            out.t.push(t);
            out.y.push(y.clone());
            if let Some(cut) = opts.blowup {
                if y.iter().any(|v| v.abs() > cut) {
                    out.stop = OdeStop::Blowup { t };
                    return Ok(out);
                }
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= if rejected_last { fac.min(1.0) } else { fac };
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected_last = true;
        }
    }
    Ok(out)
}

fn initial_step(y: &[f64], dy: &[f64], opts: &OdeOptions, span: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for (yi, fi) in y.iter().zip(dy) {
        let sc = opts.atol + opts.rtol * yi.abs();
        d0 = d0.max((yi / sc).abs());
        d1 = d1.max((fi / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-12 * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn riccati(a0: f64, a1: f64, a2: f64) -> impl FnMut(f64, &[f64], &mut [f64]) {
        move |_t, y, dy| dy[0] = a0 + a1 * y[0] - a2 * y[0] * y[0]
    }

    #[test]
    fn logistic_decay() {
        let tr = dopri5(riccati(0.0, 0.0, 1.0), 0.0, &[1.0], 1.0, &OdeOptions::default()).unwrap();
        assert_eq!(tr.stop, OdeStop::Finished);
        assert!((tr.last().1[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tanh_solution() {
        let tr = dopri5(riccati(1.0, 0.0, 1.0), 0.0, &[0.0], 1.0, &OdeOptions::default()).unwrap();
        assert!((tr.last().1[0] - 1f64.tanh()).abs() < 1e-9);
        assert!((tr.last().1[0] - 0.761594).abs() < 1e-6);
    }

    #[test]
    fn blowup_time() {
        let tr =
            dopri5(riccati(0.0, 0.0, 1.0), 0.0, &[-2.0], 2.0, &OdeOptions::default()).unwrap();
        match tr.stop {
            OdeStop::Blowup { t } => assert!((t - 0.5).abs() < 1e-6, "{t}"),
            _ => panic!("no blowup"),
        }
    }

    #[test]
    fn harmonic_oscillator_system() {
        let tr = dopri5(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            &OdeOptions::default(),
        )
        .unwrap();
        let (_, y) = tr.last();
        assert!((y[0] - 10f64.cos()).abs() < 1e-7);
        assert!((y[1] + 10f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn underflow_is_reported() {
        let opts = OdeOptions {
            blowup: None,
            ..OdeOptions::default()
        };
        let r = dopri5(riccati(0.0, 0.0, 1.0), 0.0, &[-2.0], 2.0, &opts);
        assert!(matches!(r, Err(Error::Integration(_))));
    }
}

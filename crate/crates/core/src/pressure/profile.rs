use serde::{Deserialize, Serialize};

/// Smooth scalar function of the material coordinate, with two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// value + slope·x
    Linear {
        value: f64,
        slope: f64,
    },
    /// mean + amplitude·sin(wavenumber·x + phase)
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
        phase: f64,
    },
    /// mean + amplitude·tanh((x − center)/width)
    TanhStep {
        mean: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// (f, f′, f″) at x.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Constant { value } => (value, 0.0, 0.0),
            Profile::Linear { value, slope } => (value + slope * x, slope, 0.0),
            Profile::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => {
                let arg = wavenumber * x + phase;
                let (s, c) = arg.sin_cos();
                (
                    mean + amplitude * s,
                    amplitude * wavenumber * c,
                    -amplitude * wavenumber * wavenumber * s,
                )
            }
            Profile::TanhStep {
                mean,
                amplitude,
                center,
                width,
            } => {
                let th = ((x - center) / width).tanh();
                let sech2 = 1.0 - th * th;
                (
                    mean + amplitude * th,
                    amplitude * sech2 / width,
                    -2.0 * amplitude * th * sech2 / (width * width),
                )
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            Profile::Constant { .. } => true,
            Profile::Linear { slope, .. } => slope == 0.0,
            Profile::Sinusoidal {
                amplitude,
                wavenumber,
                ..
            } => amplitude == 0.0 || wavenumber == 0.0,
            Profile::TanhStep { amplitude, .. } => amplitude == 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Constant { .. } => "constant",
            Profile::Linear { .. } => "linear",
            Profile::Sinusoidal { .. } => "sinusoidal",
            Profile::TanhStep { .. } => "tanh_step",
        }
    }

    /// Lower bound of the profile over [lo, hi], from dense sampling plus
    /// the analytic extrema where they are known.
    pub fn min_over(&self, lo: f64, hi: f64) -> f64 {
        let n = 2001;
        let mut m = self.value(lo).min(self.value(hi));
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            m = m.min(self.value(x));
        }
        if let Profile::Sinusoidal {
            mean, amplitude, wavenumber, ..
        } = *self
        {
            if wavenumber != 0.0 && (hi - lo) * wavenumber.abs() >= 2.0 * std::f64::consts::PI {
                m = m.min(mean - amplitude.abs());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::central4;

    fn check_derivatives(p: Profile) {
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            let (_, d1, d2) = p.eval(x);
            let fd1 = central4(|t| p.value(t), x, 1e-3);
            let fd2 = central4(|t| p.eval(t).1, x, 1e-3);
            assert!((d1 - fd1).abs() < 1e-9, "{p:?} d1 at {x}");
            assert!((d2 - fd2).abs() < 1e-9, "{p:?} d2 at {x}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        check_derivatives(Profile::Linear { value: 1.0, slope: 0.3 });
        check_derivatives(Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 2.0,
            phase: 0.3,
        });
        check_derivatives(Profile::TanhStep {
            mean: 1.0,
            amplitude: 0.1,
            center: 0.2,
            width: 0.7,
        });
    }

    #[test]
    fn minimum_of_sine() {
        let p = Profile::Sinusoidal {
            mean: 1.0,
            amplitude: 0.1,
            wavenumber: 1.0,
            phase: 0.0,
        };
        assert_eq!(p.min_over(0.0, 2.0 * std::f64::consts::PI), 0.9);
    }
}

pub mod fd;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod spline;

/// Fourth-order central difference of a scalar function.
pub fn central4<F: Fn(f64) -> f64>(f: F, x: f64, delta: f64) -> f64 {
    (f(x - 2.0 * delta) - 8.0 * f(x - delta) + 8.0 * f(x + delta) - f(x + 2.0 * delta)) / (12.0 * delta)
}

/// Second-order central difference of a scalar function.
pub fn central2<F: Fn(f64) -> f64>(f: F, x: f64, delta: f64) -> f64 {
    (f(x + delta) - f(x - delta)) / (2.0 * delta)
}

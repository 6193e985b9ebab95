//! Small numerical kernels shared by the physics modules: bracketed root
//! finding, adaptive Gauss-Kronrod quadrature, an embedded Runge-Kutta
//! integrator and a numerically stable `sinc`.

pub mod ode;
pub mod quad;
pub mod roots;

/// Below this magnitude `sinc` switches to its Taylor series.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;

/// `sin(x) / x` with `sinc(0) = 1`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `sinh(y) / y` with the value 1 at the origin.
#[inline]
pub fn sinhc(y: f64) -> f64 {
    if y.abs() < SINC_SERIES_THRESHOLD {
        let y2 = y * y;
        1.0 + y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sinh() / y
    }
}

/// Returns `(cos(x), sinc(x))` where `x^2 = x_squared` may be negative, in
/// which case the hyperbolic continuation `(cosh(y), sinh(y)/y)` with
/// `y^2 = -x_squared` is returned.
pub fn cos_sinc_of_square(x_squared: f64) -> (f64, f64) {
    if x_squared >= 0.0 {
        let x = x_squared.sqrt();
        (x.cos(), sinc(x))
    } else {
        let y = (-x_squared).sqrt();
        (y.cosh(), sinhc(y))
    }
}

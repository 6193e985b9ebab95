//! Dormand-Prince 5(4) embedded Runge-Kutta integrator with step-size
//! control, for small fixed-size real systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-12,
            abs: 1e-14,
            max_steps: 1_000_000,
        }
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `dy/dx = rhs(x, y)` from `x0` to `x1` and returns `y(x1)`.
pub fn integrate<const N: usize, F>(rhs: F, x0: f64, y0: [f64; N], x1: f64, tol: OdeTolerance) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span / 100.0;
    let mut k1 = rhs(x, &y);

    for _ in 0..tol.max_steps {
        if (x1 - x) * dir <= 0.0 {
            return Ok(y);
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }

        let k2 = rhs(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            x + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            x + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(x + h, &y_new);

        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }

        if err <= 1.0 {
            x += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(Error::InvalidParameter(format!(
        "ODE integration exceeded {} steps",
        tol.max_steps
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let rhs = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = integrate(
            rhs,
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            OdeTolerance::default(),
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn exponential_decay() {
        let y = integrate(
            |_x, y: &[f64; 1]| [-3.0 * y[0]],
            0.0,
            [2.0],
            1.5,
            OdeTolerance::default(),
        )
        .unwrap();
        assert!((y[0] - 2.0 * (-4.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_span_is_identity() {
        let y = integrate(|_x, y: &[f64; 1]| [y[0]], 1.0, [7.0], 1.0, OdeTolerance::default()).unwrap();
        assert_eq!(y, [7.0]);
    }
}

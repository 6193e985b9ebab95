//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Termination settings for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance {
    /// Absolute tolerance on the abscissa.
    pub x_abs: f64,
    /// Absolute tolerance on `|f(x)|`; zero disables the residual test.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        Self {
            x_abs: 1e-14,
            f_abs: 0.0,
            max_iter: 200,
        }
    }
}

/// Brent's method (inverse quadratic interpolation, secant and bisection)
/// on a bracket `[a, b]` with `f(a) * f(b) <= 0`.
pub fn brent<F>(mut f: F, a: f64, b: f64, tol: RootTolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotConverged(format!(
            "[{a}, {b}] is not a bracket (f = {fa}, {fb})"
        )));
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.x_abs;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() < tol.f_abs {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::RootNotConverged(format!("non-finite residual at {b}")));
        }
    }
    Err(Error::RootNotConverged(format!(
        "no convergence after {} iterations",
        tol.max_iter
    )))
}

/// Scans `[a, b]` on `n` equal sub-intervals and returns the first one on
/// which `f` changes sign. Non-finite samples break a bracket.
pub fn first_sign_change<F>(mut f: F, a: f64, b: f64, n: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let h = (b - a) / n as f64;
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..=n {
        let x = if i == n { b } else { a + h * i as f64 };
        let fx = f(x);
        if f_prev.is_finite() && fx.is_finite() && (f_prev == 0.0 || f_prev.signum() != fx.signum()) {
            return Some((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    None
}

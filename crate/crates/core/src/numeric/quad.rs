//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-10,
            max_intervals: 20_000,
        }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, optionally pre-split at `breakpoints`
/// (e.g. the location of a sharp peak), bisecting the segment with the
/// largest error estimate until `error <= max(abs, rel * |value|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], tol: QuadTolerance) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);

    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in edges.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNotConverged { estimate: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }

    // Re-sum to shed the drift of the running updates.
    let (value, error_estimate) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value,
        error_estimate,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &[], QuadTolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn sinc_squared_mass() {
        // integral of sinc^2 over the real line is pi; truncate at +-200 pi.
        let f = |x: f64| crate::numeric::sinc(x).powi(2);
        let tol = QuadTolerance {
            abs: 1e-11,
            rel: 1e-12,
            max_intervals: 50_000,
        };
        let r = integrate(f, -200.0 * PI, 200.0 * PI, &[0.0], tol).unwrap();
        // Tail beyond X is approximately 1/(2X) on each side.
        let tail = 1.0 / (200.0 * PI);
        assert!((r.value + tail - PI).abs() < 1e-5, "{}", r.value);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (50.0 * x).cos(), 0.0, 1.0, &[], QuadTolerance::default()).unwrap();
        assert!((r.value - 50f64.sin() / 50.0).abs() < 1e-10);
    }
}

//! Coupled-mode description of one phase-matched geometry.
//!
//! Amplitudes obey the slowly varying envelope equations
//!
//! ```text
//! up-conversion:    dA1/dx = -i g1 A2  e^{+i D x},   dA2/dx = -i g2 A1  e^{-i D x}
//! down-conversion:  dA1/dx = -i g1 A2* e^{-i D x},   dA2/dx = -i g2 A1* e^{-i D x}
//! ```
//!
//! with `D` the wavevector mismatch. Intensities are expressed in units of
//! the zeropoint flow of each mode, so an unpumped crystal returns exactly 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::crystal::{Polarization, UniaxialCrystal};
use crate::error::{Error, Result};
use crate::numeric::ode::{self, OdeTolerance};
use crate::numeric::{cos_sinc_of_square, sinc};
use crate::phasematch::{MatchSolution, PlaneSelector, ProcessKind, PumpWave};

/// Above this value of `g1 g2 l^2` a warning is attached.
pub const COUPLING_WARN: f64 = 0.01;
/// Above this value the small-coupling treatment is refused.
pub const COUPLING_LIMIT: f64 = 0.1;
/// Largest relative detuning `|w1' - w1| / w1` accepted by [`detuning`].
pub const MAX_RELATIVE_DETUNING: f64 = 0.2;
/// External angles below this (radians) use the normal-incidence Fresnel limit.
pub const NORMAL_INCIDENCE_EPS: f64 = 1e-9;

/// Coupling constants, mismatch and interface reflectances of one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub process: ProcessKind,
    /// Zero when the set was built from raw parameters.
    pub f1: f64,
    pub f2: f64,
    /// um^-1
    pub g1: f64,
    pub g2: f64,
    /// um^-1
    pub delta: f64,
    /// `D^2/4 + g1 g2` for up-conversion, `D^2/4 - g1 g2` for down-conversion.
    pub b_squared: f64,
    /// `sqrt(|b_squared|)`; the evolution is hyperbolic when `b_squared < 0`.
    pub b: f64,
    /// um
    pub length_l: f64,
    pub r1: f64,
    pub r2: f64,
    pub warnings: Vec<String>,
}

impl CouplingSet {
    /// A set from raw parameters with no reflections.
    pub fn new(process: ProcessKind, g1: f64, g2: f64, delta: f64, length_l: f64) -> Self {
        let mut cs = Self {
            process,
            f1: 0.0,
            f2: 0.0,
            g1,
            g2,
            delta,
            b_squared: 0.0,
            b: 0.0,
            length_l,
            r1: 0.0,
            r2: 0.0,
            warnings: Vec::new(),
        };
        cs.set_delta(delta);
        cs
    }

    pub fn with_reflectances(mut self, r1: f64, r2: f64) -> Self {
        self.r1 = r1;
        self.r2 = r2;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.set_delta(delta);
        self
    }

    fn set_delta(&mut self, delta: f64) {
        self.delta = delta;
        self.b_squared = delta * delta / 4.0 - self.process.sign() * self.g1 * self.g2;
        self.b = self.b_squared.abs().sqrt();
    }

    /// `g1 g2 l^2`, the small parameter of the weak-coupling expansion.
    pub fn coupling_strength(&self) -> f64 {
        self.g1 * self.g2 * self.length_l * self.length_l
    }

    /// `(cos(b l), sinc(b l))`, continued to `(cosh, sinhc)` when `b^2 < 0`.
    pub fn cos_sinc(&self) -> (f64, f64) {
        cos_sinc_of_square(self.b_squared * self.length_l * self.length_l)
    }

    /// `sinc^2(b l)` with the exact `b`.
    pub fn sinc_sq_exact(&self) -> f64 {
        self.cos_sinc().1.powi(2)
    }

    /// `sinc^2(D l / 2)`, the weak-coupling replacement `b ~ D/2`.
    pub fn sinc_sq_approx(&self) -> f64 {
        sinc(0.5 * self.delta * self.length_l).powi(2)
    }

    /// Per-pass intensity transfer `[[T, G1], [G2, T]]` in zeropoint units,
    /// with `T = 1 -+ g1 g2 l^2 sinc^2(b l)` and `Gi = gi^2 l^2 sinc^2(b l)`.
    pub fn intensity_matrix(&self) -> [[f64; 2]; 2] {
        let s2 = self.sinc_sq_exact();
        let l2 = self.length_l * self.length_l;
        let t = 1.0 + self.process.sign() * self.g1 * self.g2 * l2 * s2;
        [[t, self.g1 * self.g1 * l2 * s2], [self.g2 * self.g2 * l2 * s2, t]]
    }
}

/// Which Fresnel formula applies to a mode: `P` when its field lies in the
/// plane of incidence, `S` when it is perpendicular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FresnelKind {
    /// `tan^2(theta - phi) / tan^2(theta + phi)`
    P,
    /// `sin^2(theta - phi) / sin^2(theta + phi)`
    S,
}

impl FresnelKind {
    /// With the optic axis in the entrance face the equatorial plane is
    /// perpendicular to the axis: ordinary fields lie in it, extraordinary
    /// fields along the axis. The longitudinal plane is the reverse.
    pub fn for_mode(plane: PlaneSelector, pol: Polarization) -> Self {
        match (plane, pol) {
            (PlaneSelector::Equatorial, Polarization::Ordinary) => FresnelKind::P,
            (PlaneSelector::Equatorial, Polarization::Extraordinary) => FresnelKind::S,
            (PlaneSelector::Longitudinal, Polarization::Ordinary) => FresnelKind::S,
            (PlaneSelector::Longitudinal, Polarization::Extraordinary) => FresnelKind::P,
        }
    }
}

/// Intensity reflectance at the exit face for external angle `theta` and
/// internal angle `phi` (radians), index `n`.
pub fn fresnel_reflectance(kind: FresnelKind, theta: f64, phi: f64, n: f64) -> Result<f64> {
    if theta.abs() < NORMAL_INCIDENCE_EPS {
        return Ok(((n - 1.0) / (n + 1.0)).powi(2));
    }
    let r = match kind {
        FresnelKind::P => ((theta - phi).tan() / (theta + phi).tan()).powi(2),
        FresnelKind::S => ((theta - phi).sin() / (theta + phi).sin()).powi(2),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::DegenerateAngles { mode: 0 })
    }
}

fn mode_reflectance(sol: &MatchSolution, mode: u8) -> Result<f64> {
    let (pol, theta, phi, n) = match mode {
        1 => (sol.modes.signal, sol.theta1, sol.phi1, sol.n1),
        _ => (sol.modes.partner, sol.theta2, sol.phi2, sol.n2),
    };
    fresnel_reflectance(
        FresnelKind::for_mode(sol.plane, pol),
        theta.to_radians(),
        phi.to_radians(),
        n,
    )
    .map_err(|_| Error::DegenerateAngles { mode })
}

/// Coupling constants at the matched frequency (`D = 0`).
pub fn coupling_constants(crystal: &UniaxialCrystal, pump: &PumpWave, sol: &MatchSolution) -> Result<CouplingSet> {
    if !(pump.amplitude_v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pump amplitude {} must be positive",
            pump.amplitude_v
        )));
    }
    let (phi1, phi2) = (sol.phi1.to_radians(), sol.phi2.to_radians());
    let four_pi_v = 4.0 * std::f64::consts::PI * pump.amplitude_v;
    let (f1, f2) = match sol.process {
        ProcessKind::Puc => (
            four_pi_v * crystal.d15 * phi1.cos(),
            four_pi_v * crystal.d31 * phi1.cos(),
        ),
        ProcessKind::Pdc => {
            let f = four_pi_v * crystal.d15 * (phi1 - phi2).cos();
            (f, f)
        }
    };
    let root = (sol.omega1() * sol.omega2() / (sol.n1 * sol.n2)).sqrt();
    let g1 = f1 / (2.0 * phi1.cos()) * root;
    let g2 = f2 / (2.0 * phi2.cos()) * root;

    let mut cs = CouplingSet::new(sol.process, g1, g2, 0.0, crystal.length_l)
        .with_reflectances(mode_reflectance(sol, 1)?, mode_reflectance(sol, 2)?);
    cs.f1 = f1;
    cs.f2 = f2;

    let strength = cs.coupling_strength();
    if strength > COUPLING_LIMIT {
        return Err(Error::StrongCoupling {
            value: strength,
            limit: COUPLING_LIMIT,
        });
    }
    if strength > COUPLING_WARN {
        cs.warnings.push(format!("g1*g2*l^2 = {strength:.3e} is not small"));
    }
    if sol.below_transparency {
        cs.warnings.push(format!(
            "partner at {:.2} nm is below the transparency limit",
            sol.lambda2 * 1e3
        ));
    }
    Ok(cs)
}

/// Wavevector mismatch when the signal is detuned to `omega1_prime`, with
/// the partner at `omega0 -+ omega1_prime`. Indices and transverse
/// wavevectors are held at their matched values:
/// `ki = sqrt(ni^2 wi'^2 - wi^2 sin^2 theta_i)`.
pub fn detuning(sol: &MatchSolution, omega1_prime: f64) -> Result<f64> {
    let (w0, w1, w2) = (sol.omega0(), sol.omega1(), sol.omega2());
    if !((omega1_prime - w1).abs() <= MAX_RELATIVE_DETUNING * w1) {
        return Err(Error::InvalidParameter(format!(
            "detuned frequency {omega1_prime} is outside {w1} +- {}%",
            MAX_RELATIVE_DETUNING * 100.0
        )));
    }
    let s = sol.process.sign();
    let w2p = w0 - s * omega1_prime;
    if !(w2p > 0.0) {
        return Err(Error::NonPositiveFrequency {
            lambda0_um: sol.lambda0,
            lambda1_um: 2.0 * std::f64::consts::PI / omega1_prime,
        });
    }
    let k = |n: f64, wp: f64, w: f64, theta: f64, mode: u8| {
        let t = w * theta.to_radians().sin();
        let rad = n * n * wp * wp - t * t;
        if rad < 0.0 {
            Err(Error::NegativeRadicand { mode })
        } else {
            Ok(rad.sqrt())
        }
    };
    let k1 = k(sol.n1, omega1_prime, w1, sol.theta1, 1)?;
    let k2 = k(sol.n2, w2p, w2, sol.theta2, 2)?;
    Ok(sol.k0() - s * k1 - k2)
}

/// Complex envelopes of the two coupled modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudePair {
    pub a1: Complex64,
    pub a2: Complex64,
}

impl ModeAmplitudePair {
    pub fn new(a1: Complex64, a2: Complex64) -> Self {
        Self { a1, a2 }
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite()
    }
}

/// Envelopes after one pass through the slab.
pub fn transfer(cs: &CouplingSet, input: ModeAmplitudePair) -> ModeAmplitudePair {
    let l = cs.length_l;
    let (c, sn) = cs.cos_sinc();
    let half = 0.5 * cs.delta * l;
    let i = Complex64::i();
    let ModeAmplitudePair { a1, a2 } = input;
    match cs.process {
        ProcessKind::Puc => {
            let out1 =
                (a1 * Complex64::new(c, -half * sn) - i * cs.g1 * l * sn * a2) * Complex64::from_polar(1.0, half);
            let out2 =
                (a2 * Complex64::new(c, half * sn) - i * cs.g2 * l * sn * a1) * Complex64::from_polar(1.0, -half);
            ModeAmplitudePair::new(out1, out2)
        }
        ProcessKind::Pdc => {
            let phase = Complex64::from_polar(1.0, -half);
            let diag = Complex64::new(c, half * sn);
            let out1 = (a1 * diag - i * cs.g1 * l * sn * a2.conj()) * phase;
            let out2 = (a2 * diag - i * cs.g2 * l * sn * a1.conj()) * phase;
            ModeAmplitudePair::new(out1, out2)
        }
    }
}

/// Envelopes after one pass obtained by integrating the envelope equations
/// numerically.
pub fn transfer_numerical(cs: &CouplingSet, input: ModeAmplitudePair, tol: OdeTolerance) -> Result<ModeAmplitudePair> {
    let (g1, g2, d) = (cs.g1, cs.g2, cs.delta);
    let process = cs.process;
    let rhs = move |x: f64, y: &[f64; 4]| -> [f64; 4] {
        let a1 = Complex64::new(y[0], y[1]);
        let a2 = Complex64::new(y[2], y[3]);
        let minus_i = -Complex64::i();
        let (d1, d2) = match process {
            ProcessKind::Puc => (
                minus_i * g1 * a2 * Complex64::from_polar(1.0, d * x),
                minus_i * g2 * a1 * Complex64::from_polar(1.0, -d * x),
            ),
            ProcessKind::Pdc => {
                let e = Complex64::from_polar(1.0, -d * x);
                (minus_i * g1 * a2.conj() * e, minus_i * g2 * a1.conj() * e)
            }
        };
        [d1.re, d1.im, d2.re, d2.im]
    };
    let y0 = [input.a1.re, input.a1.im, input.a2.re, input.a2.im];
    let y = ode::integrate(rhs, 0.0, y0, cs.length_l, tol)?;
    Ok(ModeAmplitudePair::new(
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
    ))
}

/// How the multi-pass series treats the coupling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesExpansion {
    /// Keep terms up to first order in `g^2 l^2`, like the all-reflections
    /// closed form.
    #[default]
    FirstOrder,
    /// Multiply the full per-pass intensity matrices.
    Exact,
}

type Vec2 = [f64; 2];

fn mat_vec(m: &[[f64; 2]; 2], v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn scale(r: Vec2, v: Vec2) -> Vec2 {
    [r[0] * v[0], r[1] * v[1]]
}

fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

/// A chain vector split into its coupling-free part and its first-order
/// correction.
#[derive(Clone, Copy)]
struct Chain {
    v0: Vec2,
    v1: Vec2,
}

struct Pass {
    full: [[f64; 2]; 2],
    /// `full - I`
    excess: [[f64; 2]; 2],
    expansion: SeriesExpansion,
}

impl Pass {
    fn new(cs: &CouplingSet, expansion: SeriesExpansion) -> Self {
        let full = cs.intensity_matrix();
        let excess = [[full[0][0] - 1.0, full[0][1]], [full[1][0], full[1][1] - 1.0]];
        Self {
            full,
            excess,
            expansion,
        }
    }

    fn apply(&self, w: Chain) -> Chain {
        match self.expansion {
            SeriesExpansion::FirstOrder => Chain {
                v0: w.v0,
                v1: add(w.v1, mat_vec(&self.excess, w.v0)),
            },
            SeriesExpansion::Exact => Chain {
                v0: mat_vec(&self.full, add(w.v0, w.v1)),
                v1: [0.0; 2],
            },
        }
    }
}

/// Outgoing flow of both modes at the exit face, summed over the paths with
/// `0..=max_reflections` internal reflections, in zeropoint units.
///
/// Zeropoint radiation enters through both faces. Forward passes couple the
/// modes; backward passes do not. Each transmission through a face carries a
/// factor `1 - ri`, each internal reflection a factor `ri`, and the
/// contributions of distinct paths are added as intensities.
pub fn poynting_series(cs: &CouplingSet, max_reflections: usize, expansion: SeriesExpansion) -> (f64, f64) {
    let r = [cs.r1, cs.r2];
    let t = [1.0 - cs.r1, 1.0 - cs.r2];
    let r_sq = scale(r, r);
    let pass = Pass::new(cs, expansion);
    let chain = |v: Vec2| Chain { v0: v, v1: [0.0; 2] };
    let emit = |w: Chain| scale(t, add(w.v0, w.v1));
    let step = |w: Chain| {
        pass.apply(Chain {
            v0: scale(r_sq, w.v0),
            v1: scale(r_sq, w.v1),
        })
    };

    // Even orders: enter at the input face.
    let mut even = pass.apply(chain(t));
    let mut out = emit(even);
    if max_reflections >= 1 {
        // Odd orders: enter at the exit face, reflect once at the input face.
        out = add(out, r);
        let mut odd = pass.apply(chain(scale(r, t)));
        out = add(out, emit(odd));
        let mut order = 1;
        while order < max_reflections {
            order += 1;
            if order % 2 == 0 {
                even = step(even);
                out = add(out, emit(even));
            } else {
                odd = step(odd);
                out = add(out, emit(odd));
            }
        }
    }
    (out[0], out[1])
}

/// First-order partial sum, see [`poynting_series`].
pub fn poynting_out_partial(cs: &CouplingSet, max_reflections: usize) -> (f64, f64) {
    poynting_series(cs, max_reflections, SeriesExpansion::FirstOrder)
}

/// Sum over all reflection orders to first order in the coupling:
/// `pi = 1 + gi (gi -+ gj) l^2 sinc^2(b l) / (1 + ri)`.
pub fn poynting_out_all(cs: &CouplingSet) -> (f64, f64) {
    let (e1, e2) = poynting_excess_all(cs);
    (1.0 + e1, 1.0 + e2)
}

/// `pi - 1` of [`poynting_out_all`], evaluated without forming `pi`.
pub fn poynting_excess_all(cs: &CouplingSet) -> (f64, f64) {
    let k = cs.length_l * cs.length_l * cs.sinc_sq_exact();
    let s = cs.process.sign();
    let e1 = cs.g1 * (cs.g1 + s * cs.g2) * k / (1.0 + cs.r1);
    let e2 = cs.g2 * (cs.g2 + s * cs.g1) * k / (1.0 + cs.r2);
    (e1, e2)
}

//! Phase matching of three-wave mixing with a normally incident pump.
//!
//! Frequencies are vacuum wavenumbers `omega = 2 pi / lambda` (c = 1, um^-1).
//! With `s = +1` for down-conversion and `s = -1` for up-conversion the
//! conditions solved here are
//!
//! ```text
//! omega2 = omega0 - s omega1
//! omega2 sqrt(n2^2 - sin^2 theta2) = omega0 n0 - s omega1 sqrt(n1^2 - sin^2 theta1)
//! omega2 sin theta2 = -s omega1 sin theta1
//! ```
//!
//! where `theta` are external exit angles measured from the pump and the
//! internal directions follow `sin phi = sin theta / n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::crystal::{Polarization, UniaxialCrystal};
use crate::error::{Error, Result};
use crate::numeric::roots::{brent, first_sign_change, RootTolerance};
use crate::par::{map_ordered, ExecMode};

/// Largest external signal angle searched, degrees.
pub const MAX_THETA_DEG: f64 = 89.9;
/// Normalized residual accepted for a solved geometry.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Convergence threshold on successive extraordinary indices.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 200;

const ANGLE_SCAN_INTERVALS: usize = 720;
const EDGE_SCAN_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    /// omega2 = omega0 - omega1
    Pdc,
    /// omega2 = omega0 + omega1
    Puc,
}

impl ProcessKind {
    /// +1 for the down-conversion signs, -1 for up-conversion.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            ProcessKind::Pdc => 1.0,
            ProcessKind::Puc => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneSelector {
    /// Contains the pump, perpendicular to the optic axis.
    Equatorial,
    /// Contains the pump and the optic axis.
    Longitudinal,
}

/// How the extraordinary index of an emitted mode is tied to its direction
/// in the longitudinal plane.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LongitudinalIndexLaw {
    /// psi = cut - theta, using the external exit angle of the mode.
    #[default]
    ExternalAngle,
    /// psi = cut - phi with the internal angle; solved self-consistently by
    /// fixed-point iteration over the index.
    InternalAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpWave {
    /// um
    pub lambda0: f64,
    pub polarization: Polarization,
    /// Field amplitude, arbitrary units.
    pub amplitude_v: f64,
}

/// Default pump amplitude. Small enough that g1 g2 l^2 stays well inside the
/// weak-coupling regime for millimetre crystals with unit d coefficients.
pub const DEFAULT_AMPLITUDE_V: f64 = 1e-8;

impl PumpWave {
    pub fn new(lambda0: f64, polarization: Polarization) -> Self {
        Self {
            lambda0,
            polarization,
            amplitude_v: DEFAULT_AMPLITUDE_V,
        }
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// Pump index at normal incidence: the pump travels at `cut_angle` to
    /// the optic axis.
    pub fn index(&self, crystal: &UniaxialCrystal) -> Result<f64> {
        crystal.index(self.polarization, self.lambda0, crystal.cut_angle)
    }
}

/// Polarizations of the signal (mode 1) and its partner (mode 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModePolarizations {
    pub signal: Polarization,
    pub partner: Polarization,
}

impl ModePolarizations {
    /// o-signal with e-partner for up-conversion of an o pump; o + o for
    /// down-conversion of an e pump.
    pub fn default_for(process: ProcessKind) -> Self {
        match process {
            ProcessKind::Puc => Self {
                signal: Polarization::Ordinary,
                partner: Polarization::Extraordinary,
            },
            ProcessKind::Pdc => Self {
                signal: Polarization::Ordinary,
                partner: Polarization::Ordinary,
            },
        }
    }
}

/// One solved phase-matching geometry. Angles in degrees, signed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSolution {
    pub process: ProcessKind,
    pub plane: PlaneSelector,
    pub modes: ModePolarizations,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub residual_transverse: f64,
    pub residual_longitudinal: f64,
    /// The partner wavelength lies below the crystal transparency limit.
    pub below_transparency: bool,
}

impl MatchSolution {
    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }
    pub fn omega1(&self) -> f64 {
        2.0 * PI / self.lambda1
    }
    pub fn omega2(&self) -> f64 {
        2.0 * PI / self.lambda2
    }

    /// Pump wavevector `n0 omega0`.
    pub fn k0(&self) -> f64 {
        self.n0 * self.omega0()
    }
    /// Longitudinal wavevector component of mode 1, `omega1 n1 cos(phi1)`.
    pub fn k1(&self) -> f64 {
        self.omega1() * self.n1 * self.phi1.to_radians().cos()
    }
    pub fn k2(&self) -> f64 {
        self.omega2() * self.n2 * self.phi2.to_radians().cos()
    }

    /// `n1 sec(phi1) - n2 sec(phi2)`, the slope of the detuning with respect
    /// to the signal frequency at fixed indices and angles.
    pub fn group_mismatch(&self) -> f64 {
        self.n1 / self.phi1.to_radians().cos() - self.n2 / self.phi2.to_radians().cos()
    }

    /// Re-evaluates both matching conditions at the stored values,
    /// normalized by `omega0 n0`: `(transverse, longitudinal)`.
    pub fn residuals(&self) -> (f64, f64) {
        let s = self.process.sign();
        let (w0, w1, w2) = (self.omega0(), self.omega1(), self.omega2());
        let (s1, s2) = (self.theta1.to_radians().sin(), self.theta2.to_radians().sin());
        let scale = w0 * self.n0;
        let transverse = (w2 * s2 + s * w1 * s1) / scale;
        let longitudinal = (w2 * (self.n2 * self.n2 - s2 * s2).sqrt() - w0 * self.n0
            + s * w1 * (self.n1 * self.n1 - s1 * s1).sqrt())
            / scale;
        (transverse, longitudinal)
    }
}

/// `1 / (1/lambda0 -+ 1/lambda1)`: the partner wavelength fixed by energy
/// conservation.
pub fn partner_wavelength(process: ProcessKind, lambda0: f64, lambda1: f64) -> Result<f64> {
    if !(lambda0 > 0.0 && lambda1 > 0.0) {
        return Err(Error::InvalidParameter("wavelengths must be positive".into()));
    }
    let inv = 1.0 / lambda0 - process.sign() / lambda1;
    if inv <= 0.0 {
        return Err(Error::NonPositiveFrequency {
            lambda0_um: lambda0,
            lambda1_um: lambda1,
        });
    }
    Ok(1.0 / inv)
}

/// Everything that fixes the phase-matching problem apart from the signal
/// wavelength and plane.
#[derive(Debug, Clone)]
pub struct MatchProblem<'a> {
    pub process: ProcessKind,
    pub crystal: &'a UniaxialCrystal,
    pub pump: PumpWave,
    pub modes: ModePolarizations,
    pub law: LongitudinalIndexLaw,
}

/// Mode index and internal angle for one emitted wave.
struct ModeState {
    n: f64,
    sin_theta: f64,
}

impl ModeState {
    fn cos_internal_times_n(&self) -> f64 {
        (self.n * self.n - self.sin_theta * self.sin_theta).sqrt()
    }
}

impl<'a> MatchProblem<'a> {
    pub fn new(process: ProcessKind, crystal: &'a UniaxialCrystal, pump: PumpWave) -> Self {
        Self {
            process,
            crystal,
            pump,
            modes: ModePolarizations::default_for(process),
            law: LongitudinalIndexLaw::default(),
        }
    }

    pub fn with_modes(mut self, modes: ModePolarizations) -> Self {
        self.modes = modes;
        self
    }

    pub fn with_law(mut self, law: LongitudinalIndexLaw) -> Self {
        self.law = law;
        self
    }

    pub fn partner_wavelength(&self, lambda1: f64) -> Result<f64> {
        partner_wavelength(self.process, self.pump.lambda0, lambda1)
    }

    /// Angle of a wavevector at in-plane angle `alpha` (radians) to the optic
    /// axis, in degrees.
    fn psi_deg(&self, plane: PlaneSelector, alpha: f64) -> f64 {
        let cut = self.crystal.cut_angle.to_radians();
        let psi = match plane {
            PlaneSelector::Equatorial => (cut.cos() * alpha.cos()).clamp(-1.0, 1.0).acos(),
            PlaneSelector::Longitudinal => (cut - alpha).abs(),
        };
        psi.to_degrees().min(180.0)
    }

    fn mode_state(&self, pol: Polarization, lambda: f64, plane: PlaneSelector, sin_theta: f64) -> Result<ModeState> {
        let n = match pol {
            Polarization::Ordinary => self.crystal.n_ord(lambda)?,
            Polarization::Extraordinary => match (plane, self.law) {
                (PlaneSelector::Longitudinal, LongitudinalIndexLaw::InternalAngle) => {
                    let mut n = self.crystal.n_ext(lambda, self.psi_deg(plane, 0.0))?;
                    let mut converged = false;
                    for _ in 0..FIXED_POINT_MAX_ITER {
                        let phi = (sin_theta / n).asin();
                        let next = self.crystal.n_ext(lambda, self.psi_deg(plane, phi))?;
                        let done = (next - n).abs() < FIXED_POINT_TOLERANCE;
                        n = next;
                        if done {
                            converged = true;
                            break;
                        }
                    }
                    if !converged {
                        return Err(Error::FixedPointDivergence {
                            iterations: FIXED_POINT_MAX_ITER,
                        });
                    }
                    n
                }
                _ => self.crystal.n_ext(lambda, self.psi_deg(plane, sin_theta.asin()))?,
            },
        };
        Ok(ModeState { n, sin_theta })
    }

    /// Mode states and normalized longitudinal mismatch at signal angle
    /// `theta1` (radians).
    fn evaluate(
        &self,
        lambda1: f64,
        lambda2: f64,
        n0: f64,
        plane: PlaneSelector,
        theta1: f64,
    ) -> Result<(ModeState, ModeState, f64)> {
        let s = self.process.sign();
        let (w0, w1, w2) = (2.0 * PI / self.pump.lambda0, 2.0 * PI / lambda1, 2.0 * PI / lambda2);
        let sin1 = theta1.sin();
        let sin2 = -s * w1 * sin1 / w2;
        if sin2.abs() > 1.0 {
            return Err(Error::NoRootInWindow("partner beyond grazing exit".into()));
        }
        let m1 = self.mode_state(self.modes.signal, lambda1, plane, sin1)?;
        let m2 = self.mode_state(self.modes.partner, lambda2, plane, sin2)?;
        let mismatch = (w2 * m2.cos_internal_times_n() - w0 * n0 + s * w1 * m1.cos_internal_times_n()) / (w0 * n0);
        Ok((m1, m2, mismatch))
    }

    /// Signal wavelength at which the cone closes (theta1 = theta2 = 0).
    pub fn collinear_edge(&self) -> Result<f64> {
        let n0 = self.pump.index(self.crystal)?;
        let window = self.crystal.window();
        // Keep the partner inside the window as well.
        let inv0 = 1.0 / self.pump.lambda0;
        let mut lo = window.min;
        let mut hi = window.max;
        match self.process {
            ProcessKind::Puc => lo = lo.max(1.0 / (1.0 / window.min - inv0)),
            ProcessKind::Pdc => {
                lo = lo.max(1.0 / (inv0 - 1.0 / window.max).max(f64::MIN_POSITIVE));
                if inv0 > 1.0 / window.min {
                    hi = hi.min(1.0 / (inv0 - 1.0 / window.min));
                }
            }
        }
        if !(hi > lo) {
            return Err(Error::NoRootInWindow("empty signal window".into()));
        }
        let residual = |lambda1: f64| -> f64 {
            let Ok(lambda2) = self.partner_wavelength(lambda1) else {
                return f64::NAN;
            };
            self.evaluate(lambda1, lambda2, n0, PlaneSelector::Equatorial, 0.0)
                .map(|(_, _, m)| m)
                .unwrap_or(f64::NAN)
        };
        // Scan uniformly in frequency, where the residual is smooth.
        let (f_lo, f_hi) = (1.0 / hi, 1.0 / lo);
        let (a, b) = first_sign_change(|f| residual(1.0 / f), f_lo, f_hi, EDGE_SCAN_INTERVALS)
            .ok_or_else(|| Error::NoRootInWindow(format!("no collinear edge for {} um pump", self.pump.lambda0)))?;
        let tol = RootTolerance {
            x_abs: 1e-15,
            f_abs: 0.0,
            max_iter: 200,
        };
        let f = brent(|f| residual(1.0 / f), a, b, tol)?;
        Ok(1.0 / f)
    }

    /// Solves for the exit angles of a signal at `lambda1` in `plane`; only
    /// the branch with `theta1 >= 0` is reported.
    pub fn solve_pair(&self, lambda1: f64, plane: PlaneSelector) -> Result<MatchSolution> {
        let lambda2 = self.partner_wavelength(lambda1)?;
        let n0 = self.pump.index(self.crystal)?;
        self.crystal
            .window()
            .contains(lambda1)
            .then_some(())
            .ok_or(Error::OutOfWindow {
                lambda_um: lambda1,
                min_um: self.crystal.window().min,
                max_um: self.crystal.window().max,
            })?;

        let mismatch = |theta: f64| {
            self.evaluate(lambda1, lambda2, n0, plane, theta)
                .map(|(_, _, m)| m)
                .unwrap_or(f64::NAN)
        };
        let at_zero = mismatch(0.0);
        let theta1 = if at_zero.abs() <= 1e-13 {
            0.0
        } else {
            let max = MAX_THETA_DEG.to_radians();
            let (a, b) = first_sign_change(mismatch, 0.0, max, ANGLE_SCAN_INTERVALS).ok_or_else(|| {
                Error::NoRootInWindow(format!(
                    "{} nm has no phase-matched direction (below the spectrum edge?)",
                    lambda1 * 1e3
                ))
            })?;
            let tol = RootTolerance {
                x_abs: 1e-15,
                f_abs: 1e-12 * 1e-3,
                max_iter: 200,
            };
            brent(mismatch, a, b, tol)?
        };

        let (m1, m2, _) = self.evaluate(lambda1, lambda2, n0, plane, theta1)?;
        let mut sol = MatchSolution {
            process: self.process,
            plane,
            modes: self.modes,
            lambda0: self.pump.lambda0,
            lambda1,
            lambda2,
            theta1: theta1.to_degrees(),
            theta2: m2.sin_theta.asin().to_degrees(),
            phi1: (m1.sin_theta / m1.n).asin().to_degrees(),
            phi2: (m2.sin_theta / m2.n).asin().to_degrees(),
            n0,
            n1: m1.n,
            n2: m2.n,
            residual_transverse: 0.0,
            residual_longitudinal: 0.0,
            below_transparency: self.crystal.below_transparency(lambda2),
        };
        let (rt, rl) = sol.residuals();
        sol.residual_transverse = rt;
        sol.residual_longitudinal = rl;
        if rt.abs() >= RESIDUAL_TOLERANCE || rl.abs() >= RESIDUAL_TOLERANCE {
            return Err(Error::RootNotConverged(format!(
                "residuals ({rt:.2e}, {rl:.2e}) at {} um",
                lambda1
            )));
        }
        Ok(sol)
    }

    /// Solves every grid point `lambda_min + i * step <= lambda_max`.
    /// Unsolvable points are reported as notes, not errors.
    pub fn rainbow_sweep(
        &self,
        lambda_min: f64,
        lambda_max: f64,
        step: f64,
        plane: PlaneSelector,
        exec: ExecMode,
    ) -> Result<Sweep> {
        let grid = wavelength_grid(lambda_min, lambda_max, step)?;
        let results = map_ordered(exec, &grid, |&l| self.solve_pair(l, plane));
        let mut sweep = Sweep::default();
        for (l, r) in grid.into_iter().zip(results) {
            match r {
                Ok(sol) => sweep.solutions.push(sol),
                Err(e) => sweep.notes.push(SweepNote {
                    lambda1: l,
                    message: e.to_string(),
                }),
            }
        }
        if sweep.solutions.is_empty() {
            return Err(Error::EmptySweep);
        }
        Ok(sweep)
    }
}

/// Grid `lambda_min + i * step`, including `lambda_max` when it falls on
/// the grid within rounding.
pub fn wavelength_grid(lambda_min: f64, lambda_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lambda_max >= lambda_min) || !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "invalid sweep [{lambda_min}, {lambda_max}] step {step}"
        )));
    }
    let n = ((lambda_max - lambda_min) / step * (1.0 + 1e-12) + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lambda_min + step * i as f64).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Sweep {
    pub solutions: Vec<MatchSolution>,
    pub notes: Vec<SweepNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepNote {
    pub lambda1: f64,
    pub message: String,
}

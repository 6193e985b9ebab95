//! Photocount rates above the zeropoint threshold.
//!
//! A pinhole detector on mode `i` counts
//!
//! ```text
//! Di = C dOmega (ki wi^2 / 2 ni) * integral (pi(w1') - 1) dw1'
//! ```
//!
//! where `pi` is the all-reflections output flow in zeropoint units and only
//! positive excesses are counted. In the weak-coupling limit the integrand
//! reduces to `sinc^2(D l / 2)` and the frequency integral to
//! `2 pi / (l |n1 sec(phi1) - n2 sec(phi2)|)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coupling::{coupling_constants, detuning, poynting_excess_all, CouplingSet, MAX_RELATIVE_DETUNING};
use crate::crystal::{Polarization, UniaxialCrystal};
use crate::error::{Error, Result};
use crate::numeric::quad::{integrate, QuadTolerance};
use crate::numeric::sinc;
use crate::par::{map_ordered, ExecMode};
use crate::phasematch::{MatchProblem, MatchSolution, PlaneSelector, ProcessKind, PumpWave};

/// Smallest `|n1 sec(phi1) - n2 sec(phi2)|` for which the `1/l` frequency
/// integral is used.
pub const DEGENERACY_EPS: f64 = 1e-3;
/// Half-width of the quadrature window in units of `2 pi / (l |mismatch slope|)`.
pub const QUAD_WINDOW_LOBES: f64 = 20.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// Fixed solid angle, all frequencies accepted.
    #[default]
    Pinhole,
    /// Fixed bandwidth, all angles accepted. Evaluated through the
    /// equivalent pinhole integral.
    Filter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Detection constant per unit frequency, bandwidth and solid angle.
    pub efficiency_c: f64,
    /// sr
    pub solid_angle: f64,
    pub mode: DetectionMode,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency_c: 1.0,
            solid_angle: 1.0,
            mode: DetectionMode::Pinhole,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency_c > 0.0 && self.efficiency_c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "efficiency constant {} must be positive",
                self.efficiency_c
            )));
        }
        if !(self.solid_angle > 0.0 && self.solid_angle.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solid angle {} must be positive",
                self.solid_angle
            )));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.efficiency_c * self.solid_angle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectableMode {
    One,
    Two,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    ClosedForm,
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub d1: f64,
    pub d2: f64,
    pub detectable_mode: DetectableMode,
    pub method: RateMethod,
    pub warnings: Vec<String>,
}

impl RateResult {
    /// Rate of the detectable mode; the signal's rate when both count.
    pub fn rate(&self) -> f64 {
        match self.detectable_mode {
            DetectableMode::One | DetectableMode::Both => self.d1,
            DetectableMode::Two => self.d2,
            DetectableMode::None => 0.0,
        }
    }
}

/// `2 pi / (l |n1 sec(phi1) - n2 sec(phi2)|)`.
pub fn freq_integral_closed(sol: &MatchSolution, length_l: f64) -> Result<f64> {
    let den = sol.group_mismatch().abs();
    if den < DEGENERACY_EPS {
        return Err(Error::NearDegeneratePhaseMatch {
            denominator: den,
            epsilon: DEGENERACY_EPS,
        });
    }
    Ok(2.0 * PI / (length_l * den))
}

/// Integration window around the matched signal frequency, clipped to the
/// range accepted by [`detuning`] and to a positive partner frequency.
fn quadrature_window(sol: &MatchSolution, length_l: f64) -> (f64, f64) {
    let w1 = sol.omega1();
    let den = sol.group_mismatch().abs();
    let half = (QUAD_WINDOW_LOBES * 2.0 * PI / (length_l * den)).min(MAX_RELATIVE_DETUNING * w1);
    let (lo, hi) = (w1 - half, w1 + half);
    match sol.process {
        // keep the partner frequency w0 - w1' positive
        ProcessKind::Pdc => (lo, hi.min(sol.omega0() * (1.0 - 1e-9))),
        ProcessKind::Puc => (lo, hi),
    }
}

/// `integral sinc^2(D(w1') l / 2) dw1'` by adaptive quadrature, with the
/// mismatch taken from [`detuning`].
pub fn freq_integral_quadrature(sol: &MatchSolution, length_l: f64) -> Result<f64> {
    let (lo, hi) = quadrature_window(sol, length_l);
    let mut failure = None;
    let f = |w: f64| match detuning(sol, w) {
        Ok(d) => sinc(0.5 * d * length_l).powi(2),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let r = integrate(f, lo, hi, &[sol.omega1()], QuadTolerance::default())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// `ki wi^2 / (2 ni)` with `ki` the longitudinal wavevector.
fn zeropoint_density(omega: f64, n: f64, phi_deg: f64) -> f64 {
    let k = n * omega * phi_deg.to_radians().cos();
    k * omega * omega / (2.0 * n)
}

fn classify(d1: f64, d2: f64) -> DetectableMode {
    match (d1 > 0.0, d2 > 0.0) {
        (true, true) => DetectableMode::Both,
        (true, false) => DetectableMode::One,
        (false, true) => DetectableMode::Two,
        (false, false) => DetectableMode::None,
    }
}

fn common_warnings(det: &DetectorConfig, cs: &CouplingSet) -> Vec<String> {
    let mut w = cs.warnings.clone();
    if det.mode == DetectionMode::Filter {
        w.push("filter detection evaluated through the equivalent pinhole integral".into());
    }
    w
}

fn check_process(sol: &MatchSolution, expected: ProcessKind) -> Result<()> {
    if sol.process == expected {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected a {expected:?} geometry, got {:?}",
            sol.process
        )))
    }
}

/// Closed-form rates of either process.
pub fn rate_closed(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<RateResult> {
    det.validate()?;
    let cs = coupling_constants(crystal, pump, sol)?;
    let freq = freq_integral_closed(sol, crystal.length_l)?;
    let s = sol.process.sign();
    let l2 = cs.length_l * cs.length_l;
    let excess1 = cs.g1 * (cs.g1 + s * cs.g2) * l2 / (1.0 + cs.r1);
    let excess2 = cs.g2 * (cs.g2 + s * cs.g1) * l2 / (1.0 + cs.r2);
    let d1 = det.scale() * zeropoint_density(sol.omega1(), sol.n1, sol.phi1) * excess1.max(0.0) * freq;
    let d2 = det.scale() * zeropoint_density(sol.omega2(), sol.n2, sol.phi2) * excess2.max(0.0) * freq;
    Ok(RateResult {
        d1,
        d2,
        detectable_mode: classify(d1, d2),
        method: RateMethod::ClosedForm,
        warnings: common_warnings(det, &cs),
    })
}

/// Rates from the frequency integral of the all-reflections output with the
/// exact `b(w1')`, evaluated by adaptive quadrature.
pub fn rate_integral(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<RateResult> {
    det.validate()?;
    let cs = coupling_constants(crystal, pump, sol)?;
    let (lo, hi) = quadrature_window(sol, cs.length_l);
    let mut failure = None;
    let mut excess = |w: f64, mode: usize| match detuning(sol, w) {
        Ok(d) => {
            let (e1, e2) = poynting_excess_all(&cs.clone().with_delta(d));
            (if mode == 1 { e1 } else { e2 }).max(0.0)
        }
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    // The excess is tiny in absolute terms; integrate the normalized shape.
    let (e1, e2) = poynting_excess_all(&cs);
    let norm1 = e1.abs().max(f64::MIN_POSITIVE);
    let norm2 = e2.abs().max(f64::MIN_POSITIVE);
    let i1 = integrate(
        |w| excess(w, 1) / norm1,
        lo,
        hi,
        &[sol.omega1()],
        QuadTolerance::default(),
    )?
    .value
        * norm1;
    let i2 = integrate(
        |w| excess(w, 2) / norm2,
        lo,
        hi,
        &[sol.omega1()],
        QuadTolerance::default(),
    )?
    .value
        * norm2;
    if let Some(e) = failure {
        return Err(e);
    }
    let d1 = det.scale() * zeropoint_density(sol.omega1(), sol.n1, sol.phi1) * i1;
    let d2 = det.scale() * zeropoint_density(sol.omega2(), sol.n2, sol.phi2) * i2;
    let mut warnings = common_warnings(det, &cs);
    if sol.group_mismatch().abs() < DEGENERACY_EPS {
        warnings.push("near-degenerate phase matching: the frequency window is clipped".into());
    }
    Ok(RateResult {
        d1,
        d2,
        detectable_mode: classify(d1, d2),
        method: RateMethod::Integral,
        warnings,
    })
}

/// Up-conversion rate in closed form. Only the mode whose output exceeds
/// the zeropoint level counts.
pub fn pucv_rate_closed(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<RateResult> {
    check_process(sol, ProcessKind::Puc)?;
    rate_closed(crystal, pump, sol, det)
}

pub fn pucv_rate_integral(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<RateResult> {
    check_process(sol, ProcessKind::Puc)?;
    rate_integral(crystal, pump, sol, det)
}

/// Down-conversion rate in closed form; both partners count.
pub fn pdcv_rate_closed(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<RateResult> {
    check_process(sol, ProcessKind::Pdc)?;
    rate_closed(crystal, pump, sol, det)
}

/// Fully substituted closed-form rate of the detectable mode, written in
/// terms of the crystal coefficients and angles only. Up-conversion:
///
/// ```text
/// 4 pi^3 V^2 l C dOmega w1^4 (w0 + w1) / (n1 n2)
///   * d15 (d15 sec phi1 - d31 sec phi2) / |n1 sec phi1 - n2 sec phi2|
///   * cos^2(phi1) tan^2(theta1 + phi1) / (tan^2(theta1 + phi1) + tan^2(theta1 - phi1))
/// ```
///
/// and with the mode labels exchanged when the bracket is negative.
/// Down-conversion replaces the bracket by `d15^2 (sec phi1 + sec phi2)`,
/// `w0 + w1` by `w0 - w1` and `cos^2(phi1)` by `cos^2(phi1 - phi2)`.
pub fn rate_explicit(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    sol: &MatchSolution,
    det: &DetectorConfig,
) -> Result<f64> {
    det.validate()?;
    let den = sol.group_mismatch().abs();
    if den < DEGENERACY_EPS {
        return Err(Error::NearDegeneratePhaseMatch {
            denominator: den,
            epsilon: DEGENERACY_EPS,
        });
    }
    let (t1, p1, p2) = (sol.theta1.to_radians(), sol.phi1.to_radians(), sol.phi2.to_radians());
    let (sec1, sec2) = (1.0 / p1.cos(), 1.0 / p2.cos());
    let (w1, w2) = (sol.omega1(), sol.omega2());
    let prefactor =
        4.0 * PI.powi(3) * pump.amplitude_v.powi(2) * crystal.length_l * det.scale() / (sol.n1 * sol.n2 * den);
    // Obliquity of a tan-type interface; the normal-incidence limit of
    // tan^2(t+p) / (tan^2(t+p) + tan^2(t-p)) is 1 / (1 + r).
    let tan_obliquity = |theta: f64, phi: f64, n: f64| {
        if theta.abs() < 1e-9 {
            1.0 / (1.0 + ((n - 1.0) / (n + 1.0)).powi(2))
        } else {
            let a = (theta + phi).tan().powi(2);
            a / (a + (theta - phi).tan().powi(2))
        }
    };
    let sin_obliquity = |theta: f64, phi: f64, n: f64| {
        if theta.abs() < 1e-9 {
            1.0 / (1.0 + ((n - 1.0) / (n + 1.0)).powi(2))
        } else {
            let a = (theta + phi).sin().powi(2);
            a / (a + (theta - phi).sin().powi(2))
        }
    };
    let obliquity = |mode: u8| {
        let (pol, theta, phi, n) = if mode == 1 {
            (sol.modes.signal, t1, p1, sol.n1)
        } else {
            (sol.modes.partner, sol.theta2.to_radians(), p2, sol.n2)
        };
        match crate::coupling::FresnelKind::for_mode(sol.plane, pol) {
            crate::coupling::FresnelKind::P => tan_obliquity(theta, phi, n),
            crate::coupling::FresnelKind::S => sin_obliquity(theta, phi, n),
        }
    };
    let (d15, d31) = (crystal.d15, crystal.d31);
    let rate = match sol.process {
        ProcessKind::Puc => {
            let bracket = d15 * sec1 - d31 * sec2;
            if bracket >= 0.0 {
                prefactor * w1.powi(4) * w2 * d15 * bracket * p1.cos().powi(2) * obliquity(1)
            } else {
                prefactor * w1 * w2.powi(4) * d31 * (-bracket) * p1.cos().powi(2) * obliquity(2)
            }
        }
        ProcessKind::Pdc => {
            prefactor * w1.powi(4) * w2 * d15 * d15 * (sec1 + sec2) * (p1 - p2).cos().powi(2) * obliquity(1)
        }
    };
    Ok(rate)
}

/// Configuration of the up-conversion to down-conversion rate comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSetup {
    pub puc_pump: PumpWave,
    pub pdc_pump: PumpWave,
    /// Signal wavelength of the down-conversion reference, um.
    pub reference_lambda1: f64,
    pub plane: PlaneSelector,
}

impl Default for RatioSetup {
    fn default() -> Self {
        Self {
            puc_pump: PumpWave::new(0.351, Polarization::Ordinary),
            pdc_pump: PumpWave::new(0.351, Polarization::Extraordinary),
            reference_lambda1: 0.692,
            plane: PlaneSelector::Equatorial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    /// um
    pub lambda1: f64,
    pub ratio: Option<f64>,
    /// degrees
    pub theta1: Option<f64>,
    pub note: Option<String>,
}

/// Closed-form rate of the down-conversion reference geometry.
pub fn reference_rate(
    crystal: &UniaxialCrystal,
    setup: &RatioSetup,
    det: &DetectorConfig,
) -> Result<(MatchSolution, RateResult)> {
    let sol = MatchProblem::new(ProcessKind::Pdc, crystal, setup.pdc_pump)
        .solve_pair(setup.reference_lambda1, setup.plane)?;
    let rate = pdcv_rate_closed(crystal, &setup.pdc_pump, &sol, det)?;
    Ok((sol, rate))
}

/// Ratio of the detectable up-conversion rate at each grid wavelength to
/// the reference down-conversion signal rate, both through equal pinholes.
/// Points that cannot be evaluated carry a note instead of a ratio.
pub fn ratio_table(
    crystal: &UniaxialCrystal,
    setup: &RatioSetup,
    grid: &[f64],
    det: &DetectorConfig,
    exec: ExecMode,
) -> Result<Vec<RatioRow>> {
    let (_, reference) = reference_rate(crystal, setup, det)?;
    let denominator = reference.rate();
    if !(denominator > 0.0) {
        return Err(Error::InvalidParameter("reference rate is not positive".into()));
    }
    let problem = MatchProblem::new(ProcessKind::Puc, crystal, setup.puc_pump);
    let rows = map_ordered(exec, grid, |&lambda1| {
        let sol = match problem.solve_pair(lambda1, setup.plane) {
            Ok(sol) => sol,
            Err(e) => {
                return RatioRow {
                    lambda1,
                    ratio: None,
                    theta1: None,
                    note: Some(e.to_string()),
                }
            }
        };
        match pucv_rate_closed(crystal, &setup.puc_pump, &sol, det) {
            Ok(r) => RatioRow {
                lambda1,
                ratio: Some(r.rate() / denominator),
                theta1: Some(sol.theta1),
                note: None,
            },
            Err(e) => RatioRow {
                lambda1,
                ratio: None,
                theta1: Some(sol.theta1),
                note: Some(e.to_string()),
            },
        }
    });
    Ok(rows)
}

/// Row with the largest ratio.
pub fn ratio_peak(rows: &[RatioRow]) -> Option<&RatioRow> {
    rows.iter()
        .filter(|r| r.ratio.is_some())
        .max_by(|a, b| a.ratio.unwrap().total_cmp(&b.ratio.unwrap()))
}

/// A laser that stimulates the partner mode of a chosen signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    /// um
    pub aligner_lambda: f64,
    pub aligner_polarization: Polarization,
    /// External incidence angle of the aligner, degrees.
    pub aligner_incidence_deg: f64,
    /// Exit angle of the stimulated signal, degrees.
    pub signal_exit_deg: f64,
}

/// The aligner is the partner wavelength sent in at the external angle that
/// refracts onto the partner's internal direction.
pub fn alignment_geometry(
    crystal: &UniaxialCrystal,
    pump: &PumpWave,
    target_lambda1: f64,
    plane: PlaneSelector,
) -> Result<Alignment> {
    let problem = MatchProblem::new(ProcessKind::Puc, crystal, *pump);
    let sol = problem.solve_pair(target_lambda1, plane)?;
    Ok(Alignment {
        aligner_lambda: sol.lambda2,
        aligner_polarization: sol.modes.partner,
        aligner_incidence_deg: sol.theta2.abs(),
        signal_exit_deg: sol.theta1,
    })
}

/// Rate of the mirror image of the detectable mode, reflected at the exit
/// face and leaving through the entrance face.
pub fn backward_partner_rate(forward: &RateResult, cs: &CouplingSet) -> f64 {
    cs.r2 * forward.rate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn puc_at(lambda1: f64) -> (UniaxialCrystal, PumpWave, MatchSolution) {
        let crystal = UniaxialCrystal::bbo();
        let pump = PumpWave::new(0.351, Polarization::Ordinary);
        let sol = MatchProblem::new(ProcessKind::Puc, &crystal, pump)
            .solve_pair(lambda1, PlaneSelector::Equatorial)
            .unwrap();
        (crystal, pump, sol)
    }

    #[test]
    fn closed_integral_scales_as_inverse_length() {
        let (_, _, sol) = puc_at(0.5);
        let a = freq_integral_closed(&sol, 5000.0).unwrap();
        let b = freq_integral_closed(&sol, 10000.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_integral() {
        let (_, _, sol) = puc_at(0.5);
        let closed = freq_integral_closed(&sol, 5000.0).unwrap();
        let quad = freq_integral_quadrature(&sol, 5000.0).unwrap();
        assert!((quad / closed - 1.0).abs() < 0.02, "{quad} {closed}");
    }

    #[test]
    fn degenerate_denominator_is_refused() {
        let (_, _, mut sol) = puc_at(0.5);
        sol.n2 = sol.n1 / sol.phi1.to_radians().cos() * sol.phi2.to_radians().cos() + 1e-5;
        assert!(matches!(
            freq_integral_closed(&sol, 5000.0),
            Err(Error::NearDegeneratePhaseMatch { .. })
        ));
    }

    #[test]
    fn puc_only_one_mode_counts() {
        let (crystal, pump, sol) = puc_at(0.5);
        let r = pucv_rate_closed(&crystal, &pump, &sol, &DetectorConfig::default()).unwrap();
        assert_eq!(r.detectable_mode, DetectableMode::One);
        assert!(r.d1 > 0.0);
        assert_eq!(r.d2, 0.0);
        let swapped = crystal.clone().with_d31_over_d15(1.5);
        let r = pucv_rate_closed(&swapped, &pump, &sol, &DetectorConfig::default()).unwrap();
        assert_eq!(r.detectable_mode, DetectableMode::Two);
        assert_eq!(r.d1, 0.0);
    }

    #[test]
    fn explicit_formula_matches_closed_form() {
        for &(l, ratio) in &[(0.5, 1.0), (0.6, 1.0), (0.49, 0.95), (0.5, 1.4)] {
            let (crystal, pump, sol) = puc_at(l);
            let crystal = crystal.with_d31_over_d15(ratio);
            let det = DetectorConfig::default();
            let closed = pucv_rate_closed(&crystal, &pump, &sol, &det).unwrap().rate();
            let explicit = rate_explicit(&crystal, &pump, &sol, &det).unwrap();
            assert!(
                (closed / explicit - 1.0).abs() < 1e-12,
                "{l} {ratio}: {closed} {explicit}"
            );
        }
    }

    #[test]
    fn rate_scaling_in_length_and_amplitude() {
        let (crystal, mut pump, sol) = puc_at(0.5);
        let det = DetectorConfig::default();
        let base = pucv_rate_closed(&crystal, &pump, &sol, &det).unwrap().d1;
        let long = pucv_rate_closed(&crystal.clone().with_length(10000.0), &pump, &sol, &det)
            .unwrap()
            .d1;
        assert!((long / base - 2.0).abs() < 1e-12);
        pump.amplitude_v *= 3.0;
        let strong = pucv_rate_closed(&crystal, &pump, &sol, &det).unwrap().d1;
        assert!((strong / base - 9.0).abs() < 1e-12);
    }

    #[test]
    fn pdc_reference_and_branches() {
        let crystal = UniaxialCrystal::bbo();
        let setup = RatioSetup::default();
        let det = DetectorConfig::default();
        let (sol, r) = reference_rate(&crystal, &setup, &det).unwrap();
        assert_eq!(r.detectable_mode, DetectableMode::Both);
        assert!(r.d1 > 0.0 && r.d2 > 0.0);
        let cs = coupling_constants(&crystal, &setup.pdc_pump, &sol).unwrap();
        let expected = (sol.omega2() / sol.omega1()).powi(3) * (1.0 + cs.r1) / (1.0 + cs.r2);
        assert!((r.d2 / r.d1 / expected - 1.0).abs() < 1e-12);
        let explicit = rate_explicit(&crystal, &setup.pdc_pump, &sol, &det).unwrap();
        assert!((r.d1 / explicit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_down_conversion_is_degenerate() {
        let crystal = UniaxialCrystal::bbo();
        let pump = PumpWave::new(0.351, Polarization::Extraordinary);
        let sol = MatchProblem::new(ProcessKind::Pdc, &crystal, pump)
            .solve_pair(0.702, PlaneSelector::Equatorial)
            .unwrap();
        assert!(matches!(
            pdcv_rate_closed(&crystal, &pump, &sol, &DetectorConfig::default()),
            Err(Error::NearDegeneratePhaseMatch { .. })
        ));
    }

    #[test]
    fn wrong_process_is_rejected() {
        let (crystal, pump, sol) = puc_at(0.5);
        assert!(pdcv_rate_closed(&crystal, &pump, &sol, &DetectorConfig::default()).is_err());
    }

    #[test]
    fn filter_mode_is_routed_with_warning() {
        let (crystal, pump, sol) = puc_at(0.5);
        let det = DetectorConfig {
            mode: DetectionMode::Filter,
            ..DetectorConfig::default()
        };
        let a = pucv_rate_closed(&crystal, &pump, &sol, &det).unwrap();
        let b = pucv_rate_closed(&crystal, &pump, &sol, &DetectorConfig::default()).unwrap();
        assert_eq!(a.d1, b.d1);
        assert_eq!(a.warnings.len(), 1);
    }

    #[test]
    fn integral_rate_close_to_closed_form_away_from_degeneracy() {
        let (crystal, pump, sol) = puc_at(0.5);
        let det = DetectorConfig::default();
        let closed = pucv_rate_closed(&crystal, &pump, &sol, &det).unwrap();
        let integral = pucv_rate_integral(&crystal, &pump, &sol, &det).unwrap();
        assert_eq!(integral.detectable_mode, DetectableMode::One);
        assert!((integral.d1 / closed.d1 - 1.0).abs() < 0.03);
    }

    #[test]
    fn table_four_point() {
        let crystal = UniaxialCrystal::bbo();
        let rows = ratio_table(
            &crystal,
            &RatioSetup::default(),
            &[0.490],
            &DetectorConfig::default(),
            ExecMode::Sequential,
        )
        .unwrap();
        let ratio = rows[0].ratio.unwrap();
        assert!((ratio - 0.254).abs() < 0.2 * 0.254, "{ratio}");
        assert!((rows[0].theta1.unwrap() - 12.50).abs() < 0.05);
    }

    #[test]
    fn alignment_for_500() {
        let crystal = UniaxialCrystal::bbo();
        let pump = PumpWave::new(0.351, Polarization::Ordinary);
        let a = alignment_geometry(&crystal, &pump, 0.5, PlaneSelector::Equatorial).unwrap();
        assert!((a.aligner_lambda * 1e3 - 206.23).abs() < 0.005);
        assert_eq!(a.aligner_polarization, Polarization::Extraordinary);
        assert!((a.signal_exit_deg - 18.04).abs() < 0.05);
        assert!(a.aligner_incidence_deg > 0.0 && a.aligner_incidence_deg < a.signal_exit_deg);
    }

    #[test]
    fn backward_rate_is_reduced_by_r2() {
        let (crystal, pump, sol) = puc_at(0.5);
        let forward = pucv_rate_closed(&crystal, &pump, &sol, &DetectorConfig::default()).unwrap();
        let cs = coupling_constants(&crystal, &pump, &sol).unwrap();
        let back = backward_partner_rate(&forward, &cs);
        assert_eq!(back, cs.r2 * forward.d1);
        assert!(back < forward.d1);
        assert_eq!(
            backward_partner_rate(&forward, &cs.clone().with_reflectances(cs.r1, 0.0)),
            0.0
        );
    }

    #[test]
    fn invalid_detector_is_rejected() {
        let det = DetectorConfig {
            efficiency_c: 0.0,
            ..DetectorConfig::default()
        };
        assert!(det.validate().is_err());
    }
}

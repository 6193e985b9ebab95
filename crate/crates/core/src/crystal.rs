//! Dispersion of uniaxial crystals.
//!
//! All wavelengths are in micrometres. A [`SellmeierModel`] evaluates
//! `n^2(l) = a + b / (l^2 - c) - d l^2` inside its validity window; a
//! [`UniaxialCrystal`] pairs an ordinary and a principal extraordinary model
//! and adds the angle-dependent extraordinary index of the index ellipsoid.
//!
//! Crystals are looked up by name in a [`CrystalRegistry`], which always
//! contains the built-in BBO preset and can be extended from a plain-text
//! file of the form
//!
//! ```text
//! [bbo-custom]
//! ord.a = 2.7359
//! ord.b = .01878
//! ord.c = .01822
//! ord.d = .01354
//! ext90.a = 2.3753
//! ext90.b = .01224
//! ext90.c = .01667
//! ext90.d = .01516
//! transparency_min = 0.189
//! ```
//!
//! Optional keys: `window_min`, `window_max`, `cut_angle`, `length_um`,
//! `d15`, `d31`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polarization eigenmode of a uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

impl Polarization {
    pub fn letter(self) -> char {
        match self {
            Polarization::Ordinary => 'o',
            Polarization::Extraordinary => 'e',
        }
    }
}

/// Closed wavelength interval in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: f64,
    pub max: f64,
}

impl Window {
    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.min && lambda <= self.max
    }

    fn check(&self, lambda: f64) -> Result<()> {
        if self.contains(lambda) {
            Ok(())
        } else {
            Err(Error::OutOfWindow {
                lambda_um: lambda,
                min_um: self.min,
                max_um: self.max,
            })
        }
    }
}

/// One two-term Sellmeier fit `n^2 = a + b / (l^2 - c) - d l^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub a: f64,
    /// um^2
    pub b: f64,
    /// um^2, pole position squared
    pub c: f64,
    /// um^-2
    pub d: f64,
    pub window: Window,
}

impl SellmeierModel {
    pub fn new(a: f64, b: f64, c: f64, d: f64, window: Window) -> Result<Self> {
        if ![a, b, c, d, window.min, window.max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("Sellmeier coefficients must be finite".into()));
        }
        if !(window.min > 0.0 && window.max > window.min) {
            return Err(Error::InvalidParameter(format!(
                "invalid validity window [{}, {}]",
                window.min, window.max
            )));
        }
        if c >= window.min * window.min {
            return Err(Error::InvalidParameter(format!(
                "pole at {} um lies inside the validity window",
                c.sqrt()
            )));
        }
        let model = Self { a, b, c, d, window };
        const SAMPLES: usize = 256;
        for i in 0..=SAMPLES {
            let l = window.min + (window.max - window.min) * i as f64 / SAMPLES as f64;
            let n2 = model.n_squared(l);
            if !(n2 > 1.0) {
                return Err(Error::NonPhysical {
                    lambda_um: l,
                    n_squared: n2,
                });
            }
        }
        Ok(model)
    }

    /// Raw `n^2` without window checks.
    #[inline]
    pub fn n_squared(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.a + self.b / (l2 - self.c) - self.d * l2
    }

    pub fn index(&self, lambda: f64) -> Result<f64> {
        self.window.check(lambda)?;
        let n2 = self.n_squared(lambda);
        if n2 <= 1.0 {
            return Err(Error::NonPhysical {
                lambda_um: lambda,
                n_squared: n2,
            });
        }
        Ok(n2.sqrt())
    }
}

/// Ordinary index.
pub fn n_ord(model: &SellmeierModel, lambda: f64) -> Result<f64> {
    model.index(lambda)
}

/// Extraordinary index for propagation perpendicular to the optic axis.
pub fn n_ext90(model: &SellmeierModel, lambda: f64) -> Result<f64> {
    model.index(lambda)
}

/// Extraordinary index for a wavevector at `psi_deg` from the optic axis:
/// `1/n^2 = cos^2(psi)/n_o^2 + sin^2(psi)/n_e^2`.
pub fn n_ext(ord: &SellmeierModel, ext90: &SellmeierModel, lambda: f64, psi_deg: f64) -> Result<f64> {
    if !(0.0..=180.0).contains(&psi_deg) {
        return Err(Error::InvalidParameter(format!("psi = {psi_deg} deg outside [0, 180]")));
    }
    let no = ord.index(lambda)?;
    let ne = ext90.index(lambda)?;
    Ok(ellipsoid_index(no, ne, psi_deg.to_radians()))
}

#[inline]
pub(crate) fn ellipsoid_index(no: f64, ne: f64, psi: f64) -> f64 {
    // Exact endpoints so psi = 0 and 90 reproduce the principal indices bit for bit.
    if psi == 0.0 {
        return no;
    }
    if psi == std::f64::consts::FRAC_PI_2 {
        return ne;
    }
    let (s, c) = psi.sin_cos();
    (c * c / (no * no) + s * s / (ne * ne)).sqrt().recip()
}

/// A uniaxial nonlinear crystal slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniaxialCrystal {
    pub name: String,
    pub ord: SellmeierModel,
    pub ext90: SellmeierModel,
    /// Angle of the optic axis to the face normal, degrees.
    pub cut_angle: f64,
    /// Slab length along the pump, um.
    pub length_l: f64,
    pub d15: f64,
    pub d31: f64,
    /// Shortest transmitted wavelength, um. Advisory only.
    pub transparency_min: f64,
}

/// Validity window of the built-in BBO fit.
pub const BBO_WINDOW: Window = Window { min: 0.16, max: 3.5 };
pub const BBO_TRANSPARENCY_MIN: f64 = 0.189;
pub const DEFAULT_LENGTH_UM: f64 = 5000.0;

impl UniaxialCrystal {
    /// beta-barium borate, cut with the optic axis in the entrance face.
    pub fn bbo() -> Self {
        Self {
            name: "bbo".into(),
            ord: SellmeierModel {
                a: 2.7359,
                b: 0.01878,
                c: 0.01822,
                d: 0.01354,
                window: BBO_WINDOW,
            },
            ext90: SellmeierModel {
                a: 2.3753,
                b: 0.01224,
                c: 0.01667,
                d: 0.01516,
                window: BBO_WINDOW,
            },
            cut_angle: 90.0,
            length_l: DEFAULT_LENGTH_UM,
            d15: 1.0,
            d31: 1.0,
            transparency_min: BBO_TRANSPARENCY_MIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.length_l, "length_l")?;
        positive(self.d15, "d15")?;
        positive(self.d31, "d31")?;
        positive(self.transparency_min, "transparency_min")?;
        if !(0.0..=90.0).contains(&self.cut_angle) {
            return Err(Error::InvalidParameter(format!(
                "cut_angle {} outside [0, 90]",
                self.cut_angle
            )));
        }
        Ok(())
    }

    pub fn with_length(mut self, length_um: f64) -> Self {
        self.length_l = length_um;
        self
    }

    /// Sets `d31 = ratio * d15`.
    pub fn with_d31_over_d15(mut self, ratio: f64) -> Self {
        self.d31 = ratio * self.d15;
        self
    }

    /// Window on which both dispersion fits are valid.
    pub fn window(&self) -> Window {
        Window {
            min: self.ord.window.min.max(self.ext90.window.min),
            max: self.ord.window.max.min(self.ext90.window.max),
        }
    }

    pub fn n_ord(&self, lambda: f64) -> Result<f64> {
        self.ord.index(lambda)
    }

    pub fn n_ext90(&self, lambda: f64) -> Result<f64> {
        self.ext90.index(lambda)
    }

    pub fn n_ext(&self, lambda: f64, psi_deg: f64) -> Result<f64> {
        n_ext(&self.ord, &self.ext90, lambda, psi_deg)
    }

    /// Index of the given eigenmode; `psi_deg` is ignored for ordinary waves.
    pub fn index(&self, pol: Polarization, lambda: f64, psi_deg: f64) -> Result<f64> {
        match pol {
            Polarization::Ordinary => self.n_ord(lambda),
            Polarization::Extraordinary => self.n_ext(lambda, psi_deg),
        }
    }

    /// Angle from the optic axis at which the extraordinary index equals
    /// `target`, in degrees within [0, 90].
    pub fn psi_for_ext_index(&self, lambda: f64, target: f64) -> Result<f64> {
        let no = self.n_ord(lambda)?;
        let ne = self.n_ext90(lambda)?;
        let (lo, hi) = if no < ne { (no, ne) } else { (ne, no) };
        if !(target >= lo && target <= hi) {
            return Err(Error::InvalidParameter(format!(
                "index {target} not between n_o = {no} and n_e = {ne}"
            )));
        }
        let inv = |n: f64| 1.0 / (n * n);
        let s2 = ((inv(target) - inv(no)) / (inv(ne) - inv(no))).clamp(0.0, 1.0);
        Ok(s2.sqrt().asin().to_degrees())
    }

    pub fn below_transparency(&self, lambda: f64) -> bool {
        lambda < self.transparency_min
    }
}

/// Named collection of crystals.
#[derive(Debug, Clone)]
pub struct CrystalRegistry {
    crystals: BTreeMap<String, UniaxialCrystal>,
}

impl Default for CrystalRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl CrystalRegistry {
    pub fn with_builtin() -> Self {
        let mut crystals = BTreeMap::new();
        crystals.insert("bbo".to_string(), UniaxialCrystal::bbo());
        Self { crystals }
    }

    pub fn get(&self, name: &str) -> Result<&UniaxialCrystal> {
        self.crystals
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownCrystal(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.crystals.keys().map(String::as_str)
    }

    pub fn insert(&mut self, crystal: UniaxialCrystal) {
        self.crystals.insert(crystal.name.to_ascii_lowercase(), crystal);
    }

    pub fn load_file(&mut self, path: impl AsRef<Path>) -> Result<usize> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::RegistryParse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        self.load_str(&text)
    }

    /// Adds every section of `text`; returns how many crystals were read.
    pub fn load_str(&mut self, text: &str) -> Result<usize> {
        let parsed = parse_registry(text)?;
        let n = parsed.len();
        for c in parsed {
            self.insert(c);
        }
        Ok(n)
    }
}

const REQUIRED_KEYS: [&str; 9] = [
    "ord.a",
    "ord.b",
    "ord.c",
    "ord.d",
    "ext90.a",
    "ext90.b",
    "ext90.c",
    "ext90.d",
    "transparency_min",
];
const OPTIONAL_KEYS: [&str; 6] = ["window_min", "window_max", "cut_angle", "length_um", "d15", "d31"];

fn parse_registry(text: &str) -> Result<Vec<UniaxialCrystal>> {
    let mut sections: Vec<(String, usize, BTreeMap<String, f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::RegistryParse { line: line_no, message };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated section header".into()))?
                .trim();
            if name.is_empty() {
                return Err(err("empty section name".into()));
            }
            sections.push((name.to_string(), line_no, BTreeMap::new()));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("`{}` is not a decimal literal", value.trim())))?;
        let (_, _, map) = sections
            .last_mut()
            .ok_or_else(|| err("key outside of a [section]".into()))?;
        if map.insert(key.to_string(), value).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
    }

    sections
        .into_iter()
        .map(|(name, line, map)| {
            let err = |message: String| Error::RegistryParse { line, message };
            for key in REQUIRED_KEYS {
                if !map.contains_key(key) {
                    return Err(err(format!("crystal `{name}` is missing `{key}`")));
                }
            }
            let window = Window {
                min: map.get("window_min").copied().unwrap_or(BBO_WINDOW.min),
                max: map.get("window_max").copied().unwrap_or(BBO_WINDOW.max),
            };
            let model = |prefix: &str| {
                SellmeierModel::new(
                    map[&format!("{prefix}.a")],
                    map[&format!("{prefix}.b")],
                    map[&format!("{prefix}.c")],
                    map[&format!("{prefix}.d")],
                    window,
                )
            };
            let crystal = UniaxialCrystal {
                name: name.clone(),
                ord: model("ord").map_err(|e| err(format!("{name}: ordinary model: {e}")))?,
                ext90: model("ext90").map_err(|e| err(format!("{name}: extraordinary model: {e}")))?,
                cut_angle: map.get("cut_angle").copied().unwrap_or(90.0),
                length_l: map.get("length_um").copied().unwrap_or(DEFAULT_LENGTH_UM),
                d15: map.get("d15").copied().unwrap_or(1.0),
                d31: map.get("d31").copied().unwrap_or(1.0),
                transparency_min: map["transparency_min"],
            };
            crystal.validate().map_err(|e| err(format!("{name}: {e}")))?;
            Ok(crystal)
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // High-precision (30 digit) evaluations of the BBO fits, computed with an
    // independent arbitrary-precision calculator.
    const N_ORD_0351: f64 = 1.706_786_855_995_941_057;
    const N_ORD_0500: f64 = 1.677_361_055_353_951_108;
    const N_EXT90_0351: f64 = 1.577_443_630_168_704_482;
    const N_EXT90_020293: f64 = 1.695_302_860_922_850_149;
    const N_EXT45_0500: f64 = 1.613_773_705_746_606_995;

    #[test]
    fn bbo_ordinary_golden_values() {
        let c = UniaxialCrystal::bbo();
        assert!((c.n_ord(0.351).unwrap() - N_ORD_0351).abs() < 1e-14);
        assert!((c.n_ord(0.500).unwrap() - N_ORD_0500).abs() < 1e-14);
    }

    #[test]
    fn bbo_extraordinary_golden_values() {
        let c = UniaxialCrystal::bbo();
        assert!((c.n_ext90(0.351).unwrap() - N_EXT90_0351).abs() < 1e-14);
        assert!((c.n_ext90(0.20293).unwrap() - N_EXT90_020293).abs() < 1e-14);
    }

    #[test]
    fn ordinary_formula_is_literal() {
        let c = UniaxialCrystal::bbo();
        let l: f64 = 0.6328;
        let expect = (2.7359 + 0.01878 / (l * l - 0.01822) - 0.01354 * l * l).sqrt();
        assert_eq!(c.n_ord(l).unwrap(), expect);
    }

    #[test]
    fn normal_dispersion_on_visible_window() {
        let c = UniaxialCrystal::bbo();
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let l = 0.4 + 0.4 * i as f64 / 400.0;
            let n = c.n_ord(l).unwrap();
            assert!(n < prev, "n_ord not decreasing at {l}");
            prev = n;
        }
    }

    #[test]
    fn below_window_is_rejected() {
        let c = UniaxialCrystal::bbo();
        assert!(matches!(c.n_ord(0.100), Err(Error::OutOfWindow { .. })));
        assert!(matches!(c.n_ext90(0.100), Err(Error::OutOfWindow { .. })));
        assert!(matches!(c.n_ext(0.100, 30.0), Err(Error::OutOfWindow { .. })));
        assert!(c.n_ord(4.0).is_err());
    }

    #[test]
    fn negative_uniaxial_over_window() {
        let c = UniaxialCrystal::bbo();
        let w = c.window();
        for i in 0..=1000 {
            let l = w.min + (w.max - w.min) * i as f64 / 1000.0;
            assert!(c.n_ext90(l).unwrap() < c.n_ord(l).unwrap(), "at {l}");
        }
    }

    #[test]
    fn collinear_edge_cross_check_of_first_table_row() {
        // omega2 n2 = omega0 n0 + omega1 n1 at 481.07 / 351 / 202.93 nm.
        let c = UniaxialCrystal::bbo();
        let lhs = c.n_ord(0.48107).unwrap() / 0.48107 + c.n_ord(0.351).unwrap() / 0.351;
        let rhs = c.n_ext90(0.20293).unwrap() / 0.20293;
        // Inputs are rounded to 0.01 nm, so agreement is limited to ~3e-5.
        assert!((lhs - rhs).abs() / rhs < 1e-4, "{lhs} vs {rhs}");
    }

    #[test]
    fn ext_index_endpoints_are_exact() {
        let c = UniaxialCrystal::bbo();
        for &l in &[0.3, 0.5, 1.2] {
            assert_eq!(c.n_ext(l, 0.0).unwrap(), c.n_ord(l).unwrap());
            assert_eq!(c.n_ext(l, 90.0).unwrap(), c.n_ext90(l).unwrap());
        }
    }

    #[test]
    fn ext_index_at_45_degrees() {
        let c = UniaxialCrystal::bbo();
        let n = c.n_ext(0.5, 45.0).unwrap();
        assert!((n - N_EXT45_0500).abs() < 1e-13);
        let no = c.n_ord(0.5).unwrap();
        let ne = c.n_ext90(0.5).unwrap();
        let second_route = (2.0 / (1.0 / (no * no) + 1.0 / (ne * ne))).sqrt();
        assert!((n - second_route).abs() < 1e-14);
    }

    #[test]
    fn psi_round_trip() {
        let c = UniaxialCrystal::bbo();
        for &psi in &[0.0, 12.5, 45.0, 71.0, 90.0] {
            let n = c.n_ext(0.45, psi).unwrap();
            let back = c.psi_for_ext_index(0.45, n).unwrap();
            let again = c.n_ext(0.45, back).unwrap();
            assert!((again - n).abs() / n < 1e-12);
        }
    }

    #[test]
    fn transparency_flag() {
        let c = UniaxialCrystal::bbo();
        assert!(c.below_transparency(0.18801));
        assert!(!c.below_transparency(0.20293));
        assert!(c.n_ext90(0.18801).is_ok());
    }

    #[test]
    fn model_rejects_pole_inside_window() {
        let w = Window { min: 0.1, max: 2.0 };
        assert!(SellmeierModel::new(2.7359, 0.01878, 0.01822, 0.01354, w).is_err());
    }

    #[test]
    fn model_rejects_unphysical_index() {
        let w = Window { min: 0.2, max: 2.0 };
        assert!(matches!(
            SellmeierModel::new(0.5, 0.0, 0.0, 0.0, w),
            Err(Error::NonPhysical { .. })
        ));
    }

    const SAMPLE_REGISTRY: &str = "\
# custom dispersion data
[BBO-copy]
ord.a = 2.7359
ord.b = .01878
ord.c = .01822
ord.d = .01354
ext90.a = 2.3753
ext90.b = .01224
ext90.c = .01667
ext90.d = .01516
transparency_min = 0.189
length_um = 2000
d31 = 0.95
";

    #[test]
    fn registry_parses_sections() {
        let mut reg = CrystalRegistry::with_builtin();
        assert_eq!(reg.load_str(SAMPLE_REGISTRY).unwrap(), 1);
        let c = reg.get("bbo-copy").unwrap();
        assert_eq!(c.ord.b, 0.01878);
        assert_eq!(c.length_l, 2000.0);
        assert_eq!(c.d31, 0.95);
        assert_eq!(c.n_ord(0.5).unwrap(), UniaxialCrystal::bbo().n_ord(0.5).unwrap());
        assert!(reg.get("bbo").is_ok());
    }

    #[test]
    fn registry_reports_missing_and_unknown_keys() {
        let mut reg = CrystalRegistry::with_builtin();
        let missing = SAMPLE_REGISTRY.replace("ext90.d = .01516\n", "");
        let e = reg.load_str(&missing).unwrap_err();
        assert!(e.to_string().contains("ext90.d"), "{e}");
        let unknown = format!("{SAMPLE_REGISTRY}colour = 3\n");
        assert!(matches!(
            reg.load_str(&unknown),
            Err(Error::RegistryParse { line: 14, .. })
        ));
        let orphan = "ord.a = 1.0\n";
        assert!(reg.load_str(orphan).is_err());
    }

    #[test]
    fn unknown_crystal() {
        let reg = CrystalRegistry::default();
        assert!(matches!(reg.get("lbo"), Err(Error::UnknownCrystal(_))));
    }
}

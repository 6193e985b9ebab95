//! Output records. JSON carries full precision; CSV cells are rounded like
//! the published tables (angles and wavelengths to 2 decimals, ratios to 3).

use serde::Serialize;

use crate::detection::{DetectableMode, RateMethod, RateResult, RatioRow};
use crate::error::{Error, Result};
use crate::par::{map_ordered, ExecMode};
use crate::phasematch::{wavelength_grid, MatchProblem, MatchSolution, PlaneSelector, SweepNote};

pub const RAINBOW_HEADER: [&str; 5] = [
    "lambda1_nm",
    "theta1_deg_eq",
    "theta1_deg_long",
    "lambda2_nm",
    "warning",
];
pub const RATIO_HEADER: [&str; 3] = ["lambda1_nm", "ratio", "theta1_deg"];

fn fixed(v: Option<f64>, decimals: usize) -> String {
    match v {
        Some(v) => format!("{v:.decimals$}"),
        None => String::new(),
    }
}

/// One signal wavelength solved in both planes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RainbowRow {
    pub lambda1_nm: f64,
    pub theta1_deg_eq: Option<f64>,
    pub theta1_deg_long: Option<f64>,
    pub lambda2_nm: f64,
    pub warning: String,
}

impl RainbowRow {
    pub fn csv_record(&self) -> [String; 5] {
        [
            format!("{:.2}", self.lambda1_nm),
            fixed(self.theta1_deg_eq, 2),
            fixed(self.theta1_deg_long, 2),
            format!("{:.2}", self.lambda2_nm),
            self.warning.clone(),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Rainbow {
    pub rows: Vec<RainbowRow>,
    pub notes: Vec<SweepNote>,
}

fn rainbow_row(problem: &MatchProblem<'_>, lambda1_nm: f64) -> std::result::Result<RainbowRow, String> {
    let lambda1 = lambda1_nm / 1e3;
    let eq = problem.solve_pair(lambda1, PlaneSelector::Equatorial);
    let long = problem.solve_pair(lambda1, PlaneSelector::Longitudinal);
    let any: &MatchSolution = match (&eq, &long) {
        (Ok(s), _) | (_, Ok(s)) => s,
        (Err(e), Err(_)) => return Err(e.to_string()),
    };
    let mut warnings = Vec::new();
    if any.below_transparency {
        warnings.push("below_transparency".to_string());
    }
    if let Err(e) = &eq {
        warnings.push(format!("equatorial: {e}"));
    }
    if let Err(e) = &long {
        warnings.push(format!("longitudinal: {e}"));
    }
    Ok(RainbowRow {
        lambda1_nm,
        theta1_deg_eq: eq.as_ref().ok().map(|s| s.theta1),
        theta1_deg_long: long.as_ref().ok().map(|s| s.theta1),
        lambda2_nm: any.lambda2 * 1e3,
        warning: warnings.join("; "),
    })
}

/// Solves every wavelength of `grid_nm` in both planes. When the collinear
/// edge lies inside the grid range it is inserted, so it becomes the first
/// emitted row; grid points below it end up as notes. Wavelengths are
/// reported exactly as given.
pub fn rainbow(problem: &MatchProblem<'_>, grid_nm: &[f64], exec: ExecMode) -> Result<Rainbow> {
    let mut grid = grid_nm.to_vec();
    if let (Some(&lo), Some(&hi), Ok(edge)) = (grid.first(), grid.last(), problem.collinear_edge()) {
        let edge_nm = edge * 1e3;
        if edge_nm >= lo && edge_nm <= hi {
            let at = grid.partition_point(|&l| l <= edge_nm);
            grid.insert(at, edge_nm);
        }
    }
    let results = map_ordered(exec, &grid, |&l| rainbow_row(problem, l));
    let mut out = Rainbow::default();
    for (lambda1_nm, r) in grid.into_iter().zip(results) {
        match r {
            Ok(row) => out.rows.push(row),
            Err(message) => out.notes.push(SweepNote {
                lambda1: lambda1_nm / 1e3,
                message,
            }),
        }
    }
    if out.rows.is_empty() {
        return Err(Error::EmptySweep);
    }
    Ok(out)
}

/// `min + i * step` in nanometres.
pub fn nm_grid(min_nm: f64, max_nm: f64, step_nm: f64) -> Result<Vec<f64>> {
    wavelength_grid(min_nm, max_nm, step_nm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub lambda1_nm: f64,
    pub theta1_deg: f64,
    pub rate_arbitrary: f64,
    pub detectable_mode: DetectableMode,
    pub method: RateMethod,
    pub warnings: Vec<String>,
}

impl RateRecord {
    pub fn new(lambda1_nm: f64, sol: &MatchSolution, rate: &RateResult) -> Self {
        Self {
            lambda1_nm,
            theta1_deg: sol.theta1,
            rate_arbitrary: rate.rate(),
            detectable_mode: rate.detectable_mode,
            method: rate.method,
            warnings: rate.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRecord {
    pub lambda1_nm: f64,
    pub ratio: Option<f64>,
    pub theta1_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RatioRecord {
    pub fn csv_record(&self) -> [String; 3] {
        [
            format!("{:.2}", self.lambda1_nm),
            fixed(self.ratio, 3),
            fixed(self.theta1_deg, 2),
        ]
    }
}

impl RatioRecord {
    pub fn new(lambda1_nm: f64, r: &RatioRow) -> Self {
        Self {
            lambda1_nm,
            ratio: r.ratio,
            theta1_deg: r.theta1,
            note: r.note.clone(),
        }
    }
}

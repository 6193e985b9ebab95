//! Geometry and intensity of parametric up- and down-conversion of the
//! vacuum in a pumped uniaxial crystal.
//!
//! * [`crystal`]: Sellmeier dispersion and the crystal registry.
//! * [`phasematch`]: exit angles, partner wavelengths and spectrum edges.
//! * [`coupling`]: coupling constants, two-mode transfer across the slab,
//!   Fresnel factors and the multi-reflection Poynting series.
//! * [`detection`]: above-zeropoint photocount rates, the up/down rate
//!   ratio table and helper geometries.
//! * [`tables`]: recomputation of the published reference tables.
//! * [`report`]: CSV/JSON row types shared with the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod crystal;
pub mod detection;
pub mod error;
pub mod numeric;
pub mod par;
pub mod phasematch;
pub mod report;
pub mod tables;

pub use crate::crystal::{CrystalRegistry, Polarization, SellmeierModel, UniaxialCrystal};
pub use crate::error::{Error, Result};
pub use crate::par::ExecMode;
pub use crate::phasematch::{MatchProblem, MatchSolution, PlaneSelector, ProcessKind, PumpWave};

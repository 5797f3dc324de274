//! Numerical verification of the operator inequalities the density-of-states
//! bounds rest on, each on desk-scale discrete instances with machine-
//! readable reports.
//!
//! The discrete model satisfies the diamagnetic family, decoupling and
//! bracketing exactly (the same algebraic mechanisms as in the continuum:
//! off-diagonal domination and form ordering), so their tolerances cover
//! floating point only. The free Neumann trace bound is checked against the
//! continuum eigenvalue series, where the closed form exists. Monte Carlo
//! checks carry 3-sigma acceptance bands.

mod averaging;
mod bracketing;
mod diamagnetic;
pub mod suite;
mod traces;

pub use averaging::{check_spectral_averaging, SpectralAveragingInstance, WeightFunction};
pub use bracketing::{check_bracketing, check_decoupling};
pub use diamagnetic::{
    check_diamagnetic_partition, check_diamagnetic_semigroup, check_resolvent_power,
};
pub use traces::{
    check_golden_thompson_avg, check_neumann_partition_bound, check_wegner_mc, WegnerMcOutcome,
    WegnerMcRow,
};

use serde::Serialize;

/// Outcome of one check: the worst violation found (negative slack means the
/// inequality held with room) against the tolerance used.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// instance descriptor: seeds, sizes, parameters
    pub instance: serde_json::Value,
    /// worst violation (most positive lhs - rhs, in the check's scale)
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: &str, instance: serde_json::Value, margin: f64, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            instance,
            margin,
            tolerance,
            pass: margin <= tolerance,
        }
    }

    /// One JSON line for report streams.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

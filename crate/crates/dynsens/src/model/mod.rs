//! Hidden Markov models, factored dynamic models, evidence, and parameters.
//!
//! This module owns the model representations and the exact machinery built
//! on them: stochasticity validation, flattening of factored models to a
//! single global process, forward filtering with likelihood tracking, and
//! single-parameter variation under proportional co-variation.

mod evidence;
mod factored;
mod hmm;
mod param;

pub use evidence::EvidenceSequence;
pub use factored::{FactoredDbn, ObservationStream, DEFAULT_STATE_CAP};
pub use hmm::{FilterOutcome, HmmModel};
pub use param::ParameterRef;

use thiserror::Error;

/// Tolerance under which input stochasticity defects are repaired silently;
/// anything larger is rejected.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// One defect found while validating a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Which table the defect is in, e.g. `"transition"`, `"stream 1"`,
    /// `"initial"`, `"subprocess 0 transition"`.
    pub matrix: String,
    /// Row within the table, when applicable.
    pub row: Option<usize>,
    /// Size of the defect (row-sum deviation, magnitude of a negative
    /// entry, ...).
    pub magnitude: f64,
    /// Human-readable description.
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Outcome of validating a model: empty means every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        matrix: impl Into<String>,
        row: Option<usize>,
        magnitude: f64,
        message: String,
    ) {
        self.violations.push(Violation {
            matrix: matrix.into(),
            row,
            magnitude,
            message,
        });
    }

    /// Largest defect magnitude in the report, 0 when valid.
    pub fn worst_defect(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.magnitude)
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(&v.message)?;
        }
        Ok(())
    }
}

/// Errors raised by model construction and the exact operations.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model structure: {0}")]
    Structure(String),

    #[error("model invalid: {0}")]
    Invalid(ValidationReport),

    #[error("joint state space has {states} states, exceeding the cap of {cap}")]
    StateCapExceeded { states: usize, cap: usize },

    #[error("evidence has zero likelihood at time step {step}")]
    ImpossibleEvidence { step: usize },

    #[error("proportional co-variation undefined: nominal value of {nominal} fills its row")]
    CovariationUndefined { nominal: f64 },

    #[error("parameter value {value} lies outside [0, 1]")]
    ValueOutOfDomain { value: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("time step {time} outside [1, {horizon}]")]
    TimeOutOfRange { time: usize, horizon: usize },

    #[error("evidence does not match the model: {0}")]
    EvidenceMismatch(String),
}

//! Sensitivity analysis and threshold decision robustness for dynamic
//! Bayesian networks.
//!
//! The crate monitors a hidden process with exact forward filtering
//! (flattening factored models to a single global process first), expresses
//! a filtered probability as a rational function of one or two network
//! parameters under proportional co-variation, derives the parameter
//! regions within which a threshold-based decision is unchanged, and
//! certifies contraction-based analysis windows that trade a bounded
//! accuracy loss for shorter histories and lower polynomial degrees.
//!
//! The numeric core is generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); the crate root re-exports `f64`
//! aliases, which is what the file formats and the command-line front end
//! use.
//!
//! # Quick start
//!
//! ```
//! use dynsens::{
//!     EvidenceSequence, HmmModel, Matrix, ParameterRef, SensitivityTarget, ThresholdModel,
//! };
//! use dynsens::decision::single_param_regions;
//! use dynsens::sensitivity::compute_univariate;
//!
//! // Two hidden states, one binary observation stream.
//! let model = HmmModel::new(
//!     Matrix::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap(),
//!     vec![Matrix::from_rows(vec![vec![0.85, 0.15], vec![0.3, 0.7]]).unwrap()],
//!     vec![0.95, 0.05],
//! )
//! .unwrap();
//!
//! // Observe the stream at steps 2 and 4, monitor state 1 at step 4.
//! let evidence = EvidenceSequence::empty(4)
//!     .with_observation(2, 0, 1)
//!     .with_observation(4, 0, 1);
//! let posterior = model.filter(&evidence, 4).unwrap().posterior[1];
//!
//! // Express that probability as a function of one emission parameter and
//! // derive the intervals where the recommended action is unchanged.
//! let param = ParameterRef::observation(&model, 0, 1, 1).unwrap();
//! let target = SensitivityTarget::new(1, 4, evidence);
//! let sens = compute_univariate(&model, &target, &param).unwrap();
//! assert!((sens.eval(param.nominal()) - posterior).abs() < 1e-9);
//!
//! let thresholds = ThresholdModel::new(0.12, 0.2, 0.64).unwrap();
//! let regions = single_param_regions(&sens, &thresholds).unwrap();
//! assert_eq!(regions.labels.len(), regions.boundaries.len() + 1);
//! ```

// Guards written as `!(x >= lo && x <= hi)` reject NaN along with the
// out-of-range values; the positive form would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod decision;
pub mod io;
pub mod matrix;
pub mod model;
pub mod polynomials;
pub mod scalar;
pub mod sensitivity;

pub use decision::{Decision, ThresholdSide};
pub use scalar::Real;

/// Dense `f64` matrix.
pub type Matrix = matrix::Matrix<f64>;

/// Single-process model over `f64`.
pub type HmmModel = model::HmmModel<f64>;
/// Factored model over `f64`.
pub type FactoredDbn = model::FactoredDbn<f64>;
/// Filtering result over `f64`.
pub type FilterOutcome = model::FilterOutcome<f64>;
/// Parameter reference over `f64`.
pub type ParameterRef = model::ParameterRef<f64>;

/// Factored observation stream over `f64`.
pub type ObservationStream = model::ObservationStream<f64>;

pub use model::{EvidenceSequence, ModelError, ValidationReport, Violation};

/// Polynomial over `f64`.
pub type Polynomial = polynomials::Polynomial<f64>;
/// Rational function over `f64`.
pub type RationalFunction = polynomials::RationalFunction<f64>;

pub use polynomials::PolyError;

/// One-parameter sensitivity function over `f64`.
pub type UnivariateSensitivity = sensitivity::UnivariateSensitivity<f64>;
/// Two-parameter sensitivity function over `f64`.
pub type BivariateSensitivity = sensitivity::BivariateSensitivity<f64>;
/// Bivariate coefficient grid over `f64`.
pub type BivariatePolynomial = sensitivity::BivariatePolynomial<f64>;

pub use sensitivity::{DegreeBounds, SensitivityError, SensitivityTarget};

/// Threshold model over `f64`.
pub type ThresholdModel = decision::ThresholdModel<f64>;
/// Decision regions over `f64`.
pub type DecisionRegions = decision::DecisionRegions<f64>;
/// Boundary curve over `f64`.
pub type BoundaryCurve = decision::BoundaryCurve<f64>;

pub use decision::DecisionError;

/// Window certificate over `f64`.
pub type ContractionReport = contraction::ContractionReport<f64>;
/// Windowed sensitivity function over `f64`.
pub type WindowedSensitivity = contraction::WindowedSensitivity<f64>;

pub use contraction::{ContractionError, WindowMode};

//! Individual gain statistics for pre/post assessment scores.
//!
//! Scores live on the unit interval. The core change functions are generic
//! over [`scalar::Scalar`], so they run on `f32`, `f64` or exact rationals;
//! everything statistical is generic over [`scalar::Real`]. The aliases
//! below fix the scalar to `f64` (or [`Rational`]) for everyday use.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cohort;
pub mod descriptive;
pub mod error;
pub mod gain;
pub mod inference;
pub mod pipeline;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use error::{Error, Result, RowError};
pub use gain::{
    change_combine, evaluate, final_from_gain, fractional_increase, gain_from_increase, hake_mean_gain,
    individual_gain, log_difference, scale_invariance_check, ChangeKind,
};
pub use scalar::{Real, Scalar};

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;

pub type UnitScore = gain::UnitScore<f64>;
pub type ScoreRecord = gain::ScoreRecord<f64>;
pub type ChangeValue = gain::ChangeValue<f64>;
pub type GainRecord = cohort::GainRecord<f64>;
pub type DistributionSummary = descriptive::DistributionSummary<f64>;
pub type Histogram = descriptive::Histogram<f64>;
pub type DensityCurve = descriptive::DensityCurve<f64>;
pub type QQData = descriptive::QQData<f64>;
pub type CohortComparison = inference::CohortComparison<f64>;
pub type RegressionFit = inference::RegressionFit<f64>;

pub type ExactUnitScore = gain::UnitScore<Rational>;
pub type ExactChangeValue = gain::ChangeValue<Rational>;

//! Unit-scaled scores and relative-change functions.
//!
//! Scores live on `[0, 1]`. Three change functions are provided:
//!
//! * individual gain `g(x, y) = (y - x) / (1 - x)`, the share of the available
//!   headroom that was realised;
//! * fractional increase `(y - x) / x`;
//! * logarithmic difference `ln(y / x)`.
//!
//! Gain is the unique map `[0,1] x [0,1] -> (-inf, 1]` with `g(x, x) = 0`,
//! `g(0, y) = y` and `g(x, z) = g(x, y) ⊕ g(y, z)`, where `a ⊕ b = a + b - ab`
//! (see [`change_combine`]). Unlike the other two functions it is *not*
//! invariant under `(x, y) -> (λx, λy)`: `g(0.25, 0.375) = 1/6` while
//! `g(0.5, 0.75) = 1/2`. It is continuous and strictly increasing in `y`.
//! The literature sometimes states the opposite on both counts; the
//! functions here, and their tests, follow direct evaluation.
//!
//! The rational functions are generic over [`Scalar`], so they run on
//! `f32`, `f64` and exact rationals alike. Only [`log_difference`] and
//! [`scale_invariance_check`] need [`Real`].

use std::fmt;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Absolute tolerance for equality of change values in floating point.
pub const CHANGE_TOLERANCE: f64 = 1e-12;

/// A score expressed as a fraction of the maximum marks.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitScore<T>(T);

impl<T: Scalar> UnitScore<T> {
    pub fn new(value: T) -> Result<Self> {
        if !(value >= T::zero() && value <= T::one()) {
            return Err(Error::OutOfRange(to_f64(&value)));
        }
        Ok(UnitScore(value))
    }

    pub fn zero() -> Self {
        UnitScore(T::zero())
    }

    pub fn one() -> Self {
        UnitScore(T::one())
    }

    pub fn value(&self) -> &T {
        &self.0
    }

    pub fn into_inner(self) -> T {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0 == T::one()
    }
}

impl<T: Real> UnitScore<T> {
    /// Builds a score from a percentage in `[0, 100]`.
    pub fn from_percent(percent: T) -> Result<Self> {
        Self::new(percent / T::lit(100.0))
    }

    pub fn get(&self) -> T {
        self.0
    }
}

/// One student's pair of scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord<T> {
    pub student_id: String,
    pub cohort: String,
    pub initial: UnitScore<T>,
    pub final_score: UnitScore<T>,
}

impl<T: Scalar> ScoreRecord<T> {
    pub fn new(
        student_id: impl Into<String>,
        cohort: impl Into<String>,
        initial: UnitScore<T>,
        final_score: UnitScore<T>,
    ) -> Result<Self> {
        let student_id = student_id.into();
        let cohort = cohort.into();
        if student_id.is_empty() {
            return Err(Error::InvalidArgument("student_id must be non-empty".into()));
        }
        if cohort.is_empty() {
            return Err(Error::InvalidArgument("cohort must be non-empty".into()));
        }
        Ok(ScoreRecord { student_id, cohort, initial, final_score })
    }

    pub fn gain(&self) -> Result<ChangeValue<T>> {
        individual_gain(self.initial.clone(), self.final_score.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeKind {
    Gain,
    FractionalIncrease,
    LogDifference,
}

impl ChangeKind {
    pub fn name(self) -> &'static str {
        match self {
            ChangeKind::Gain => "gain",
            ChangeKind::FractionalIncrease => "fractional_increase",
            ChangeKind::LogDifference => "log_difference",
        }
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The value of a change function tagged with the function that produced it.
///
/// Gain-kind values never exceed 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeValue<T> {
    value: T,
    kind: ChangeKind,
}

impl<T: Scalar> ChangeValue<T> {
    pub fn gain(value: T) -> Result<Self> {
        if value > T::one() {
            return Err(Error::GainAboveOne(to_f64(&value)));
        }
        Ok(ChangeValue { value, kind: ChangeKind::Gain })
    }

    pub fn fractional_increase(value: T) -> Self {
        ChangeValue { value, kind: ChangeKind::FractionalIncrease }
    }

    pub fn log_difference(value: T) -> Self {
        ChangeValue { value, kind: ChangeKind::LogDifference }
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn into_inner(self) -> T {
        self.value
    }

    pub fn kind(&self) -> ChangeKind {
        self.kind
    }

    fn expect_kind(&self, expected: ChangeKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::KindMismatch { expected: expected.name(), found: self.kind.name() });
        }
        Ok(())
    }

    // Results that are <= 1 in exact arithmetic; clamps a rounding overshoot.
    fn gain_unchecked(value: T) -> Self {
        let value = if value > T::one() { T::one() } else { value };
        ChangeValue { value, kind: ChangeKind::Gain }
    }
}

impl<T: Real> ChangeValue<T> {
    pub fn get(&self) -> T {
        self.value
    }
}

fn to_f64<T: ToPrimitive>(value: &T) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Individual gain `(final - initial) / (1 - initial)`.
///
/// Undefined whenever `initial = 1`, whatever the final score.
pub fn individual_gain<T: Scalar>(initial: UnitScore<T>, final_score: UnitScore<T>) -> Result<ChangeValue<T>> {
    let (x, y) = (initial.0, final_score.0);
    if x == T::one() {
        return Err(Error::GainUndefined);
    }
    let headroom = T::one() - x.clone();
    Ok(ChangeValue::gain_unchecked((y - x) / headroom))
}

/// Fractional increase `(final - initial) / initial`.
pub fn fractional_increase<T: Scalar>(initial: UnitScore<T>, final_score: UnitScore<T>) -> Result<ChangeValue<T>> {
    let (x, y) = (initial.0, final_score.0);
    if x == T::zero() {
        return Err(Error::IncreaseUndefined);
    }
    Ok(ChangeValue::fractional_increase((y - x.clone()) / x))
}

/// Logarithmic difference `ln(final / initial)`.
pub fn log_difference<T: Real>(initial: UnitScore<T>, final_score: UnitScore<T>) -> Result<ChangeValue<T>> {
    let (x, y) = (initial.0, final_score.0);
    if x == T::zero() || y == T::zero() {
        return Err(Error::LogUndefined);
    }
    Ok(ChangeValue::log_difference((y / x).ln()))
}

/// Gain recovered from a fractional increase: `increase * x / (1 - x)`.
pub fn gain_from_increase<T: Scalar>(increase: ChangeValue<T>, initial: UnitScore<T>) -> Result<ChangeValue<T>> {
    increase.expect_kind(ChangeKind::FractionalIncrease)?;
    let x = initial.0;
    if x == T::one() {
        return Err(Error::GainUndefined);
    }
    if x == T::zero() {
        return Err(Error::IncreaseUndefined);
    }
    let odds = x.clone() / (T::one() - x);
    Ok(ChangeValue::gain_unchecked(increase.value * odds))
}

/// Final score implied by an initial score and a gain:
/// `initial + gain * (1 - initial)`, which equals `gain + initial * (1 - gain)`.
///
/// This inverts [`individual_gain`] in its second argument. Strongly negative
/// gains can push the result below 0, which is reported as `OutOfRange`.
pub fn final_from_gain<T: Scalar>(initial: UnitScore<T>, gain: ChangeValue<T>) -> Result<UnitScore<T>> {
    gain.expect_kind(ChangeKind::Gain)?;
    let x = initial.0;
    if x == T::one() {
        return Err(Error::GainUndefined);
    }
    let g = gain.value;
    let final_score = x.clone() + g * (T::one() - x);
    UnitScore::new(final_score)
}

/// Cohort-level gain computed from mean scores rather than per student.
pub fn hake_mean_gain<T: Scalar>(mean_initial: UnitScore<T>, mean_final: UnitScore<T>) -> Result<ChangeValue<T>> {
    individual_gain(mean_initial, mean_final)
}

/// The operation `a ⊕ b = a + b - a*b` that gain preserves:
/// `g(x, z) = g(x, y) ⊕ g(y, z)`.
///
/// `0` is the identity and `1` is absorbing.
pub fn change_combine<T: Scalar>(a: ChangeValue<T>, b: ChangeValue<T>) -> Result<ChangeValue<T>> {
    a.expect_kind(ChangeKind::Gain)?;
    b.expect_kind(ChangeKind::Gain)?;
    let product = a.value.clone() * b.value.clone();
    Ok(ChangeValue::gain_unchecked(a.value + b.value - product))
}

/// Evaluates the change function of the given kind.
pub fn evaluate<T: Real>(kind: ChangeKind, initial: UnitScore<T>, final_score: UnitScore<T>) -> Result<ChangeValue<T>> {
    match kind {
        ChangeKind::Gain => individual_gain(initial, final_score),
        ChangeKind::FractionalIncrease => fractional_increase(initial, final_score),
        ChangeKind::LogDifference => log_difference(initial, final_score),
    }
}

/// Whether `C(λx, λy) = C(x, y)` holds (within [`CHANGE_TOLERANCE`]) for the
/// change function `kind`.
pub fn scale_invariance_check<T: Real>(
    kind: ChangeKind,
    initial: UnitScore<T>,
    final_score: UnitScore<T>,
    lambda: T,
) -> Result<bool> {
    let (x, y) = (initial.0, final_score.0);
    if !(lambda > T::zero()) || lambda * x.max(y) > T::one() {
        return Err(Error::InvalidArgument(format!(
            "scale factor {lambda} must be positive with lambda * max(x, y) <= 1"
        )));
    }
    let base = evaluate(kind, initial, final_score)?;
    let scaled = evaluate(kind, UnitScore::new(lambda * x)?, UnitScore::new(lambda * y)?)?;
    Ok((base.value - scaled.value).abs() <= T::lit(CHANGE_TOLERANCE))
}

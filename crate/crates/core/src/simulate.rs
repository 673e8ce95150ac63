//! Seeded synthetic cohorts.
//!
//! Initial scores and gains are drawn through a Gaussian copula: two
//! independent standard normals `z1, z2` are mixed into `w1 = z1` and
//! `w2 = ρ z1 + √(1 - ρ²) z2`, and each marginal is obtained from its `w`
//! (uniform marginals through `Φ(w)`, normal marginals as `μ + σ w`).
//! Draws outside the marginal supports, or whose implied final score leaves
//! `[0, 1]`, are rejected and redrawn.
//!
//! Record `i` uses its own ChaCha8 stream (`seed`, stream `i`), so a cohort
//! can be generated in any order, or in parallel, with identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gain::{final_from_gain, ChangeValue, ScoreRecord, UnitScore};
use crate::special::normal_cdf;

/// Attempts allowed per record before the spec is declared infeasible.
pub const MAX_ATTEMPTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// Uniform on `[low, high]`; `low == high` is a point mass.
    Uniform { low: f64, high: f64 },
    /// Normal, truncated to the variable's support by rejection.
    Normal { mean: f64, sd: f64 },
}

impl Marginal {
    fn validate(&self, what: &str) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!("{what} distribution {self:?} is not well formed")))
        }
    }

    fn transform(&self, w: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => low + (high - low) * normal_cdf(w),
            Marginal::Normal { mean, sd } => mean + sd * w,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub cohort: String,
    pub n: usize,
    /// Truncated to `[0, 1)`.
    pub initial: Marginal,
    /// Truncated to `(-inf, 1]`.
    pub gain: Marginal,
    /// Copula correlation in `[-1, 1]`.
    pub rho: f64,
    pub seed: u64,
}

impl CohortSpec {
    fn validate(&self) -> Result<()> {
        if self.cohort.is_empty() {
            return Err(Error::Spec("cohort label must be non-empty".into()));
        }
        self.initial.validate("initial")?;
        self.gain.validate("gain")?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Spec(format!("rho = {} outside [-1, 1]", self.rho)));
        }
        let disjoint = match self.initial {
            Marginal::Uniform { low, high } => high < 0.0 || low >= 1.0,
            Marginal::Normal { mean, sd } => sd == 0.0 && !(0.0..1.0).contains(&mean),
        } || match self.gain {
            Marginal::Uniform { low, .. } => low > 1.0,
            Marginal::Normal { mean, sd } => sd == 0.0 && mean > 1.0,
        };
        if disjoint {
            return Err(Error::Spec("marginal has no mass on its support".into()));
        }
        Ok(())
    }
}

/// Per-record random stream.
pub fn record_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One draw of `(initial, gain)` from the copula, without truncation.
pub fn draw_pair<R: Rng>(rng: &mut R, spec: &CohortSpec) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let w2 = spec.rho * z1 + (1.0 - spec.rho * spec.rho).max(0.0).sqrt() * z2;
    (spec.initial.transform(z1), spec.gain.transform(w2))
}

fn generate_record(spec: &CohortSpec, index: usize) -> Result<ScoreRecord<f64>> {
    let mut rng = record_rng(spec.seed, index);
    for _ in 0..MAX_ATTEMPTS {
        let (x, g) = draw_pair(&mut rng, spec);
        if !(0.0..1.0).contains(&x) || !(g <= 1.0) {
            continue;
        }
        let initial = UnitScore::new(x)?;
        let gain = ChangeValue::gain(g)?;
        let Ok(final_score) = final_from_gain(initial, gain) else {
            continue;
        };
        return ScoreRecord::new(format!("{}{:04}", spec.cohort, index + 1), spec.cohort.clone(), initial, final_score);
    }
    Err(Error::Spec(format!("no admissible draw for record {index} after {MAX_ATTEMPTS} attempts")))
}

/// Generates `spec.n` records; identical for identical specs.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Vec<ScoreRecord<f64>>> {
    spec.validate()?;
    (0..spec.n).map(|i| generate_record(spec, i)).collect()
}

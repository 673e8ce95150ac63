//! Per-cohort gain analytics.

use std::collections::BTreeMap;

use crate::descriptive::{mean, z_scores};
use crate::error::{Error, Result, ResultExt};
use crate::gain::{fractional_increase, hake_mean_gain, individual_gain, log_difference, ScoreRecord, UnitScore};
use crate::scalar::Real;

/// Population over which z-scores are standardized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZScope {
    #[default]
    WithinCohort,
    Combined,
}

/// A score record with its change values and z-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRecord<T> {
    pub record: ScoreRecord<T>,
    pub gain: T,
    /// `None` when the initial score is 0.
    pub increase: Option<T>,
    /// `None` when either score is 0.
    pub log_diff: Option<T>,
    /// `None` when the initial scores of the z-population do not vary.
    pub initial_z: Option<T>,
    pub gain_z: T,
}

/// Gain records with z-scores computed within each cohort.
pub fn build_gain_records<T: Real>(records: &[ScoreRecord<T>]) -> Result<Vec<GainRecord<T>>> {
    build_gain_records_with(records, ZScope::WithinCohort)
}

/// Gain records with z-scores over the population chosen by `scope`.
///
/// Output order follows input order.
pub fn build_gain_records_with<T: Real>(records: &[ScoreRecord<T>], scope: ZScope) -> Result<Vec<GainRecord<T>>> {
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut gains = Vec::with_capacity(records.len());
    for r in records {
        let g = individual_gain(r.initial, r.final_score)
            .context(|| format!("cohort {:?}, student {:?}", r.cohort, r.student_id))?;
        gains.push(g.get());
    }

    let mut populations: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = match scope {
            ZScope::WithinCohort => r.cohort.as_str(),
            ZScope::Combined => "",
        };
        populations.entry(key).or_default().push(i);
    }

    let mut gain_z = vec![T::zero(); records.len()];
    let mut initial_z = vec![None; records.len()];
    for (label, members) in &populations {
        let context = || match scope {
            ZScope::WithinCohort => format!("cohort {label:?}"),
            ZScope::Combined => "combined cohort".to_string(),
        };
        let g: Vec<T> = members.iter().map(|&i| gains[i]).collect();
        let gz = z_scores(&g).context(|| format!("{}: gain z-scores", context()))?;
        let initial: Vec<T> = members.iter().map(|&i| records[i].initial.get()).collect();
        let iz = match z_scores(&initial) {
            Ok(z) => z.into_iter().map(Some).collect(),
            Err(Error::DegenerateSample(_)) => vec![None; members.len()],
            Err(e) => return Err(e.context(format!("{}: initial z-scores", context()))),
        };
        for (k, &i) in members.iter().enumerate() {
            gain_z[i] = gz[k];
            initial_z[i] = iz[k];
        }
    }

    Ok(records
        .iter()
        .enumerate()
        .map(|(i, r)| GainRecord {
            record: r.clone(),
            gain: gains[i],
            increase: fractional_increase(r.initial, r.final_score).ok().map(|c| c.get()),
            log_diff: log_difference(r.initial, r.final_score).ok().map(|c| c.get()),
            initial_z: initial_z[i],
            gain_z: gain_z[i],
        })
        .collect())
}

fn gains_of<T: Real>(records: &[ScoreRecord<T>]) -> Result<Vec<T>> {
    records
        .iter()
        .map(|r| {
            individual_gain(r.initial, r.final_score)
                .map(|g| g.get())
                .context(|| format!("cohort {:?}, student {:?}", r.cohort, r.student_id))
        })
        .collect()
}

/// Arithmetic mean of the individual gains.
pub fn mean_individual_gain<T: Real>(records: &[ScoreRecord<T>]) -> Result<T> {
    mean(&gains_of(records)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HakeComparison<T> {
    /// Gain of the mean scores.
    pub hake: T,
    /// Mean of the per-student gains.
    pub mean_individual: T,
}

/// Hake's gain of the mean scores alongside the mean of individual gains.
///
/// The two agree whenever every initial score is the same.
pub fn hake_vs_individual<T: Real>(records: &[ScoreRecord<T>]) -> Result<HakeComparison<T>> {
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let initial: Vec<T> = records.iter().map(|r| r.initial.get()).collect();
    let finals: Vec<T> = records.iter().map(|r| r.final_score.get()).collect();
    let hake = hake_mean_gain(UnitScore::new(mean(&initial)?)?, UnitScore::new(mean(&finals)?)?)?.get();
    Ok(HakeComparison { hake, mean_individual: mean_individual_gain(records)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremeCounts {
    /// Records with `gain_z >= threshold`.
    pub high: usize,
    /// Records with `gain_z <= -threshold`.
    pub low: usize,
}

pub fn extreme_gain_counts<T: Real>(records: &[GainRecord<T>], z_threshold: T) -> Result<ExtremeCounts> {
    if !(z_threshold > T::zero()) {
        return Err(Error::InvalidArgument(format!("z threshold {z_threshold} must be positive")));
    }
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let high = records.iter().filter(|r| r.gain_z >= z_threshold).count();
    let low = records.iter().filter(|r| r.gain_z <= -z_threshold).count();
    Ok(ExtremeCounts { high, low })
}

/// Cross-classification by initial score against the mean initial score and
/// gain against the mean gain. Values equal to the mean count as above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadrantCounts {
    pub below_below: usize,
    pub below_above: usize,
    pub above_below: usize,
    pub above_above: usize,
}

impl QuadrantCounts {
    pub fn total(&self) -> usize {
        self.below_below + self.below_above + self.above_below + self.above_above
    }
}

pub fn quadrant_counts<T: Real>(records: &[ScoreRecord<T>]) -> Result<QuadrantCounts> {
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let gains = gains_of(records)?;
    let initial: Vec<T> = records.iter().map(|r| r.initial.get()).collect();
    let (mi, mg) = (mean(&initial)?, mean(&gains)?);
    let mut q = QuadrantCounts::default();
    for (&x, &g) in initial.iter().zip(&gains) {
        match (x < mi, g < mg) {
            (true, true) => q.below_below += 1,
            (true, false) => q.below_above += 1,
            (false, true) => q.above_below += 1,
            (false, false) => q.above_above += 1,
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GainGroupLabel {
    VeryHigh,
    LowA,
    LowB,
    LowC,
    None,
}

impl GainGroupLabel {
    pub const ALL: [GainGroupLabel; 5] = [
        GainGroupLabel::VeryHigh,
        GainGroupLabel::LowA,
        GainGroupLabel::LowB,
        GainGroupLabel::LowC,
        GainGroupLabel::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GainGroupLabel::VeryHigh => "VERY_HIGH",
            GainGroupLabel::LowA => "LOW_A",
            GainGroupLabel::LowB => "LOW_B",
            GainGroupLabel::LowC => "LOW_C",
            GainGroupLabel::None => "NONE",
        }
    }
}

/// Labels one record from its two z-scores.
///
/// `gain_z > 1` is very high gain. Below `gain_z < -1` the low-gain groups
/// are checked most specific first: A (`initial_z > 2`), B (`initial_z > 0`),
/// C (`initial_z < -1`). Low-gain records with `-1 <= initial_z <= 0` belong
/// to no group.
pub fn classify<T: Real>(gain_z: T, initial_z: Option<T>) -> Result<GainGroupLabel> {
    let one = T::one();
    if gain_z > one {
        return Ok(GainGroupLabel::VeryHigh);
    }
    if !(gain_z < -one) {
        return Ok(GainGroupLabel::None);
    }
    let iz = initial_z.ok_or(Error::DegenerateSample("initial z-score undefined (constant initial scores)"))?;
    Ok(if iz > T::lit(2.0) {
        GainGroupLabel::LowA
    } else if iz > T::zero() {
        GainGroupLabel::LowB
    } else if iz < -one {
        GainGroupLabel::LowC
    } else {
        GainGroupLabel::None
    })
}

pub fn classify_gain_groups<T: Real>(records: &[GainRecord<T>]) -> Result<Vec<GainGroupLabel>> {
    records
        .iter()
        .map(|r| classify(r.gain_z, r.initial_z).context(|| format!("student {:?}", r.record.student_id)))
        .collect()
}

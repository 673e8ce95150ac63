//! End-to-end analysis of a [`Dataset`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cohort::{
    build_gain_records_with, classify_gain_groups, extreme_gain_counts, hake_vs_individual, quadrant_counts,
    GainGroupLabel, GainRecord, QuadrantCounts, ZScope,
};
use crate::descriptive::{
    freedman_diaconis_bins, histogram, kde_on_grid, kde_with, qq_normal, silverman_bandwidth, summarize,
    uniform_grid, DensityCurve, DistributionSummary, Histogram, KdeOptions, QQData, KDE_GRID_PAD,
};
use crate::error::{Error, Result, ResultExt};
use crate::gain::ScoreRecord;
use crate::inference::{compare_cohorts, polyfit_r2, RegressionFit, VarianceModel, DEFAULT_LEVEL};

use super::ingest::Dataset;

/// Label of the pooled population in reports.
pub const COMBINED_LABEL: &str = "combined";

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Histogram bins; Freedman–Diaconis when `None`.
    pub bins: Option<usize>,
    /// KDE bandwidth; Silverman when `None`.
    pub bandwidth: Option<f64>,
    pub z_threshold: f64,
    /// Cohort pair to compare; the first two labels in lexicographic order
    /// when `None`.
    pub compare: Option<(String, String)>,
    pub z_scope: ZScope,
    pub level: f64,
    pub variance_model: VarianceModel,
    pub kde_points: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bins: None,
            bandwidth: None,
            z_threshold: 1.0,
            compare: None,
            z_scope: ZScope::WithinCohort,
            level: DEFAULT_LEVEL,
            variance_model: VarianceModel::Welch,
            kde_points: crate::descriptive::KDE_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionsEcho {
    pub bins: Option<usize>,
    pub bandwidth: Option<f64>,
    pub z_threshold: f64,
    pub z_scope: &'static str,
    pub ci_level: f64,
    pub variance_model: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub student_id: String,
    pub cohort: String,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis_pearson: Option<f64>,
    pub kurtosis_excess: Option<f64>,
}

impl From<DistributionSummary<f64>> for SummaryReport {
    fn from(s: DistributionSummary<f64>) -> Self {
        SummaryReport {
            n: s.n,
            mean: s.mean,
            sd: s.sd,
            skewness: s.skewness,
            kurtosis_pearson: s.kurtosis,
            kurtosis_excess: s.excess_kurtosis(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summaries {
    pub gain: SummaryReport,
    /// Over records with a defined fractional increase.
    pub increase: Option<SummaryReport>,
    pub initial: SummaryReport,
    #[serde(rename = "final")]
    pub final_score: SummaryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanGains {
    pub hake: f64,
    pub mean_individual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeReport {
    pub z_threshold: f64,
    pub high: usize,
    pub low: usize,
    pub denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantReport {
    pub below_below: usize,
    pub below_above: usize,
    pub above_below: usize,
    pub above_above: usize,
    pub denominator: usize,
}

impl QuadrantReport {
    fn new(q: QuadrantCounts) -> Self {
        QuadrantReport {
            below_below: q.below_below,
            below_above: q.below_above,
            above_below: q.above_below,
            above_above: q.above_above,
            denominator: q.total(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub very_high: usize,
    pub low_a: usize,
    pub low_b: usize,
    pub low_c: usize,
    pub none: usize,
    pub denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub response: &'static str,
    pub predictor: &'static str,
    pub degree: usize,
    pub n: usize,
    pub coefficients: Option<Vec<f64>>,
    pub r_squared: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub label: String,
    pub n: usize,
    pub summaries: Summaries,
    pub mean_gain: MeanGains,
    pub extremes: ExtremeReport,
    pub quadrants: QuadrantReport,
    pub groups: Option<GroupReport>,
    pub groups_note: Option<String>,
    pub fits: Vec<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub cohort_a: String,
    pub cohort_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub diff_a_minus_b: f64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub variance_model: &'static str,
    pub cohens_d_b_minus_a: f64,
    pub prob_superiority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordRow {
    pub student_id: String,
    pub cohort: String,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_score: f64,
    pub gain: f64,
    pub increase: Option<f64>,
    pub log_diff: Option<f64>,
    pub initial_z: Option<f64>,
    pub gain_z: f64,
    pub group: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub student_id: String,
    pub cohort: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    pub x_name: &'static str,
    pub y_name: &'static str,
    pub points: Vec<ScatterPoint>,
    pub fit: Option<RegressionFit<f64>>,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub grid: Vec<f64>,
    /// `(cohort, bandwidth, density on grid)`.
    pub series: Vec<(String, f64, Vec<f64>)>,
}

/// Plot inputs derived from the combined population.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub histogram: Histogram<f64>,
    pub kde: DensityCurve<f64>,
    pub qq: QQData<f64>,
    pub overlay: Overlay,
    pub gain_vs_initial: Scatter,
    pub increase_vs_initial: Scatter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub source: String,
    pub scale: &'static str,
    pub options: OptionsEcho,
    pub record_count: usize,
    pub included_count: usize,
    pub exclusions: Vec<Exclusion>,
    pub cohorts: Vec<CohortReport>,
    pub combined: CohortReport,
    pub comparison: Option<ComparisonReport>,
    pub records: Vec<RecordRow>,
    #[serde(skip)]
    pub plots: PlotData,
}

fn z_scope_name(scope: ZScope) -> &'static str {
    match scope {
        ZScope::WithinCohort => "within_cohort",
        ZScope::Combined => "combined",
    }
}

fn variance_name(model: VarianceModel) -> &'static str {
    match model {
        VarianceModel::Welch => "welch",
        VarianceModel::Pooled => "pooled",
    }
}

fn validate_options(options: &AnalysisOptions) -> Result<()> {
    if !(options.z_threshold > 0.0 && options.z_threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!("z threshold {} must be positive", options.z_threshold)));
    }
    if options.bins == Some(0) {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    if let Some(h) = options.bandwidth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("bandwidth {h} must be positive")));
        }
    }
    if !(options.level > 0.0 && options.level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {} outside (0, 1)", options.level)));
    }
    if options.kde_points < 2 {
        return Err(Error::InvalidArgument("KDE grid needs at least 2 points".into()));
    }
    Ok(())
}

/// Runs every analysis on `dataset`. The result depends only on the dataset
/// and the options.
pub fn run_analysis(dataset: &Dataset, options: &AnalysisOptions) -> Result<AnalysisReport> {
    validate_options(options)?;
    let (included, excluded): (Vec<&ScoreRecord<f64>>, Vec<&ScoreRecord<f64>>) =
        dataset.records.iter().partition(|r| !r.initial.is_one());
    let exclusions = excluded
        .iter()
        .map(|r| Exclusion {
            student_id: r.student_id.clone(),
            cohort: r.cohort.clone(),
            initial: r.initial.get(),
            final_score: r.final_score.get(),
            reason: "gain undefined: initial score is 1".into(),
        })
        .collect();
    let included: Vec<ScoreRecord<f64>> = included.into_iter().cloned().collect();
    if included.is_empty() {
        return Err(Error::EmptySample.context("no records with a defined gain"));
    }

    let mut by_cohort: BTreeMap<&str, Vec<ScoreRecord<f64>>> = BTreeMap::new();
    for r in &included {
        by_cohort.entry(r.cohort.as_str()).or_default().push(r.clone());
    }

    let scoped = build_gain_records_with(&included, options.z_scope)?;
    let combined_records = build_gain_records_with(&included, ZScope::Combined)?;

    let mut cohorts = Vec::with_capacity(by_cohort.len());
    for (label, records) in &by_cohort {
        let gains: Vec<GainRecord<f64>> = scoped.iter().filter(|g| g.record.cohort == *label).cloned().collect();
        let report = cohort_report(label, records, &gains, options).context(|| format!("cohort {label:?}"))?;
        cohorts.push(report);
    }
    let combined = cohort_report(COMBINED_LABEL, &included, &combined_records, options)
        .context(|| "combined cohort".to_string())?;

    let comparison = comparison_report(&by_cohort, options)?;

    let labels: Vec<Option<GainGroupLabel>> = scoped.iter().map(|g| crate::cohort::classify(g.gain_z, g.initial_z).ok()).collect();
    let records = scoped
        .iter()
        .zip(labels)
        .map(|(g, label)| RecordRow {
            student_id: g.record.student_id.clone(),
            cohort: g.record.cohort.clone(),
            initial: g.record.initial.get(),
            final_score: g.record.final_score.get(),
            gain: g.gain,
            increase: g.increase,
            log_diff: g.log_diff,
            initial_z: g.initial_z,
            gain_z: g.gain_z,
            group: label.map(GainGroupLabel::name),
        })
        .collect();

    let plots = plot_data(&by_cohort, &combined_records, options)?;

    Ok(AnalysisReport {
        source: dataset.source.clone(),
        scale: dataset.scale.name(),
        options: OptionsEcho {
            bins: options.bins,
            bandwidth: options.bandwidth,
            z_threshold: options.z_threshold,
            z_scope: z_scope_name(options.z_scope),
            ci_level: options.level,
            variance_model: variance_name(options.variance_model),
        },
        record_count: dataset.records.len(),
        included_count: included.len(),
        exclusions,
        cohorts,
        combined,
        comparison,
        records,
        plots,
    })
}

fn cohort_report(
    label: &str,
    records: &[ScoreRecord<f64>],
    gains: &[GainRecord<f64>],
    options: &AnalysisOptions,
) -> Result<CohortReport> {
    let gain: Vec<f64> = gains.iter().map(|g| g.gain).collect();
    let increase: Vec<f64> = gains.iter().filter_map(|g| g.increase).collect();
    let initial: Vec<f64> = records.iter().map(|r| r.initial.get()).collect();
    let finals: Vec<f64> = records.iter().map(|r| r.final_score.get()).collect();

    let summaries = Summaries {
        gain: summarize(&gain)?.into(),
        increase: if increase.is_empty() { None } else { Some(summarize(&increase)?.into()) },
        initial: summarize(&initial)?.into(),
        final_score: summarize(&finals)?.into(),
    };
    let hake = hake_vs_individual(records)?;
    let extremes = extreme_gain_counts(gains, options.z_threshold)?;
    let quadrants = quadrant_counts(records)?;
    let (groups, groups_note) = match classify_gain_groups(gains) {
        Ok(labels) => {
            let count = |l: GainGroupLabel| labels.iter().filter(|&&x| x == l).count();
            let report = GroupReport {
                very_high: count(GainGroupLabel::VeryHigh),
                low_a: count(GainGroupLabel::LowA),
                low_b: count(GainGroupLabel::LowB),
                low_c: count(GainGroupLabel::LowC),
                none: count(GainGroupLabel::None),
                denominator: labels.len(),
            };
            (Some(report), None)
        }
        Err(e) if matches!(e.root(), Error::DegenerateSample(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    Ok(CohortReport {
        label: label.to_string(),
        n: records.len(),
        summaries,
        mean_gain: MeanGains { hake: hake.hake, mean_individual: hake.mean_individual },
        extremes: ExtremeReport {
            z_threshold: options.z_threshold,
            high: extremes.high,
            low: extremes.low,
            denominator: gains.len(),
        },
        quadrants: QuadrantReport::new(quadrants),
        groups,
        groups_note,
        fits: fits(gains),
    })
}

/// `(response, predictor, degree, points)` of one reported fit.
pub type FitInput = (&'static str, &'static str, usize, Vec<(f64, f64)>);

pub fn fit_inputs(gains: &[GainRecord<f64>]) -> Vec<FitInput> {
    let initial = |g: &GainRecord<f64>| g.record.initial.get();
    vec![
        ("gain", "initial", 1, gains.iter().map(|g| (initial(g), g.gain)).collect()),
        ("log_diff", "initial", 1, gains.iter().filter_map(|g| g.log_diff.map(|l| (initial(g), l))).collect()),
        ("increase", "initial", 2, gains.iter().filter_map(|g| g.increase.map(|v| (initial(g), v))).collect()),
        ("gain", "increase", 1, gains.iter().filter_map(|g| g.increase.map(|v| (v, g.gain))).collect()),
    ]
}

fn fits(gains: &[GainRecord<f64>]) -> Vec<FitReport> {
    fit_inputs(gains)
        .into_iter()
        .map(|(response, predictor, degree, points)| {
            let (x, y): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
            let n = x.len();
            match polyfit_r2(&x, &y, degree) {
                Ok(fit) => FitReport {
                    response,
                    predictor,
                    degree,
                    n,
                    coefficients: Some(fit.coefficients),
                    r_squared: Some(fit.r_squared),
                    error: None,
                },
                Err(e) => FitReport {
                    response,
                    predictor,
                    degree,
                    n,
                    coefficients: None,
                    r_squared: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn comparison_report(
    by_cohort: &BTreeMap<&str, Vec<ScoreRecord<f64>>>,
    options: &AnalysisOptions,
) -> Result<Option<ComparisonReport>> {
    let (a, b) = match &options.compare {
        Some((a, b)) => (a.as_str(), b.as_str()),
        None => {
            let mut labels = by_cohort.keys();
            match (labels.next(), labels.next()) {
                (Some(a), Some(b)) => (*a, *b),
                _ => return Ok(None),
            }
        }
    };
    let gains_for = |label: &str| -> Result<Vec<f64>> {
        let records = by_cohort.get(label).ok_or_else(|| Error::EmptySample.context(format!("cohort {label:?}")))?;
        records.iter().map(|r| r.gain().map(|g| g.get())).collect()
    };
    let (ga, gb) = (gains_for(a)?, gains_for(b)?);
    let c = compare_cohorts(&ga, &gb, options.level, options.variance_model)
        .context(|| format!("comparison {a:?} vs {b:?}"))?;
    Ok(Some(ComparisonReport {
        cohort_a: a.to_string(),
        cohort_b: b.to_string(),
        n_a: ga.len(),
        n_b: gb.len(),
        mean_a: c.mean_a,
        mean_b: c.mean_b,
        diff_a_minus_b: c.diff,
        ci_level: c.level,
        ci_low: c.ci_low,
        ci_high: c.ci_high,
        t_stat: c.t_stat,
        df: c.df,
        p_value: c.p_value,
        variance_model: variance_name(c.variance_model),
        cohens_d_b_minus_a: c.cohens_d,
        prob_superiority: c.prob_superiority,
    }))
}

fn plot_data(
    by_cohort: &BTreeMap<&str, Vec<ScoreRecord<f64>>>,
    combined: &[GainRecord<f64>],
    options: &AnalysisOptions,
) -> Result<PlotData> {
    let gains: Vec<f64> = combined.iter().map(|g| g.gain).collect();
    let bins = match options.bins {
        Some(b) => b,
        None => freedman_diaconis_bins(&gains)?,
    };
    let kde_options = KdeOptions { bandwidth: options.bandwidth, grid_points: options.kde_points };
    let hist = histogram(&gains, bins)?;
    let kde = kde_with(&gains, kde_options).context(|| "gain density".to_string())?;
    let qq = qq_normal(&gains)?;

    let mut per_cohort = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (label, records) in by_cohort {
        let g: Vec<f64> = records.iter().map(|r| r.gain().map(|c| c.get())).collect::<Result<_>>()?;
        if g.len() < 2 {
            continue;
        }
        let h = match options.bandwidth {
            Some(h) => h,
            None => match silverman_bandwidth(&g) {
                Ok(h) => h,
                Err(_) => continue,
            },
        };
        for &v in &g {
            lo = lo.min(v - KDE_GRID_PAD * h);
            hi = hi.max(v + KDE_GRID_PAD * h);
        }
        per_cohort.push((label.to_string(), h, g));
    }
    let overlay = if per_cohort.is_empty() {
        Overlay { grid: Vec::new(), series: Vec::new() }
    } else {
        let grid = uniform_grid(lo, hi, options.kde_points);
        let series = per_cohort
            .into_iter()
            .map(|(label, h, g)| {
                let density = kde_on_grid(&g, h, &grid);
                (label, h, density)
            })
            .collect();
        Overlay { grid, series }
    };

    let point = |g: &GainRecord<f64>, y: f64| ScatterPoint {
        student_id: g.record.student_id.clone(),
        cohort: g.record.cohort.clone(),
        x: g.record.initial.get(),
        y,
    };
    let gain_points: Vec<ScatterPoint> = combined.iter().map(|g| point(g, g.gain)).collect();
    let increase_points: Vec<ScatterPoint> =
        combined.iter().filter_map(|g| g.increase.map(|v| point(g, v))).collect();
    let fit_of = |points: &[ScatterPoint], degree| {
        let x: Vec<f64> = points.iter().map(|p| p.x).collect();
        let y: Vec<f64> = points.iter().map(|p| p.y).collect();
        polyfit_r2(&x, &y, degree).ok()
    };
    let gain_vs_initial = Scatter {
        x_name: "initial",
        y_name: "gain",
        fit: fit_of(&gain_points, 1),
        points: gain_points,
        degree: 1,
    };
    let increase_vs_initial = Scatter {
        x_name: "initial",
        y_name: "increase",
        fit: fit_of(&increase_points, 2),
        points: increase_points,
        degree: 2,
    };

    Ok(PlotData { histogram: hist, kde, qq, overlay, gain_vs_initial, increase_vs_initial })
}

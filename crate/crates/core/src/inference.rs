//! Two-sample comparison and least-squares fits.

use crate::descriptive::{mean, sample_variance};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{normal_cdf, student_t_quantile, student_t_two_sided};

/// Default confidence level for mean-difference intervals.
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Relative pivot tolerance below which a normal-equation system is
/// declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// How the standard error of a mean difference is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceModel {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `na + nb - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest<T> {
    pub t: T,
    pub df: T,
    /// Two-sided p-value.
    pub p: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval<T> {
    pub low: T,
    pub high: T,
    pub level: T,
}

impl<T: Real> ConfidenceInterval<T> {
    pub fn contains(&self, value: T) -> bool {
        self.low <= value && value <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortComparison<T> {
    pub mean_a: T,
    pub mean_b: T,
    /// `mean_a - mean_b`; also the orientation of the interval and `t_stat`.
    pub diff: T,
    pub ci_low: T,
    pub ci_high: T,
    pub level: T,
    pub t_stat: T,
    pub df: T,
    pub p_value: T,
    /// Standardized `(mean_b - mean_a)`: positive when cohort b is ahead.
    pub cohens_d: T,
    pub prob_superiority: T,
    pub variance_model: VarianceModel,
}

struct MeanDifference<T> {
    diff: T,
    se: T,
    df: T,
}

fn moments<T: Real>(sample: &[T]) -> Result<(T, T, T)> {
    match sample.len() {
        0 => return Err(Error::EmptySample),
        1 => return Err(Error::InsufficientData { needed: 2, got: 1 }),
        _ => {}
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sample contains a non-finite value".into()));
    }
    Ok((mean(sample)?, sample_variance(sample)?, T::count(sample.len())))
}

fn mean_difference<T: Real>(a: &[T], b: &[T], model: VarianceModel) -> Result<MeanDifference<T>> {
    let (ma, va, na) = moments(a)?;
    let (mb, vb, nb) = moments(b)?;
    let one = T::one();
    let (se2, df) = match model {
        VarianceModel::Welch => {
            let (ua, ub) = (va / na, vb / nb);
            let se2 = ua + ub;
            let df = se2 * se2 / (ua * ua / (na - one) + ub * ub / (nb - one));
            (se2, df)
        }
        VarianceModel::Pooled => {
            let df = na + nb - T::lit(2.0);
            let pooled = ((na - one) * va + (nb - one) * vb) / df;
            (pooled * (one / na + one / nb), df)
        }
    };
    if !(se2 > T::zero()) {
        return Err(Error::DegenerateSample("both samples have zero variance"));
    }
    Ok(MeanDifference { diff: ma - mb, se: se2.sqrt(), df })
}

/// Welch's unequal-variance t-test of `mean(a) = mean(b)`.
pub fn welch_t_test<T: Real>(a: &[T], b: &[T]) -> Result<TTest<T>> {
    t_test(a, b, VarianceModel::Welch)
}

pub fn t_test<T: Real>(a: &[T], b: &[T], model: VarianceModel) -> Result<TTest<T>> {
    let md = mean_difference(a, b, model)?;
    let t = md.diff / md.se;
    Ok(TTest { t, df: md.df, p: student_t_two_sided(t, md.df) })
}

/// Confidence interval for `mean(a) - mean(b)` under Welch's model.
pub fn mean_diff_ci<T: Real>(a: &[T], b: &[T], level: T) -> Result<ConfidenceInterval<T>> {
    mean_diff_ci_with(a, b, level, VarianceModel::Welch)
}

pub fn mean_diff_ci_with<T: Real>(a: &[T], b: &[T], level: T, model: VarianceModel) -> Result<ConfidenceInterval<T>> {
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::InvalidArgument(format!("confidence level {level} outside (0, 1)")));
    }
    let md = mean_difference(a, b, model)?;
    let critical = student_t_quantile((T::one() + level) / T::lit(2.0), md.df);
    let half_width = critical * md.se;
    Ok(ConfidenceInterval { low: md.diff - half_width, high: md.diff + half_width, level })
}

/// Pooled-sd standardized difference `(mean_b - mean_a) / s_pooled`.
pub fn cohens_d<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let (ma, va, na) = moments(a)?;
    let (mb, vb, nb) = moments(b)?;
    let one = T::one();
    let pooled = ((na - one) * va + (nb - one) * vb) / (na + nb - T::lit(2.0));
    if !(pooled > T::zero()) {
        return Err(Error::DegenerateSample("zero pooled variance"));
    }
    Ok((mb - ma) / pooled.sqrt())
}

/// Common-language effect size `Φ(d / √2)`: the chance that a random member
/// of the higher cohort outscores a random member of the other, assuming
/// normal scores with equal variance.
pub fn probability_of_superiority<T: Real>(d: T) -> T {
    normal_cdf(d / T::SQRT_2())
}

/// All comparison statistics for cohorts `a` and `b`.
pub fn compare_cohorts<T: Real>(a: &[T], b: &[T], level: T, model: VarianceModel) -> Result<CohortComparison<T>> {
    let test = t_test(a, b, model)?;
    let ci = mean_diff_ci_with(a, b, level, model)?;
    let d = cohens_d(a, b)?;
    let (mean_a, mean_b) = (mean(a)?, mean(b)?);
    Ok(CohortComparison {
        mean_a,
        mean_b,
        diff: mean_a - mean_b,
        ci_low: ci.low,
        ci_high: ci.high,
        level,
        t_stat: test.t,
        df: test.df,
        p_value: test.p,
        cohens_d: d,
        prob_superiority: probability_of_superiority(d),
        variance_model: model,
    })
}

fn check_pairs<T: Real>(x: &[T], y: &[T], needed: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.len() < needed {
        return Err(Error::InsufficientData { needed, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sample contains a non-finite value".into()));
    }
    Ok(())
}

/// Squared Pearson correlation.
pub fn pearson_r2<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pairs(x, y, 2)?;
    let (mx, my) = (mean(x)?, mean(y)?);
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    if !(sxx > T::zero() && syy > T::zero()) {
        return Err(Error::DegenerateSample("constant variable"));
    }
    Ok((sxy * sxy / (sxx * syy)).min(T::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit<T> {
    pub degree: usize,
    /// Ascending powers of x.
    pub coefficients: Vec<T>,
    pub r_squared: T,
}

impl<T: Real> RegressionFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }
}

/// Least-squares polynomial fit of degree 1 or 2 with `r² = 1 - SSE/SST`.
///
/// The normal equations are solved in the centered, scaled variable
/// `u = (x - mean(x)) / max|x - mean(x)|` and mapped back to powers of `x`.
pub fn polyfit_r2<T: Real>(x: &[T], y: &[T], degree: usize) -> Result<RegressionFit<T>> {
    if !(1..=2).contains(&degree) {
        return Err(Error::InvalidArgument(format!("degree {degree} not supported; use 1 or 2")));
    }
    check_pairs(x, y, degree + 2)?;
    let n = x.len();
    let center = mean(x)?;
    let scale = x.iter().fold(T::zero(), |acc, &v| acc.max((v - center).abs()));
    if !(scale > T::zero()) {
        return Err(Error::RankDeficient);
    }
    let u: Vec<T> = x.iter().map(|&v| (v - center) / scale).collect();

    let m = degree + 1;
    let mut normal = vec![vec![T::zero(); m + 1]; m];
    for (&ui, &yi) in u.iter().zip(y) {
        let mut powers = vec![T::one(); 2 * m - 1];
        for k in 1..powers.len() {
            powers[k] = powers[k - 1] * ui;
        }
        for r in 0..m {
            for c in 0..m {
                normal[r][c] = normal[r][c] + powers[r + c];
            }
            normal[r][m] = normal[r][m] + powers[r] * yi;
        }
    }
    let local = solve_normal_equations(normal)?;

    let y_mean = mean(y)?;
    let (mut sse, mut sst) = (T::zero(), T::zero());
    for (&ui, &yi) in u.iter().zip(y) {
        let fitted = local.iter().rev().fold(T::zero(), |acc, &c| acc * ui + c);
        sse = sse + (yi - fitted) * (yi - fitted);
        sst = sst + (yi - y_mean) * (yi - y_mean);
    }
    if !(sst > T::zero()) {
        return Err(Error::DegenerateSample("constant response"));
    }
    let r_squared = (T::one() - sse / sst).max(T::zero()).min(T::one());
    debug_assert_eq!(u.len(), n);
    Ok(RegressionFit { degree, coefficients: expand_shifted(&local, center, scale), r_squared })
}

// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_normal_equations<T: Real>(mut a: Vec<Vec<T>>) -> Result<Vec<T>> {
    let m = a.len();
    let magnitude = (0..m).fold(T::zero(), |acc, i| acc.max(a[i][i].abs()));
    let tolerance = T::lit(RANK_TOLERANCE) * magnitude;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
            .expect("non-empty");
        if !(a[pivot][col].abs() > tolerance) {
            return Err(Error::RankDeficient);
        }
        a.swap(col, pivot);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            for k in col..=m {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
        }
    }
    let mut solution = vec![T::zero(); m];
    for row in (0..m).rev() {
        let tail = (row + 1..m).fold(T::zero(), |acc, k| acc + a[row][k] * solution[k]);
        solution[row] = (a[row][m] - tail) / a[row][row];
    }
    Ok(solution)
}

// Rewrites Σ c_k ((x - center)/scale)^k as Σ a_j x^j.
fn expand_shifted<T: Real>(local: &[T], center: T, scale: T) -> Vec<T> {
    let m = local.len();
    let mut out = vec![T::zero(); m];
    // (x - center)^k expanded by the binomial theorem.
    for (k, &c) in local.iter().enumerate() {
        let weight = c / scale.powi(k as i32);
        for j in 0..=k {
            let binom = T::count(binomial(k, j));
            let shift = (-center).powi((k - j) as i32);
            out[j] = out[j] + weight * binom * shift;
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

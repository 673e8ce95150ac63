//! Sample summaries, z-scores, histograms, kernel density estimates and
//! normal quantile-plot data.
//!
//! Conventions:
//! * `sd` is the sample standard deviation (divisor `n - 1`).
//! * skewness `m3 / m2^1.5` and kurtosis `m4 / m2^2` use biased central
//!   moments `mk = Σ(v - mean)^k / n`; kurtosis is Pearson's (normal = 3),
//!   [`DistributionSummary::excess_kurtosis`] gives the excess form.
//! * quantiles interpolate linearly between order statistics.
//! * histogram bins are half-open `[lo, hi)` except the last, which is closed.
//! * KDE uses a Gaussian kernel with Silverman's bandwidth
//!   `0.9 * min(sd, IQR / 1.34) * n^(-1/5)` on a uniform grid.
//! * quantile-plot positions are `(i - 0.5) / n`.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{normal_pdf, normal_quantile};

/// Default number of KDE grid points.
pub const KDE_GRID_POINTS: usize = 512;

/// Grid half-width beyond the data range, in bandwidths.
pub const KDE_GRID_PAD: f64 = 3.0;

fn check_finite<T: Real>(values: &[T]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sample contains a non-finite value".into()));
    }
    Ok(())
}

fn require_len(values: &[impl Sized], needed: usize) -> Result<()> {
    match values.len() {
        0 => Err(Error::EmptySample),
        n if n < needed => Err(Error::InsufficientData { needed, got: n }),
        _ => Ok(()),
    }
}

/// Arithmetic mean.
///
/// Accumulated as offsets from the first value, so a constant sample has a
/// mean exactly equal to that constant.
pub fn mean<T: Real>(values: &[T]) -> Result<T> {
    require_len(values, 1)?;
    let pivot = values[0];
    let offset: T = values.iter().map(|&v| v - pivot).sum();
    Ok(pivot + offset / T::count(values.len()))
}

/// Sample variance (divisor `n - 1`).
pub fn sample_variance<T: Real>(values: &[T]) -> Result<T> {
    require_len(values, 2)?;
    let m = mean(values)?;
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Ok(ss / T::count(values.len() - 1))
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_sd<T: Real>(values: &[T]) -> Result<T> {
    Ok(sample_variance(values)?.sqrt())
}

/// Quantile of already-sorted data by linear interpolation between order
/// statistics (position `(n - 1) p`).
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> Result<T> {
    require_len(sorted, 1)?;
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidArgument(format!("quantile level {p} outside [0, 1]")));
    }
    let pos = p * T::count(sorted.len() - 1);
    let lo = pos.floor();
    let frac = pos - lo;
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    Ok(sorted[i] + frac * (sorted[j] - sorted[i]))
}

fn sorted_copy<T: Real>(values: &[T]) -> Vec<T> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    sorted
}

/// Interquartile range `Q(0.75) - Q(0.25)`.
pub fn iqr<T: Real>(values: &[T]) -> Result<T> {
    check_finite(values)?;
    let sorted = sorted_copy(values);
    Ok(quantile_sorted(&sorted, T::lit(0.75))? - quantile_sorted(&sorted, T::lit(0.25))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSummary<T> {
    pub n: usize,
    pub mean: T,
    /// `None` when `n < 2`.
    pub sd: Option<T>,
    /// `None` when `n < 3` or the sample is constant.
    pub skewness: Option<T>,
    /// Pearson kurtosis; `None` when `n < 4` or the sample is constant.
    pub kurtosis: Option<T>,
}

impl<T: Real> DistributionSummary<T> {
    pub fn excess_kurtosis(&self) -> Option<T> {
        self.kurtosis.map(|k| k - T::lit(3.0))
    }

    pub fn try_sd(&self) -> Result<T> {
        self.sd.ok_or(Error::InsufficientData { needed: 2, got: self.n })
    }

    pub fn try_skewness(&self) -> Result<T> {
        self.higher_moment(self.skewness, 3)
    }

    pub fn try_kurtosis(&self) -> Result<T> {
        self.higher_moment(self.kurtosis, 4)
    }

    fn higher_moment(&self, moment: Option<T>, needed: usize) -> Result<T> {
        match moment {
            Some(v) => Ok(v),
            None if self.n < needed => Err(Error::InsufficientData { needed, got: self.n }),
            None => Err(Error::DegenerateSample("all values are equal")),
        }
    }
}

/// Mean, sample sd, skewness and Pearson kurtosis of a sample.
pub fn summarize<T: Real>(values: &[T]) -> Result<DistributionSummary<T>> {
    check_finite(values)?;
    let n = values.len();
    let m = mean(values)?;
    let nf = T::count(n);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in values {
        let d = v - m;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let sd = (n >= 2).then(|| (m2 * nf / T::count(n - 1)).sqrt());
    let spread = m2 > T::zero();
    let skewness = (n >= 3 && spread).then(|| m3 / m2.powf(T::lit(1.5)));
    let kurtosis = (n >= 4 && spread).then(|| m4 / (m2 * m2));
    Ok(DistributionSummary { n, mean: m, sd, skewness, kurtosis })
}

/// Standardizes each value by the sample mean and sample sd.
pub fn z_scores<T: Real>(values: &[T]) -> Result<Vec<T>> {
    check_finite(values)?;
    require_len(values, 2)?;
    let m = mean(values)?;
    let sd = sample_sd(values)?;
    if !(sd > T::zero()) {
        return Err(Error::DegenerateSample("zero standard deviation"));
    }
    Ok(values.iter().map(|&v| (v - m) / sd).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    /// `counts.len() + 1` strictly increasing edges.
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
}

impl<T: Real> Histogram<T> {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> T {
        self.edges[1] - self.edges[0]
    }

    /// Counts rescaled so the bars integrate to 1.
    pub fn densities(&self) -> Vec<T> {
        let scale = T::count(self.total()) * self.bin_width();
        self.counts.iter().map(|&c| T::count(c) / scale).collect()
    }
}

/// Freedman–Diaconis bin count `ceil(range / (2 IQR n^(-1/3)))`, falling
/// back to Sturges' `ceil(log2 n) + 1` when the IQR vanishes.
pub fn freedman_diaconis_bins<T: Real>(values: &[T]) -> Result<usize> {
    check_finite(values)?;
    require_len(values, 1)?;
    let sorted = sorted_copy(values);
    let n = sorted.len();
    let range = sorted[n - 1] - sorted[0];
    let spread = quantile_sorted(&sorted, T::lit(0.75))? - quantile_sorted(&sorted, T::lit(0.25))?;
    let sturges = || (n as f64).log2().ceil() as usize + 1;
    if range <= T::zero() {
        return Ok(1);
    }
    if spread <= T::zero() {
        return Ok(sturges());
    }
    let width = T::lit(2.0) * spread * T::count(n).powf(T::lit(-1.0 / 3.0));
    Ok((range / width).ceil().to_usize().unwrap_or(1).max(1))
}

/// Equal-width histogram spanning `[min, max]`.
///
/// A zero-range sample is widened to `[v - 0.5, v + 0.5]`.
pub fn histogram<T: Real>(values: &[T], bin_count: usize) -> Result<Histogram<T>> {
    check_finite(values)?;
    require_len(values, 1)?;
    if bin_count == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    let (mut lo, mut hi) = values.iter().fold((values[0], values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi == lo {
        lo = lo - T::lit(0.5);
        hi = hi + T::lit(0.5);
    }
    let width = (hi - lo) / T::count(bin_count);
    let mut edges: Vec<T> = (0..=bin_count).map(|i| lo + T::count(i) * width).collect();
    edges[bin_count] = hi;
    let mut counts = vec![0usize; bin_count];
    for &v in values {
        let mut idx = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bin_count - 1);
        // The computed index can be one off when an edge is not exactly representable.
        while idx > 0 && v < edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bin_count && v >= edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve<T> {
    pub grid: Vec<T>,
    pub density: Vec<T>,
    pub bandwidth: T,
}

impl<T: Real> DensityCurve<T> {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> T {
        trapezoid(&self.grid, &self.density)
    }
}

/// Trapezoidal rule over paired abscissae and ordinates.
pub fn trapezoid<T: Real>(xs: &[T], ys: &[T]) -> T {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / T::lit(2.0))
        .sum()
}

/// Silverman's rule-of-thumb bandwidth.
///
/// When the IQR is zero but the sd is not, the sd term alone is used.
pub fn silverman_bandwidth<T: Real>(values: &[T]) -> Result<T> {
    check_finite(values)?;
    require_len(values, 2)?;
    let sd = sample_sd(values)?;
    let spread = iqr(values)? / T::lit(1.34);
    let scale = match (sd > T::zero(), spread > T::zero()) {
        (true, true) => sd.min(spread),
        (true, false) => sd,
        (false, true) => spread,
        (false, false) => return Err(Error::DegenerateSample("zero sd and zero IQR")),
    };
    Ok(T::lit(0.9) * scale * T::count(values.len()).powf(T::lit(-0.2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions<T> {
    pub bandwidth: Option<T>,
    pub grid_points: usize,
}

impl<T> Default for KdeOptions<T> {
    fn default() -> Self {
        KdeOptions { bandwidth: None, grid_points: KDE_GRID_POINTS }
    }
}

/// Gaussian kernel density estimate on the default 512-point grid.
pub fn kde<T: Real>(values: &[T], bandwidth: Option<T>) -> Result<DensityCurve<T>> {
    kde_with(values, KdeOptions { bandwidth, ..KdeOptions::default() })
}

pub fn kde_with<T: Real>(values: &[T], options: KdeOptions<T>) -> Result<DensityCurve<T>> {
    check_finite(values)?;
    require_len(values, 2)?;
    if options.grid_points < 2 {
        return Err(Error::InvalidArgument("KDE grid needs at least 2 points".into()));
    }
    let h = match options.bandwidth {
        Some(h) if h > T::zero() && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidArgument(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(values)?,
    };
    let (lo, hi) = values.iter().fold((values[0], values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let pad = T::lit(KDE_GRID_PAD) * h;
    let grid = uniform_grid(lo - pad, hi + pad, options.grid_points);
    let density = kde_on_grid(values, h, &grid);
    Ok(DensityCurve { grid, density, bandwidth: h })
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let step = (hi - lo) / T::count(points - 1);
    let mut grid: Vec<T> = (0..points).map(|i| lo + T::count(i) * step).collect();
    grid[points - 1] = hi;
    grid
}

/// Evaluates a Gaussian KDE with bandwidth `h` at each grid point.
pub fn kde_on_grid<T: Real>(values: &[T], h: T, grid: &[T]) -> Vec<T> {
    let norm = T::count(values.len()) * h;
    grid.iter()
        .map(|&g| values.iter().map(|&v| normal_pdf((g - v) / h)).sum::<T>() / norm)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QQData<T> {
    pub theoretical_quantiles: Vec<T>,
    pub sample_quantiles: Vec<T>,
}

/// Normal quantile-plot coordinates: sorted data against `Φ⁻¹((i - 0.5)/n)`.
pub fn qq_normal<T: Real>(values: &[T]) -> Result<QQData<T>> {
    check_finite(values)?;
    require_len(values, 2)?;
    let n = T::count(values.len());
    let theoretical_quantiles = (1..=values.len())
        .map(|i| normal_quantile((T::count(i) - T::lit(0.5)) / n))
        .collect();
    Ok(QQData { theoretical_quantiles, sample_quantiles: sorted_copy(values) })
}

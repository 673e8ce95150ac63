//! Test-side oracles, written independently of the library code paths.
#![allow(dead_code, clippy::needless_range_loop)]

use gainstat::Rational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)`.
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close_scaled(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn exact(v: f64) -> Rational {
    Rational::from_float(v).expect("finite")
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Standard normal CDF from the Maclaurin series of erf. Accurate to ~1e-14
/// for `|x| <= 4`.
pub fn phi(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -z * z / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    0.5 + sum / std::f64::consts::PI.sqrt()
}

/// Inverse of [`phi`] by bisection on `[-8, 8]`.
pub fn phi_inv(p: f64) -> f64 {
    let (mut lo, mut hi) = (-8.0_f64, 8.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Two-sided Student-t tail `P(|T| >= |t|)`. With `t = sqrt(df) tan θ` the
/// density of θ on `(-π/2, π/2)` is proportional to `cos^(df-1) θ`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    let theta0 = (t.abs() / df.sqrt()).atan();
    let half = std::f64::consts::FRAC_PI_2;
    let f = |th: f64| th.cos().powf(df - 1.0);
    let tail = simpson(f, theta0, half, 200_000);
    let total = simpson(f, 0.0, half, 200_000);
    tail / total
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// `(sd, skewness, pearson kurtosis)` from biased central moments.
pub fn moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let m = mean(v);
    let c = |k: i32| v.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (c(2), c(3), c(4));
    (sample_var(v).sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Linear-interpolation quantile at position `(n - 1) p` of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (va, vb) = (sample_var(a) / a.len() as f64, sample_var(b) / b.len() as f64);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    (t, df)
}

/// Exact least-squares polynomial coefficients (ascending) by Gaussian
/// elimination on the rational normal equations in raw powers of x.
pub fn exact_polyfit(x: &[f64], y: &[f64], degree: usize) -> Vec<Rational> {
    let m = degree + 1;
    let xs: Vec<Rational> = x.iter().map(|&v| exact(v)).collect();
    let ys: Vec<Rational> = y.iter().map(|&v| exact(v)).collect();
    let mut a = vec![vec![Rational::zero(); m + 1]; m];
    for (xi, yi) in xs.iter().zip(&ys) {
        let mut pw = vec![Rational::one()];
        for k in 1..2 * m - 1 {
            let next = &pw[k - 1] * xi;
            pw.push(next);
        }
        for r in 0..m {
            for c in 0..m {
                a[r][c] += &pw[r + c];
            }
            a[r][m] += &pw[r] * yi;
        }
    }
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero()).expect("full rank");
        a.swap(col, pivot);
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..=m {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    (0..m).map(|r| &a[r][m] / &a[r][r]).collect()
}

/// Exact `1 - SSE/SST` for the given coefficients.
pub fn exact_r2(x: &[f64], y: &[f64], coefficients: &[Rational]) -> Rational {
    let ys: Vec<Rational> = y.iter().map(|&v| exact(v)).collect();
    let n = Rational::from_integer((ys.len() as i64).into());
    let ybar = ys.iter().fold(Rational::zero(), |acc, v| acc + v) / n;
    let (mut sse, mut sst) = (Rational::zero(), Rational::zero());
    for (&xi, yi) in x.iter().zip(&ys) {
        let xi = exact(xi);
        let fit = coefficients.iter().rev().fold(Rational::zero(), |acc, c| acc * &xi + c);
        let e = yi - fit;
        sse += &e * &e;
        let d = yi - &ybar;
        sst += &d * &d;
    }
    Rational::one() - sse / sst
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("representable")
}

/// Gaussian KDE value at `g`.
pub fn kde_at(values: &[f64], h: f64, g: f64) -> f64 {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    values.iter().map(|v| c * (-0.5 * ((g - v) / h).powi(2)).exp()).sum::<f64>() / (values.len() as f64 * h)
}

pub fn silverman(values: &[f64]) -> f64 {
    let s = sorted(values);
    let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
    let sd = sample_var(values).sqrt();
    let scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * scale * (values.len() as f64).powf(-0.2)
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    (1..x.len()).map(|i| (x[i] - x[i - 1]) * (y[i] + y[i - 1]) / 2.0).sum()
}

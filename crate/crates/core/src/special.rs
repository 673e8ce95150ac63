//! Special functions behind the normal and Student-t distributions.
//!
//! Everything is evaluated in the caller's scalar type. Continued fractions
//! use the modified Lentz method and stop at machine epsilon.

use crate::scalar::Real;

const MAX_ITER: usize = 500;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn tiny<T: Real>() -> T {
    T::min_positive_value() / T::epsilon()
}

/// `ln Γ(z)` for `z > 0`.
pub fn ln_gamma<T: Real>(z: T) -> T {
    let half = T::lit(0.5);
    if z < half {
        // Reflection: Γ(z)Γ(1-z) = π / sin(πz)
        let pi = T::PI();
        return (pi / (pi * z).sin().abs()).ln() - ln_gamma(T::one() - z);
    }
    let z = z - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::count(i));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_prefactor<T: Real>(a: T, x: T) -> T {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

fn gamma_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        term = term * x / ap;
        sum = sum + term;
        if term.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

fn gamma_continued_fraction<T: Real>(a: T, x: T) -> T {
    let tiny = tiny::<T>();
    let two = T::lit(2.0);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = T::count(i);
        let an = -i * (i - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

pub fn erf<T: Real>(x: T) -> T {
    let p = gamma_p(T::lit(0.5), x * x);
    if x < T::zero() {
        -p
    } else {
        p
    }
}

/// Complementary error function, accurate in the upper tail.
pub fn erfc<T: Real>(x: T) -> T {
    let q = gamma_q(T::lit(0.5), x * x);
    if x < T::zero() {
        T::lit(2.0) - q
    } else {
        q
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(z: T) -> T {
    (-(z * z) / T::lit(2.0)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

/// Standard normal CDF `Φ(z)`.
pub fn normal_cdf<T: Real>(z: T) -> T {
    T::lit(0.5) * erfc(-z / T::SQRT_2())
}

/// Inverse standard normal CDF `Φ⁻¹(p)`.
///
/// Acklam's rational approximation followed by two Halley steps against
/// [`normal_cdf`].
pub fn normal_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    let mut x = T::lit(acklam(p.to_f64().unwrap_or(f64::NAN)));
    let root_two_pi = (T::lit(2.0) * T::PI()).sqrt();
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * root_two_pi * (x * x / T::lit(2.0)).exp();
        x = x - u / (T::one() + x * u / T::lit(2.0));
    }
    x
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::one() - x).ln()).exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        T::one() - front * beta_continued_fraction(b, a, T::one() - x) / b
    }
}

fn beta_continued_fraction<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = tiny::<T>();
    let one = T::one();
    let two = T::lit(2.0);
    let clamp = |v: T| if v.abs() < tiny { tiny } else { v };

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one / clamp(one - qab * x / qap);
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = T::count(m);
        let m2 = two * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one / clamp(one + even * d);
        c = clamp(one + even / c);
        h = h * d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one / clamp(one + odd * d);
        c = clamp(one + odd / c);
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() < T::epsilon() {
            break;
        }
    }
    h
}

/// Student-t CDF with `df` degrees of freedom (non-integer allowed).
pub fn student_t_cdf<T: Real>(t: T, df: T) -> T {
    if t.is_infinite() {
        return if t > T::zero() { T::one() } else { T::zero() };
    }
    let half = T::lit(0.5);
    let tail = half * inc_beta(df * half, half, df / (df + t * t));
    if t > T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

/// Two-sided tail probability `P(|T| >= |t|)`.
pub fn student_t_two_sided<T: Real>(t: T, df: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    let half = T::lit(0.5);
    inc_beta(df * half, half, df / (df + t * t)).min(T::one()).max(T::zero())
}

/// Inverse Student-t CDF by bisection on [`student_t_cdf`].
pub fn student_t_quantile<T: Real>(p: T, df: T) -> T {
    if p.is_nan() || p <= T::zero() || p >= T::one() {
        return if p == T::zero() {
            T::neg_infinity()
        } else if p == T::one() {
            T::infinity()
        } else {
            T::nan()
        };
    }
    let half = T::lit(0.5);
    if p == half {
        return T::zero();
    }
    if p < half {
        return -student_t_quantile(T::one() - p, df);
    }
    let mut lo = T::zero();
    let mut hi = T::one();
    while student_t_cdf(hi, df) < p {
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi.is_infinite() {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = half * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if student_t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    half * (lo + hi)
}

//! Standard normal CDF and quantile.
//!
//! `normal_cdf` sums the Maclaurin series of `Φ(x) - 1/2` in the body and switches
//! to the Laplace continued fraction for the tails, which keeps relative accuracy
//! for tail probabilities far below `1e-300`. `normal_quantile` starts from
//! Acklam's rational approximation and applies one Halley step against
//! `normal_cdf`.

use crate::scalar::Real;

const TAIL_SWITCH: f64 = 3.0;
const MAX_TERMS: usize = 1000;

/// Standard normal density.
#[inline]
pub fn normal_pdf<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    (-(x * x) * half).exp() / (T::TAU()).sqrt()
}

/// Upper tail `Q(x) = 1 - Φ(x)` for `x >= TAIL_SWITCH` by modified Lentz.
fn upper_tail_cf<T: Real>(x: T) -> T {
    // Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...))))
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for j in 1..MAX_TERMS {
        let a = T::count(j);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= eps {
            break;
        }
    }
    normal_pdf(x) / f
}

/// `Φ(x) - 1/2` by the everywhere-convergent series `φ(x) Σ x^(2n+1)/(2n+1)!!`.
fn centered_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term = term * x2 / T::count(2 * n + 1);
        sum = sum + term;
        if term.abs() <= sum.abs() * T::epsilon() {
            break;
        }
    }
    normal_pdf(x) * sum
}

/// Standard normal CDF `Φ(x)`. Returns exact 0/1 at `∓∞` and NaN for NaN.
pub fn normal_cdf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::neg_infinity() {
        return T::zero();
    }
    if x == T::infinity() {
        return T::one();
    }
    let switch = T::lit(TAIL_SWITCH);
    if x >= switch {
        T::one() - upper_tail_cf(x)
    } else if x <= -switch {
        upper_tail_cf(-x)
    } else {
        T::lit(0.5) + centered_series(x)
    }
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn normal_sf<T: Real>(x: T) -> T {
    normal_cdf(-x)
}

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Rational starting point, valid for `0 < p <= 0.5`.
fn acklam_lower<T: Real>(p: T) -> T {
    if p < T::lit(P_LOW) {
        let q = (-T::lit(2.0) * p.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + T::one())
    } else {
        let q = p - T::lit(0.5);
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + T::one())
    }
}

/// Standard normal quantile `Φ⁻¹(p)`.
///
/// `p = 0` and `p = 1` return `-∞` and `+∞`; values outside `[0, 1]` return NaN.
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
    let half = T::lit(0.5);
    if p > half {
        // 1 - p is exact here (Sterbenz).
        return -normal_quantile(T::one() - p);
    }
    let x = acklam_lower(p);
    // One Halley step.
    let e = normal_cdf(x) - p;
    let u = e * T::TAU().sqrt() * (x * x * half).exp();
    x - u / (T::one() + x * u * half)
}

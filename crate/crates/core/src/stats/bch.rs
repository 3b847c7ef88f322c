use crate::error::{Error, Result};
use crate::scalar::Real;

/// `L` blocks of a BCH(n1, k1, t1) code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BchCode {
    pub n1: usize,
    pub k1: usize,
    pub t1: usize,
    pub blocks: usize,
}

impl BchCode {
    pub fn new(n1: usize, k1: usize, t1: usize, blocks: usize) -> Result<Self> {
        if t1 >= n1 || k1 > n1 || blocks == 0 {
            return Err(Error::Invalid(format!(
                "invalid BCH({n1},{k1},{t1}) x {blocks}"
            )));
        }
        Ok(Self { n1, k1, t1, blocks })
    }
}

/// `Pr(X > t)` for `X ~ Binomial(n, p)`, summed term by term in log space.
pub fn binomial_upper_tail<T: Real>(t: usize, n: usize, p: T) -> T {
    if t >= n || p <= T::zero() {
        return T::zero();
    }
    if p >= T::one() {
        return T::one();
    }
    let lp = p.ln();
    let lq = (-p).ln_1p();
    // ln C(n, i) built incrementally from ln C(n, 0) = 0.
    let mut ln_c = T::zero();
    for i in 1..=t + 1 {
        ln_c = ln_c + T::count(n - i + 1).ln() - T::count(i).ln();
    }
    let mut sum = T::zero();
    for i in t + 1..=n {
        if i > t + 1 {
            ln_c = ln_c + T::count(n - i + 1).ln() - T::count(i).ln();
        }
        sum = sum + (ln_c + T::count(i) * lp + T::count(n - i) * lq).exp();
    }
    sum.min(T::one())
}

/// Block failure rate `ℙ_1 = 1 - F_B(t1; n1, ber)` and key failure rate
/// `ℙ_fail = 1 - (1 - ℙ_1)^L`.
pub fn bch_failure_rate<T: Real>(code: &BchCode, ber: T) -> Result<(T, T)> {
    if !(ber >= T::zero() && ber <= T::one()) {
        return Err(Error::Invalid(format!("BER {ber} outside [0, 1]")));
    }
    let p1 = binomial_upper_tail(code.t1, code.n1, ber);
    let p_fail = -(T::count(code.blocks) * (-p1).ln_1p()).exp_m1();
    Ok((p1, p_fail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_ber_never_fails() {
        let code = BchCode::new(255, 9, 63, 12).unwrap();
        assert_eq!(bch_failure_rate(&code, 0.0f64).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn tail_matches_direct_sum_small_n() {
        // n = 10, p = 0.3, t = 4: direct evaluation in plain arithmetic
        let n = 10;
        let p: f64 = 0.3;
        let mut c = 1.0;
        let mut cdf = 0.0;
        for i in 0..=4 {
            if i > 0 {
                c = c * (n - i + 1) as f64 / i as f64;
            }
            cdf += c * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
        }
        assert!((binomial_upper_tail(4, n, p) - (1.0 - cdf)).abs() < 1e-14);
    }

    #[test]
    fn key_failure_rates() {
        let (_, a) = bch_failure_rate(&BchCode::new(255, 9, 63, 12).unwrap(), 0.1453f64).unwrap();
        assert!((a / 7.73e-5 - 1.0).abs() < 0.2, "{a}");
        let (_, b) = bch_failure_rate(&BchCode::new(511, 19, 119, 6).unwrap(), 0.1453f64).unwrap();
        assert!((b / 3.22e-7 - 1.0).abs() < 0.2, "{b}");
        assert!(BchCode::new(10, 3, 10, 1).is_err());
    }
}

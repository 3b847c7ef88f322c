use crate::scalar::Real;

/// Exact probability mass function of the number of successes among
/// independent Bernoulli trials with the given probabilities.
pub fn poisson_binomial_pmf<T: Real>(probs: &[T]) -> Vec<T> {
    let mut pmf = vec![T::zero(); probs.len() + 1];
    pmf[0] = T::one();
    for (n, &p) in probs.iter().enumerate() {
        let q = T::one() - p;
        for j in (1..=n + 1).rev() {
            pmf[j] = pmf[j] * q + pmf[j - 1] * p;
        }
        pmf[0] = pmf[0] * q;
    }
    pmf
}

/// `Pr(#errors <= t)` by dynamic programming truncated at `t + 1` states.
pub fn poisson_binomial_cdf<T: Real>(t: usize, probs: &[T]) -> T {
    if t >= probs.len() {
        return T::one();
    }
    if t == 0 {
        return probs.iter().fold(T::one(), |acc, &p| acc * (T::one() - p));
    }
    let mut dp = vec![T::zero(); t + 1];
    dp[0] = T::one();
    for &p in probs {
        let q = T::one() - p;
        for j in (1..=t).rev() {
            dp[j] = dp[j] * q + dp[j - 1] * p;
        }
        dp[0] = dp[0] * q;
    }
    dp.into_iter().fold(T::zero(), |a, b| a + b)
}

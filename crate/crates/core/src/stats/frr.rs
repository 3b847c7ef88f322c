//! False-rejection and false-acceptance rates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::perr::{sample_perr, PerrVector};
use super::poisson_binomial::poisson_binomial_cdf;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample count used for the statistical FRR unless overridden.
pub const DEFAULT_FRR_SAMPLES: usize = 1000;

/// Probability of guessing a `k`-bit response whose bits are 1 with bias `tau`.
pub fn brute_force_prob<T: Real>(k: usize, tau: T) -> T {
    tau.max(T::one() - tau).powi(k as i32)
}

/// Single-reference, single-round FAR: only the `k - m` protected bits must be guessed.
pub fn far<T: Real>(k: usize, m: usize, tau: T) -> Result<T> {
    if m > k {
        return Err(Error::Invalid(format!("m = {m} exceeds k = {k}")));
    }
    Ok(brute_force_prob(k - m, tau))
}

pub fn far_d<T: Real>(far: T, d: usize) -> T {
    far * T::count(d)
}

pub fn far_mr<T: Real>(far: T, refs: usize) -> T {
    far * T::count(refs)
}

pub fn far_md<T: Real>(far: T, refs: usize, d: usize) -> T {
    far * T::count(refs) * T::count(d)
}

/// FRR after `d` independent rounds.
pub fn frr_d<T: Real>(frr: T, d: usize) -> T {
    frr.powi(d as i32)
}

/// FRR when every listed reference must reject.
pub fn frr_mr<T: Real>(frrs: &[T]) -> T {
    frrs.iter().fold(T::one(), |acc, &f| acc * f)
}

pub fn frr_md<T: Real>(frrs: &[T], d: usize) -> T {
    frr_d(frr_mr(frrs), d)
}

/// FRR of one sampled response: the `m` largest error probabilities are
/// tolerated, the remaining `k - m` bits must all regenerate correctly.
pub fn frr_of_sample<T: Real>(perr: &PerrVector<T>, m: usize) -> T {
    let sorted = perr.sorted_descending();
    let kept = &sorted[m.min(sorted.len())..];
    T::one() - poisson_binomial_cdf(0, kept)
}

/// Mean of a Monte-Carlo FRR sample with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrrEstimate<T = f64> {
    pub mean: T,
    pub std_err: T,
    pub samples: usize,
}

impl<T: Real> FrrEstimate<T> {
    fn from_values(values: &[T]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: T::zero(),
                std_err: T::zero(),
                samples: 0,
            };
        }
        let nf = T::count(n);
        let mean = values.iter().fold(T::zero(), |a, &b| a + b) / nf;
        let std_err = if n > 1 {
            let var = values
                .iter()
                .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
                / T::count(n - 1);
            (var / nf).sqrt()
        } else {
            T::zero()
        };
        Self {
            mean,
            std_err,
            samples: n,
        }
    }
}

/// Draws the `n_samples` error-probability vectors of a statistical FRR run.
///
/// Sample `i` uses ChaCha8 stream `i` under `seed`, so the result does not
/// depend on how the work is split across threads.
pub fn sample_perr_batch<T: Real>(
    k: usize,
    lambda1: T,
    lambda2: T,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PerrVector<T>>> {
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample_perr(k, lambda1, lambda2, &mut rng)
        })
        .collect()
}

/// Statistical FRR for tolerance `m` over pre-drawn samples (common random numbers).
pub fn frr_from_samples<T: Real>(samples: &[PerrVector<T>], m: usize) -> FrrEstimate<T> {
    let values: Vec<T> = samples.par_iter().map(|s| frr_of_sample(s, m)).collect();
    FrrEstimate::from_values(&values)
}

/// Mean FRR over `n_samples` sampled `k`-bit responses.
pub fn frr_statistical<T: Real>(
    k: usize,
    m: usize,
    lambda1: T,
    lambda2: T,
    n_samples: usize,
    seed: u64,
) -> Result<FrrEstimate<T>> {
    if m > k {
        return Err(Error::Invalid(format!("m = {m} exceeds k = {k}")));
    }
    let samples = sample_perr_batch(k, lambda1, lambda2, n_samples, seed)?;
    Ok(frr_from_samples(&samples, m))
}

/// Statistical FRR for several tolerances sharing one set of samples.
pub fn frr_statistical_sweep<T: Real>(
    k: usize,
    ms: &[usize],
    lambda1: T,
    lambda2: T,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<FrrEstimate<T>>> {
    if let Some(m) = ms.iter().find(|m| **m > k) {
        return Err(Error::Invalid(format!("m = {m} exceeds k = {k}")));
    }
    let samples = sample_perr_batch(k, lambda1, lambda2, n_samples, seed)?;
    Ok(ms.iter().map(|&m| frr_from_samples(&samples, m)).collect())
}

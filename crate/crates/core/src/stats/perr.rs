//! Distribution of bit-specific one-probabilities and error probabilities.
//!
//! With enrollment confidences `~ N(μ_INTER, σ_INTER)`, regeneration noise of
//! width `σ_INTRA` and threshold 0, the one-probability of a random bit has CDF
//! `Φ(λ1 Φ⁻¹(x) + λ2)` and the error probability has CDF
//! `CDF_Pe(x) + 1 - CDF_Pe(1 - x)` on `[0, 1/2]`.

use rand::Rng;

use super::normal::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-bit error probabilities of one `k`-bit response.
#[derive(Debug, Clone, PartialEq)]
pub struct PerrVector<T = f64> {
    probs: Vec<T>,
}

impl<T: Real> PerrVector<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if let Some(p) = probs
            .iter()
            .find(|p| !(**p >= T::zero() && **p <= T::one()))
        {
            return Err(Error::Invalid(format!("error probability {p} outside [0, 1]")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sorted copy, largest error probability first.
    pub fn sorted_descending(&self) -> Vec<T> {
        let mut v = self.probs.clone();
        v.sort_by(|a, b| b.partial_cmp(a).expect("probabilities are not NaN"));
        v
    }
}

/// CDF of the one-probability, `Φ(λ1 Φ⁻¹(x) + λ2)`.
pub fn cdf_pe<T: Real>(x: T, lambda1: T, lambda2: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    normal_cdf(lambda1 * normal_quantile(x) + lambda2)
}

/// CDF of the error probability on `[0, 1/2]`; 1 from `x = 1/2` on.
pub fn cdf_perr<T: Real>(x: T, lambda1: T, lambda2: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::lit(0.5) {
        return T::one();
    }
    // Φ⁻¹(1 - x) = -Φ⁻¹(x) and 1 - Φ(y) = Φ(-y).
    perr_cdf_probit(lambda1 * normal_quantile(x), lambda2)
}

/// `cdf_perr` as a function of `w = λ1 Φ⁻¹(x)`.
#[inline]
fn perr_cdf_probit<T: Real>(w: T, lambda2: T) -> T {
    normal_cdf(w + lambda2) + normal_cdf(w - lambda2)
}

const BISECT_LOWER: f64 = -40.0;
const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;

/// Inverts `cdf_perr` at `u` by bisection.
///
/// The search runs over `w = λ1 Φ⁻¹(p)` in `[-40, 0]` (equivalently `p` in
/// `[0, 1/2]`), stopping once the bracket is narrower than `1e-12` or after 200
/// halvings. Working in the probit domain keeps the CDF residual small even for
/// error probabilities many decades below `1e-12`.
pub fn invert_cdf_perr<T: Real>(u: T, lambda1: T, lambda2: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return T::lit(0.5);
    }
    let mut lo = T::lit(BISECT_LOWER);
    let mut hi = T::zero();
    let tol = T::lit(BISECT_TOL);
    for _ in 0..BISECT_MAX_ITER {
        let mid = (lo + hi) * T::lit(0.5);
        if perr_cdf_probit(mid, lambda2) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    let w = (lo + hi) * T::lit(0.5);
    normal_cdf(w / lambda1).min(T::lit(0.5))
}

/// Draws `k` error probabilities by inverse-transform sampling of `cdf_perr`.
///
/// As `λ1 → 0⁺` the distribution collapses onto `p = 0`: nearly every draw
/// underflows to zero and only `u` extremely close to 1 yields mass near 1/2.
pub fn sample_perr<T: Real, R: Rng + ?Sized>(
    k: usize,
    lambda1: T,
    lambda2: T,
    rng: &mut R,
) -> Result<PerrVector<T>> {
    if !(lambda1 > T::zero()) {
        return Err(Error::Invalid(format!("lambda1 must be positive, got {lambda1}")));
    }
    let probs = (0..k)
        .map(|_| {
            let u = T::lit(rng.gen::<f64>());
            invert_cdf_perr(u, lambda1, lambda2)
        })
        .collect();
    Ok(PerrVector { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The textbook form with the explicit `1 - x` argument.
    fn cdf_perr_textbook(x: f64, l1: f64, l2: f64) -> f64 {
        normal_cdf(l1 * normal_quantile(x) + l2) + 1.0
            - normal_cdf(l1 * normal_quantile(1.0 - x) + l2)
    }

    #[test]
    fn cdf_pe_endpoints_and_identity() {
        assert_eq!(cdf_pe(0.0, 0.3, -0.3477), 0.0);
        assert_eq!(cdf_pe(1.0, 0.3, -0.3477), 1.0);
        for x in [0.01f64, 0.2, 0.5, 0.77, 0.999] {
            assert!((cdf_pe(x, 1.0, 0.0) - x).abs() < 1e-12);
        }
        // Φ⁻¹(1/2) = 0 leaves Φ(λ2).
        assert!((cdf_pe(0.5f64, 0.9, -0.3477) - 0.364_03).abs() < 1e-4);
    }

    #[test]
    fn cdf_perr_matches_textbook_form() {
        for &(l1, l2) in &[(0.3231, -0.3477), (0.0881, -0.3477), (0.5, 0.2)] {
            for x in [1e-6, 1e-3, 0.05, 0.2, 0.4, 0.49] {
                let a = cdf_perr(x, l1, l2);
                let b = cdf_perr_textbook(x, l1, l2);
                assert!((a - b).abs() < 1e-9, "x={x} {a} vs {b}");
            }
        }
    }

    #[test]
    fn cdf_perr_endpoints() {
        assert_eq!(cdf_perr(0.0, 0.4, -0.2), 0.0);
        assert_eq!(cdf_perr(0.5, 0.4, -0.2), 1.0);
        assert_eq!(cdf_perr(0.7, 0.4, -0.2), 1.0);
    }

    #[test]
    fn ten_percent_of_bits_below_1e7() {
        let v = cdf_perr(1e-7f64, 0.3231, -0.3477);
        // numerically: 0.1127
        assert!((v - 0.1127).abs() < 5e-4, "{v}");
    }

    #[test]
    fn lambda2_zero_identity() {
        for l1 in [0.05, 0.2, 0.3672, 0.9] {
            for x in [1e-9, 1e-4, 0.01, 0.3, 0.4999] {
                let lhs: f64 = cdf_perr(x, l1, 0.0);
                let rhs = 2.0 * normal_cdf(l1 * normal_quantile(x));
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inversion_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(l1, l2) in &[(0.3672, -0.3477), (0.2151, -0.3477), (0.4477, 0.0)] {
            for _ in 0..2000 {
                let u: f64 = rng.gen();
                let p = invert_cdf_perr(u, l1, l2);
                assert!((0.0..=0.5).contains(&p));
                assert!((cdf_perr(p, l1, l2) - u).abs() <= 1e-10, "u={u} p={p}");
            }
        }
    }

    #[test]
    fn sample_is_reproducible_and_rejects_bad_lambda() {
        let a = sample_perr(64, 0.3, -0.3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = sample_perr(64, 0.3, -0.3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(sample_perr(4, 0.0, 0.0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn tiny_lambda1_collapses_to_zero() {
        let v = sample_perr(1000, 1e-4, -0.3477, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let zeros = v.probs().iter().filter(|p| **p < 1e-300).count();
        assert!(zeros > 990);
    }
}

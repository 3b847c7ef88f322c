use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Regeneration noise `n ~ N(mu_intra, sigma_intra)` at one condition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub mu_intra: f64,
    pub sigma_intra: f64,
}

impl NoiseSpec {
    pub fn new(mu_intra: f64, sigma_intra: f64) -> Result<Self> {
        if !(sigma_intra >= 0.0) || !sigma_intra.is_finite() || !mu_intra.is_finite() {
            return Err(Error::Invalid(format!(
                "noise needs finite mu and sigma >= 0, got ({mu_intra}, {sigma_intra})"
            )));
        }
        Ok(Self {
            mu_intra,
            sigma_intra,
        })
    }
}

/// Abstract population of enrolled confidences plus per-condition noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidencePopulation {
    enroll_conf: Vec<f64>,
    reference: String,
    noise: BTreeMap<String, NoiseSpec>,
    regenerations: usize,
}

impl ConfidencePopulation {
    pub const DEFAULT_REFERENCE: &'static str = "ref";

    pub fn new(enroll_conf: Vec<f64>) -> Result<Self> {
        if enroll_conf.is_empty() {
            return Err(Error::Invalid("empty confidence population".into()));
        }
        if enroll_conf.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite enrolled confidence".into()));
        }
        Ok(Self {
            enroll_conf,
            reference: Self::DEFAULT_REFERENCE.to_string(),
            noise: BTreeMap::new(),
            regenerations: 1,
        })
    }

    /// Renames the enrollment condition.
    pub fn with_reference(mut self, label: impl Into<String>) -> Self {
        self.reference = label.into();
        self
    }

    pub fn with_condition(mut self, label: impl Into<String>, spec: NoiseSpec) -> Self {
        self.noise.insert(label.into(), spec);
        self
    }

    /// Noisy regenerations drawn per bit by the characterisation ops.
    pub fn with_regenerations(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("regenerations must be >= 1".into()));
        }
        self.regenerations = n;
        Ok(self)
    }

    pub fn n_bits(&self) -> usize {
        self.enroll_conf.len()
    }

    pub fn enroll_conf(&self) -> &[f64] {
        &self.enroll_conf
    }

    pub fn reference(&self) -> &str {
        &self.reference
    }

    pub fn regenerations(&self) -> usize {
        self.regenerations
    }

    pub fn noise_specs(&self) -> impl Iterator<Item = (&String, &NoiseSpec)> {
        self.noise.iter()
    }

    /// Noise at `condition`; the reference condition is noise-free.
    pub fn noise(&self, condition: &str) -> Result<NoiseSpec> {
        if condition == self.reference {
            return Ok(self.noise.get(condition).copied().unwrap_or_default());
        }
        self.noise
            .get(condition)
            .copied()
            .ok_or_else(|| Error::UnknownCondition(condition.to_string()))
    }

    /// Expected confidences at `condition` (enrolled value plus mean shift).
    pub fn enrolled_confidences(&self, condition: &str) -> Result<Vec<f64>> {
        let spec = self.noise(condition)?;
        Ok(self.enroll_conf.iter().map(|c| c + spec.mu_intra).collect())
    }

    /// Multiplies every confidence and noise parameter by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Invalid(format!("scale must be positive, got {factor}")));
        }
        let mut out = Self::new(self.enroll_conf.iter().map(|c| c * factor).collect())?
            .with_reference(self.reference.clone())
            .with_regenerations(self.regenerations)?;
        for (label, s) in &self.noise {
            out.noise.insert(
                label.clone(),
                NoiseSpec::new(s.mu_intra * factor, s.sigma_intra * factor)?,
            );
        }
        Ok(out)
    }
}

/// Draws `n_bits` enrolled confidences i.i.d. from `N(mu_inter, sigma_inter)`.
pub fn synthesize_confidence_population(
    n_bits: usize,
    mu_inter: f64,
    sigma_inter: f64,
    seed: u64,
) -> Result<ConfidencePopulation> {
    if n_bits == 0 {
        return Err(Error::Invalid("empty confidence population".into()));
    }
    if !(sigma_inter > 0.0) || !sigma_inter.is_finite() || !mu_inter.is_finite() {
        return Err(Error::Invalid(format!(
            "need finite mu_inter and sigma_inter > 0, got ({mu_inter}, {sigma_inter})"
        )));
    }
    let dist = Normal::new(mu_inter, sigma_inter).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    ConfidencePopulation::new((0..n_bits).map(|_| dist.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normal_cdf;

    #[test]
    fn moments_of_standard_population() {
        let pop = synthesize_confidence_population(100_000, 0.0, 1.0, 3).unwrap();
        let n = pop.n_bits() as f64;
        let mean = pop.enroll_conf().iter().sum::<f64>() / n;
        let var = pop.enroll_conf().iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02);
        assert!((var.sqrt() - 1.0).abs() < 0.02);
    }

    #[test]
    fn biased_population_minority_bit() {
        let pop = synthesize_confidence_population(100_000, -0.3477, 1.0, 4).unwrap();
        let ones = pop.enroll_conf().iter().filter(|c| **c < 0.0).count() as f64 / 1e5;
        // negative mean makes 1 the majority bit; the minority share is Φ(λ2)
        let expect: f64 = normal_cdf(-0.3477);
        assert!((expect - 0.364).abs() < 1e-3);
        assert!((1.0 - ones - expect).abs() < 0.005, "{ones}");
    }

    #[test]
    fn deterministic_and_validated() {
        let a = synthesize_confidence_population(50, 0.0, 1.0, 7).unwrap();
        assert_eq!(a, synthesize_confidence_population(50, 0.0, 1.0, 7).unwrap());
        assert!(synthesize_confidence_population(0, 0.0, 1.0, 7).is_err());
        assert!(synthesize_confidence_population(5, 0.0, 0.0, 7).is_err());
        assert!(NoiseSpec::new(0.0, -1.0).is_err());
    }

    #[test]
    fn condition_lookup() {
        let pop = ConfidencePopulation::new(vec![1.0, -2.0])
            .unwrap()
            .with_condition("hot", NoiseSpec::new(0.5, 0.1).unwrap());
        assert_eq!(pop.noise("ref").unwrap(), NoiseSpec::default());
        assert_eq!(pop.enrolled_confidences("hot").unwrap(), vec![1.5, -1.5]);
        assert!(matches!(pop.noise("cold"), Err(Error::UnknownCondition(_))));
    }
}

//! Noisy regeneration of responses on the physical device.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use super::challenge::{Challenge, ChallengeSpace};
use super::response::ResponseBits;
use super::simpuf::ksum_confidence;
use crate::dataset::{ConfidencePopulation, NoiseSpec, RoDataset};
use crate::error::{Error, Result};

/// Ground truth behind a physical PUF instance.
#[derive(Debug, Clone)]
pub enum PufTruth {
    /// Process frequency of each ring oscillator.
    RoFrequencies(Vec<f64>),
    /// Stage weights of a k-sum PUF.
    KSumWeights(Vec<f64>),
    /// True confidence per bit.
    Confidences(Vec<f64>),
    /// Replays recorded measurements: each evaluation picks one repeat of the
    /// requested condition uniformly at random. Pairs are read as RO pairs when
    /// the challenge is a `RoPair` and as k-sum stages when it is `KSum`.
    Measured(Arc<RoDataset>),
}

/// A physical PUF regenerating `ẽ_i = 1 iff conf_i + n < 0`, `n ~ N(μ_INTRA, σ_INTRA)`.
#[derive(Debug, Clone)]
pub struct PhysicalPuf {
    truth: PufTruth,
    noise: BTreeMap<String, NoiseSpec>,
}

impl PhysicalPuf {
    pub fn new(truth: PufTruth) -> Self {
        Self {
            truth,
            noise: BTreeMap::new(),
        }
    }

    /// Device whose true confidences and noise come from a population.
    pub fn from_population(pop: &ConfidencePopulation) -> Self {
        let mut p = Self::new(PufTruth::Confidences(pop.enroll_conf().to_vec()));
        for (label, spec) in pop.noise_specs() {
            p.noise.insert(label.clone(), *spec);
        }
        p.noise.insert(pop.reference().to_string(), NoiseSpec::default());
        p
    }

    pub fn with_noise(mut self, condition: impl Into<String>, spec: NoiseSpec) -> Self {
        self.noise.insert(condition.into(), spec);
        self
    }

    pub fn truth(&self) -> &PufTruth {
        &self.truth
    }

    pub fn space(&self) -> ChallengeSpace {
        match &self.truth {
            PufTruth::RoFrequencies(f) => ChallengeSpace::RoPairs { n_ros: f.len() },
            PufTruth::KSumWeights(w) => ChallengeSpace::KSum { stages: w.len() },
            PufTruth::Confidences(c) => ChallengeSpace::Bits { n_bits: c.len() },
            PufTruth::Measured(ds) => ChallengeSpace::RoPairs { n_ros: ds.n_ros() },
        }
    }

    /// Noise-free confidence of `ch`.
    pub fn true_confidence(&self, ch: &Challenge) -> Result<f64> {
        match (&self.truth, ch) {
            (PufTruth::RoFrequencies(f), Challenge::RoPair { i, j }) if *j < f.len() && i < j => {
                Ok(f[*i] - f[*j])
            }
            (PufTruth::KSumWeights(w), Challenge::KSum(bits)) if bits.len() == w.len() => {
                Ok(ksum_confidence(w, bits))
            }
            (PufTruth::Confidences(c), Challenge::BitIndex(i)) if *i < c.len() => Ok(c[*i]),
            _ => Err(Error::ChallengeRange(format!("{ch} for {:?}", self.space()))),
        }
    }

    fn noise_for(&self, condition: &str) -> Result<NoiseSpec> {
        self.noise
            .get(condition)
            .copied()
            .ok_or_else(|| Error::UnknownCondition(condition.to_string()))
    }

    fn measured_confidence<R: Rng + ?Sized>(
        ds: &RoDataset,
        ch: &Challenge,
        condition: &str,
        rng: &mut R,
    ) -> Result<f64> {
        let c = ds.condition_index(condition)?;
        let rep = rng.gen_range(0..ds.repeats());
        match ch {
            Challenge::RoPair { i, j } if i < j && *j < ds.n_ros() => {
                Ok(ds.freq(c, *i, rep) - ds.freq(c, *j, rep))
            }
            Challenge::KSum(bits) if 2 * bits.len() == ds.n_ros() => Ok(bits
                .iter()
                .enumerate()
                .map(|(s, b)| {
                    let w = ds.freq(c, 2 * s, rep) - ds.freq(c, 2 * s + 1, rep);
                    if *b {
                        -w
                    } else {
                        w
                    }
                })
                .sum()),
            _ => Err(Error::ChallengeRange(format!(
                "{ch} for a {}-RO dataset",
                ds.n_ros()
            ))),
        }
    }

    /// Confidence observed in one regeneration at `condition`.
    pub fn regenerate_confidence<R: Rng + ?Sized>(
        &self,
        ch: &Challenge,
        condition: &str,
        rng: &mut R,
    ) -> Result<f64> {
        if let PufTruth::Measured(ds) = &self.truth {
            return Self::measured_confidence(ds, ch, condition, rng);
        }
        let conf = self.true_confidence(ch)?;
        let spec = self.noise_for(condition)?;
        let n = if spec.sigma_intra > 0.0 {
            Normal::new(spec.mu_intra, spec.sigma_intra)
                .map_err(|e| Error::Invalid(e.to_string()))?
                .sample(rng)
        } else {
            spec.mu_intra
        };
        Ok(conf + n)
    }

    /// One noisy response bit.
    pub fn evaluate<R: Rng + ?Sized>(&self, ch: &Challenge, condition: &str, rng: &mut R) -> Result<bool> {
        Ok(self.regenerate_confidence(ch, condition, rng)? < 0.0)
    }

    /// Noisy response to a challenge list, independent noise per bit.
    pub fn evaluate_vector<R: Rng + ?Sized>(
        &self,
        challenges: &[Challenge],
        condition: &str,
        rng: &mut R,
    ) -> Result<ResponseBits> {
        let bits = challenges
            .iter()
            .map(|c| self.evaluate(c, condition, rng))
            .collect::<Result<Vec<_>>>()?;
        ResponseBits::new(bits)
    }
}

pub fn physical_evaluate(puf: &PhysicalPuf, ch: &Challenge, condition: &str, rng: &mut dyn RngCore) -> Result<bool> {
    puf.evaluate(ch, condition, rng)
}

pub fn physical_evaluate_vector(
    puf: &PhysicalPuf,
    challenges: &[Challenge],
    condition: &str,
    rng: &mut dyn RngCore,
) -> Result<ResponseBits> {
    puf.evaluate_vector(challenges, condition, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{normal_cdf, normal_quantile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(conf: f64, sigma: f64) -> PhysicalPuf {
        PhysicalPuf::new(PufTruth::Confidences(vec![conf])).with_noise(
            "dev",
            NoiseSpec {
                mu_intra: 0.0,
                sigma_intra: sigma,
            },
        )
    }

    #[test]
    fn noiseless_regeneration_is_exact() {
        let p = PhysicalPuf::new(PufTruth::Confidences(vec![0.5, -0.1, 3.0, -7.0, 0.01, -0.01, 1.0, -1.0]))
            .with_noise("nom", NoiseSpec::default());
        let chs: Vec<_> = (0..8).map(Challenge::BitIndex).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = p.evaluate_vector(&chs, "nom", &mut rng).unwrap();
        assert_eq!(e.to_bit_string(), "01010101");
        assert!(p.evaluate_vector(&[], "nom", &mut rng).is_err());
        assert!(p.evaluate(&chs[0], "hot", &mut rng).is_err());
    }

    #[test]
    fn one_probability_matches_closed_form() {
        let sigma = 0.8006;
        let conf = sigma * normal_quantile(0.999f64);
        let p = single(conf, sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| p.evaluate(&Challenge::BitIndex(0), "dev", &mut rng).unwrap())
            .count();
        let expect = normal_cdf(-conf / sigma);
        assert!((expect - 0.001).abs() < 1e-12);
        let sd = (expect * (1.0 - expect) / n as f64).sqrt();
        let rate = ones as f64 / n as f64;
        assert!((rate - expect).abs() < 3.0 * sd, "rate {rate} vs {expect}");
    }

    #[test]
    fn extreme_confidence_is_stable() {
        let p = single(-1e9, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..1000).all(|_| p.evaluate(&Challenge::BitIndex(0), "dev", &mut rng).unwrap()));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let p = single(0.1, 1.0);
        let chs = vec![Challenge::BitIndex(0); 32];
        let a = p.evaluate_vector(&chs, "dev", &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = p.evaluate_vector(&chs, "dev", &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }
}

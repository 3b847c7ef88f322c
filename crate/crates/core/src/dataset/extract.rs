use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::{ConfidencePopulation, RoDataset};
use crate::error::{Error, Result};
use crate::puf::{bit_of, ksum_confidence, Challenge, SimPuf};

/// Reliability statistics of a PUF population between two conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityParams {
    pub mu_inter: f64,
    pub sigma_inter: f64,
    pub mu_intra: f64,
    pub sigma_intra: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub threshold_t: f64,
    pub bias_tau: f64,
}

impl ReliabilityParams {
    pub fn from_moments(
        mu_inter: f64,
        sigma_inter: f64,
        mu_intra: f64,
        sigma_intra: f64,
        bias_tau: f64,
    ) -> Result<Self> {
        if !(sigma_inter > 0.0) || !(sigma_intra >= 0.0) {
            return Err(Error::Degenerate(format!(
                "need sigma_inter > 0 and sigma_intra >= 0, got ({sigma_inter}, {sigma_intra})"
            )));
        }
        if !(0.0..=1.0).contains(&bias_tau) {
            return Err(Error::Invalid(format!("bias must be in [0, 1], got {bias_tau}")));
        }
        Ok(Self {
            mu_inter,
            sigma_inter,
            mu_intra,
            sigma_intra,
            lambda1: sigma_intra / sigma_inter,
            lambda2: mu_inter / sigma_inter,
            threshold_t: 0.0,
            bias_tau,
        })
    }
}

/// Anything that yields enrolled and regenerated confidences per challenge.
pub trait MeasurementSource {
    /// Enrollment confidence of `ch` at `condition`.
    fn enrolled(&self, condition: &str, ch: &Challenge) -> Result<f64>;

    /// Appends every available regeneration of `ch` at `condition` to `out`.
    fn regenerate(
        &self,
        condition: &str,
        ch: &Challenge,
        rng: &mut dyn RngCore,
        out: &mut Vec<f64>,
    ) -> Result<()>;
}

fn pair_or_ksum(ds: &RoDataset, ch: &Challenge, f: impl Fn(usize) -> f64) -> Result<f64> {
    match ch {
        Challenge::RoPair { i, j } if i < j && *j < ds.n_ros() => Ok(f(*i) - f(*j)),
        Challenge::KSum(bits) if 2 * bits.len() == ds.n_ros() => {
            let w: Vec<f64> = (0..bits.len()).map(|s| f(2 * s) - f(2 * s + 1)).collect();
            Ok(ksum_confidence(&w, bits))
        }
        _ => Err(Error::ChallengeRange(format!(
            "{ch} for a {}-RO dataset",
            ds.n_ros()
        ))),
    }
}

impl MeasurementSource for RoDataset {
    fn enrolled(&self, condition: &str, ch: &Challenge) -> Result<f64> {
        let c = self.condition_index(condition)?;
        pair_or_ksum(self, ch, |ro| self.mean_freq(c, ro))
    }

    fn regenerate(
        &self,
        condition: &str,
        ch: &Challenge,
        _rng: &mut dyn RngCore,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let c = self.condition_index(condition)?;
        for rep in 0..self.repeats() {
            out.push(pair_or_ksum(self, ch, |ro| self.freq(c, ro, rep))?);
        }
        Ok(())
    }
}

impl ConfidencePopulation {
    fn bit_conf(&self, ch: &Challenge) -> Result<f64> {
        match ch {
            Challenge::BitIndex(i) if *i < self.n_bits() => Ok(self.enroll_conf()[*i]),
            _ => Err(Error::ChallengeRange(format!(
                "{ch} for a {}-bit population",
                self.n_bits()
            ))),
        }
    }
}

impl MeasurementSource for ConfidencePopulation {
    fn enrolled(&self, condition: &str, ch: &Challenge) -> Result<f64> {
        Ok(self.bit_conf(ch)? + self.noise(condition)?.mu_intra)
    }

    fn regenerate(
        &self,
        condition: &str,
        ch: &Challenge,
        rng: &mut dyn RngCore,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        let conf = self.bit_conf(ch)?;
        let spec = self.noise(condition)?;
        let n = Normal::new(spec.mu_intra, spec.sigma_intra)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        for _ in 0..self.regenerations() {
            out.push(conf + n.sample(rng));
        }
        Ok(())
    }
}

/// One SimPUF per condition, looked up by its enrollment label. Each
/// model yields a single deterministic regeneration per challenge.
impl MeasurementSource for [SimPuf] {
    fn enrolled(&self, condition: &str, ch: &Challenge) -> Result<f64> {
        let sp = self
            .iter()
            .find(|s| s.condition() == condition)
            .ok_or_else(|| Error::UnknownCondition(condition.to_string()))?;
        Ok(sp.query(ch)?.1)
    }

    fn regenerate(
        &self,
        condition: &str,
        ch: &Challenge,
        _rng: &mut dyn RngCore,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        out.push(self.enrolled(condition, ch)?);
        Ok(())
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn check_challenges(challenges: &[Challenge]) -> Result<()> {
    if challenges.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 challenges, got {}",
            challenges.len()
        )));
    }
    Ok(())
}

/// Inter-chip statistics at `ref_condition` and regeneration noise at
/// `dev_condition`. Noise samples are single regenerations at the device
/// condition minus the enrolled confidence.
pub fn extract_reliability_params<S: MeasurementSource + ?Sized>(
    src: &S,
    ref_condition: &str,
    dev_condition: &str,
    challenges: &[Challenge],
    rng: &mut dyn RngCore,
) -> Result<ReliabilityParams> {
    check_challenges(challenges)?;
    let mut enrolled = Vec::with_capacity(challenges.len());
    let mut deltas = Vec::new();
    let mut regen = Vec::new();
    for ch in challenges {
        let e = src.enrolled(ref_condition, ch)?;
        regen.clear();
        src.regenerate(dev_condition, ch, rng, &mut regen)?;
        deltas.extend(regen.iter().map(|r| r - e));
        enrolled.push(e);
    }
    let (mu_inter, sigma_inter) = mean_sd(&enrolled);
    let (mu_intra, sigma_intra) = mean_sd(&deltas);
    let tau = enrolled.iter().filter(|c| bit_of(**c)).count() as f64 / enrolled.len() as f64;
    ReliabilityParams::from_moments(mu_inter, sigma_inter, mu_intra, sigma_intra, tau)
}

/// Fraction of regenerations at `dev_condition` whose bit differs from the
/// bit enrolled at `ref_condition`.
pub fn bit_error_rate<S: MeasurementSource + ?Sized>(
    src: &S,
    ref_condition: &str,
    dev_condition: &str,
    challenges: &[Challenge],
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_challenges(challenges)?;
    let (mut flips, mut total) = (0u64, 0u64);
    let mut regen = Vec::new();
    for ch in challenges {
        let bit = bit_of(src.enrolled(ref_condition, ch)?);
        regen.clear();
        src.regenerate(dev_condition, ch, rng, &mut regen)?;
        flips += regen.iter().filter(|r| bit_of(**r) != bit).count() as u64;
        total += regen.len() as u64;
    }
    if total == 0 {
        return Err(Error::Degenerate("no regenerations".into()));
    }
    Ok(flips as f64 / total as f64)
}

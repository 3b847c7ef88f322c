use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Supply voltage and temperature at which measurements were taken.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingCondition {
    pub label: String,
    pub voltage: f64,
    pub temperature: f64,
}

impl OperatingCondition {
    pub fn new(label: impl Into<String>, voltage: f64, temperature: f64) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.contains(',') || label.contains('\n') {
            return Err(Error::Invalid(format!("bad condition label {label:?}")));
        }
        if !(voltage > 0.0) || !voltage.is_finite() {
            return Err(Error::Invalid(format!("voltage must be positive, got {voltage}")));
        }
        if !temperature.is_finite() {
            return Err(Error::Invalid(format!("temperature must be finite, got {temperature}")));
        }
        Ok(Self {
            label,
            voltage,
            temperature,
        })
    }
}

/// Repeated frequency measurements (MHz) of every RO under every condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RoDataset {
    n_ros: usize,
    repeats: usize,
    conditions: Vec<OperatingCondition>,
    /// Indexed `[condition][ro][repeat]`.
    freq: Vec<f64>,
}

impl RoDataset {
    pub fn new(
        n_ros: usize,
        repeats: usize,
        conditions: Vec<OperatingCondition>,
        freq: Vec<f64>,
    ) -> Result<Self> {
        if n_ros < 2 {
            return Err(Error::Invalid(format!("need at least 2 ROs, got {n_ros}")));
        }
        if repeats == 0 {
            return Err(Error::Invalid("need at least one repeat".into()));
        }
        if conditions.is_empty() {
            return Err(Error::Invalid("need at least one condition".into()));
        }
        for (i, c) in conditions.iter().enumerate() {
            if conditions[..i].iter().any(|o| o.label == c.label) {
                return Err(Error::Invalid(format!("duplicate condition label `{}`", c.label)));
            }
        }
        if freq.len() != conditions.len() * n_ros * repeats {
            return Err(Error::Invalid(format!(
                "expected {} frequencies, got {}",
                conditions.len() * n_ros * repeats,
                freq.len()
            )));
        }
        if let Some(f) = freq.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
            return Err(Error::NonPositiveFrequency { freq: *f });
        }
        Ok(Self {
            n_ros,
            repeats,
            conditions,
            freq,
        })
    }

    pub fn n_ros(&self) -> usize {
        self.n_ros
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn conditions(&self) -> &[OperatingCondition] {
        &self.conditions
    }

    pub fn condition_index(&self, label: &str) -> Result<usize> {
        self.conditions
            .iter()
            .position(|c| c.label == label)
            .ok_or_else(|| Error::UnknownCondition(label.to_string()))
    }

    #[inline]
    pub fn freq(&self, condition: usize, ro: usize, repeat: usize) -> f64 {
        self.freq[(condition * self.n_ros + ro) * self.repeats + repeat]
    }

    pub fn repeats_of(&self, condition: usize, ro: usize) -> &[f64] {
        let start = (condition * self.n_ros + ro) * self.repeats;
        &self.freq[start..start + self.repeats]
    }

    pub fn mean_freq(&self, condition: usize, ro: usize) -> f64 {
        self.repeats_of(condition, ro).iter().sum::<f64>() / self.repeats as f64
    }

    /// Multiplies every frequency by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_ros,
            self.repeats,
            self.conditions.clone(),
            self.freq.iter().map(|f| f * factor).collect(),
        )
    }
}

/// Systematic shift and per-repeat noise of one synthesised condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSynth {
    pub condition: OperatingCondition,
    /// Common frequency shift of all ROs (MHz).
    pub delta_shift: f64,
    /// Target standard deviation of a pairwise confidence (MHz).
    pub sigma_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoSynthParams {
    pub n_ros: usize,
    pub f0: f64,
    pub sigma_process: f64,
    pub conditions: Vec<ConditionSynth>,
    pub repeats: usize,
    pub seed: u64,
}

/// Draws a dataset with normally distributed process variation and noise.
///
/// RO `i` gets a process frequency `~ N(f0, σ_process)`; each repeat at a
/// condition adds the condition's shift and noise `~ N(0, σ_noise/√2)`, so a
/// pairwise difference carries noise of width `σ_noise`.
pub fn synthesize_ro_dataset(params: &RoSynthParams) -> Result<RoDataset> {
    if !(params.sigma_process >= 0.0) {
        return Err(Error::Invalid("sigma_process must be non-negative".into()));
    }
    if let Some(c) = params.conditions.iter().find(|c| !(c.sigma_noise >= 0.0)) {
        return Err(Error::Invalid(format!(
            "sigma_noise of `{}` must be non-negative",
            c.condition.label
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let normal = |sd: f64| Normal::new(0.0, sd).map_err(|e| Error::Invalid(e.to_string()));
    let process = normal(params.sigma_process)?;
    let base: Vec<f64> = (0..params.n_ros)
        .map(|_| params.f0 + process.sample(&mut rng))
        .collect();
    let mut freq = Vec::with_capacity(params.conditions.len() * params.n_ros * params.repeats);
    for c in &params.conditions {
        let noise = normal(c.sigma_noise / std::f64::consts::SQRT_2)?;
        for &b in &base {
            for _ in 0..params.repeats {
                let f = b + c.delta_shift + noise.sample(&mut rng);
                if !(f > 0.0) {
                    return Err(Error::NonPositiveFrequency { freq: f });
                }
                freq.push(f);
            }
        }
    }
    RoDataset::new(
        params.n_ros,
        params.repeats,
        params.conditions.iter().map(|c| c.condition.clone()).collect(),
        freq,
    )
}

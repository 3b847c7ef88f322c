//! Server-held simulatable PUF models.

use std::collections::BTreeMap;

use super::challenge::{Challenge, ChallengeSeed, ChallengeSpace};
use super::lfsr::expand_challenge;
use super::response::{bit_of, ConfidenceVector, ResponseBits};
use crate::dataset::{ConfidencePopulation, RoDataset};
use crate::error::{Error, Result};

/// Parameterisation behind a [`SimPuf`].
#[derive(Debug, Clone, PartialEq)]
pub enum SimPufKind {
    /// Mean frequency per ring oscillator (MHz).
    RopufTable { freqs: Vec<f64> },
    /// Per-stage weights `w_i = f_top,i - f_bottom,i` of a k-sum PUF.
    ///
    /// A fitted model carries an arbitrary positive scale; `scale` records the
    /// norm the fit produced before normalisation.
    LapufModel {
        weights: Vec<f64>,
        fitted: bool,
        scale: f64,
    },
    /// Enrollment confidence per bit of a confidence population.
    ConfTable { conf: Vec<f64> },
}

impl SimPufKind {
    pub fn tag(&self) -> u8 {
        match self {
            SimPufKind::RopufTable { .. } => 1,
            SimPufKind::LapufModel { .. } => 2,
            SimPufKind::ConfTable { .. } => 3,
        }
    }

    fn payload(&self) -> &[f64] {
        match self {
            SimPufKind::RopufTable { freqs } => freqs,
            SimPufKind::LapufModel { weights, .. } => weights,
            SimPufKind::ConfTable { conf } => conf,
        }
    }

    pub fn space(&self) -> ChallengeSpace {
        match self {
            SimPufKind::RopufTable { freqs } => ChallengeSpace::RoPairs { n_ros: freqs.len() },
            SimPufKind::LapufModel { weights, .. } => ChallengeSpace::KSum {
                stages: weights.len(),
            },
            SimPufKind::ConfTable { conf } => ChallengeSpace::Bits { n_bits: conf.len() },
        }
    }
}

/// Which kind of SimPUF to build at enrollment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnrollKind {
    Ropuf,
    KSum,
    Conf,
}

/// Where the challenges of a session come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChallengePolicy {
    /// Fixed list, read out on every session (TREVERSE-A provers).
    Fixed(Vec<Challenge>),
    /// Expanded from a fresh server seed per round (TREVERSE-B provers).
    Seeded,
}

/// Measurement substrate a SimPUF can be enrolled from.
#[derive(Debug, Clone, Copy)]
pub enum EnrollmentSource<'a> {
    Dataset(&'a RoDataset),
    Population(&'a ConfidencePopulation),
}

/// Query result: response bit and signed confidence.
pub type Query = (bool, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct SimPuf {
    kind: SimPufKind,
    condition: String,
    k: usize,
    policy: ChallengePolicy,
    /// Corrected confidences for challenges whose stored value aged out.
    overrides: BTreeMap<Challenge, f64>,
}

impl SimPuf {
    pub fn new(kind: SimPufKind, condition: impl Into<String>, k: usize, policy: ChallengePolicy) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("response length k must be positive".into()));
        }
        let space = kind.space();
        if space.size() == 0 {
            return Err(Error::Invalid(format!("empty model {space:?}")));
        }
        if let ChallengePolicy::Fixed(list) = &policy {
            if list.len() != k {
                return Err(Error::Invalid(format!(
                    "fixed challenge list has {} entries, k = {k}",
                    list.len()
                )));
            }
            for ch in list {
                space.check(ch)?;
            }
        }
        Ok(Self {
            kind,
            condition: condition.into(),
            k,
            policy,
            overrides: BTreeMap::new(),
        })
    }

    pub fn kind(&self) -> &SimPufKind {
        &self.kind
    }

    pub fn condition(&self) -> &str {
        &self.condition
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn policy(&self) -> &ChallengePolicy {
        &self.policy
    }

    pub fn set_policy(&mut self, policy: ChallengePolicy) -> Result<()> {
        let checked = Self::new(self.kind.clone(), self.condition.clone(), self.k, policy)?;
        self.policy = checked.policy;
        Ok(())
    }

    pub fn space(&self) -> ChallengeSpace {
        self.kind.space()
    }

    /// Raw model confidence, ignoring aging corrections.
    fn model_confidence(&self, ch: &Challenge) -> Result<f64> {
        self.space().check(ch)?;
        Ok(match (&self.kind, ch) {
            (SimPufKind::RopufTable { freqs }, Challenge::RoPair { i, j }) => freqs[*i] - freqs[*j],
            (SimPufKind::LapufModel { weights, .. }, Challenge::KSum(bits)) => ksum_confidence(weights, bits),
            (SimPufKind::ConfTable { conf }, Challenge::BitIndex(i)) => conf[*i],
            _ => unreachable!("space check admits only matching challenges"),
        })
    }

    /// Response bit and confidence for one challenge.
    pub fn query(&self, ch: &Challenge) -> Result<Query> {
        let conf = match self.overrides.get(ch) {
            Some(c) => {
                self.space().check(ch)?;
                *c
            }
            None => self.model_confidence(ch)?,
        };
        Ok((bit_of(conf), conf))
    }

    /// Enrolled `(e, conf)` for a list of challenges.
    pub fn query_vector(&self, challenges: &[Challenge]) -> Result<(ResponseBits, ConfidenceVector)> {
        let conf = challenges
            .iter()
            .map(|c| self.query(c).map(|(_, v)| v))
            .collect::<Result<Vec<_>>>()?;
        let conf = ConfidenceVector::new(conf)?;
        Ok((conf.to_bits(), conf))
    }

    /// Challenges of a session round under this SimPUF's policy.
    pub fn session_challenges(&self, seed: Option<ChallengeSeed>) -> Result<Vec<Challenge>> {
        match (&self.policy, seed) {
            (ChallengePolicy::Fixed(list), _) => Ok(list.clone()),
            (ChallengePolicy::Seeded, Some(s)) => expand_challenge(s, self.k, self.space()),
            (ChallengePolicy::Seeded, None) => Err(Error::Invalid(
                "seeded challenge policy needs a challenge seed".into(),
            )),
        }
    }

    /// Flips the stored bit of `ch` by negating its confidence, keeping the magnitude.
    pub fn apply_aging_update(&mut self, ch: &Challenge) -> Result<()> {
        let (_, conf) = self.query(ch)?;
        match (&mut self.kind, ch) {
            (SimPufKind::ConfTable { conf: table }, Challenge::BitIndex(i)) => table[*i] = -conf,
            _ => {
                self.overrides.insert(ch.clone(), -conf);
            }
        }
        Ok(())
    }

    /// Challenges carrying an in-memory aging correction.
    pub fn aging_overrides(&self) -> &BTreeMap<Challenge, f64> {
        &self.overrides
    }
}

/// `Σ_i (-1)^{c_i} w_i`: bit 0 puts stage `i`'s even RO in the top sum.
pub fn ksum_confidence(weights: &[f64], bits: &[bool]) -> f64 {
    weights
        .iter()
        .zip(bits)
        .map(|(w, b)| if *b { -w } else { *w })
        .sum()
}

/// Builds a SimPUF from enrollment measurements at `condition`.
///
/// Ring-oscillator tables use the mean frequency over all repeats. A k-sum model
/// pairs RO `2i` (top for challenge bit 0) with RO `2i + 1` as stage `i`.
pub fn simpuf_enroll(
    source: EnrollmentSource<'_>,
    condition: &str,
    kind: EnrollKind,
    k: usize,
    policy: ChallengePolicy,
) -> Result<SimPuf> {
    let model = match (source, kind) {
        (EnrollmentSource::Dataset(ds), EnrollKind::Ropuf) => {
            let c = ds.condition_index(condition)?;
            SimPufKind::RopufTable {
                freqs: (0..ds.n_ros()).map(|ro| ds.mean_freq(c, ro)).collect(),
            }
        }
        (EnrollmentSource::Dataset(ds), EnrollKind::KSum) => {
            if ds.n_ros() % 2 != 0 {
                return Err(Error::KindMismatch(format!(
                    "k-sum model needs an even RO count, dataset has {}",
                    ds.n_ros()
                )));
            }
            let c = ds.condition_index(condition)?;
            SimPufKind::LapufModel {
                weights: (0..ds.n_ros() / 2)
                    .map(|s| ds.mean_freq(c, 2 * s) - ds.mean_freq(c, 2 * s + 1))
                    .collect(),
                fitted: false,
                scale: 1.0,
            }
        }
        (EnrollmentSource::Population(pop), EnrollKind::Conf) => SimPufKind::ConfTable {
            conf: pop.enrolled_confidences(condition)?,
        },
        (EnrollmentSource::Dataset(_), EnrollKind::Conf) => {
            return Err(Error::KindMismatch(
                "confidence table requires a confidence population".into(),
            ))
        }
        (EnrollmentSource::Population(_), k) => {
            return Err(Error::KindMismatch(format!(
                "{k:?} model requires a ring-oscillator dataset"
            )))
        }
    };
    SimPuf::new(model, condition, k, policy)
}

const STORE_MAGIC: &[u8; 8] = b"SIMPUF01";

impl SimPuf {
    /// Serialises the model: magic, kind tag, `k` (u32 BE), length-prefixed
    /// (u16 BE) condition label, then the payload as big-endian f64 values.
    ///
    /// The challenge policy, fitted flag and in-memory aging overrides are not
    /// part of the format; confidence tables carry aging updates in the payload.
    pub fn to_store_bytes(&self) -> Result<Vec<u8>> {
        let label = self.condition.as_bytes();
        let label_len = u16::try_from(label.len())
            .map_err(|_| Error::Store("condition label longer than 65535 bytes".into()))?;
        let k = u32::try_from(self.k).map_err(|_| Error::Store("k exceeds u32".into()))?;
        let payload = self.kind.payload();
        let mut out = Vec::with_capacity(8 + 1 + 4 + 2 + label.len() + 8 * payload.len());
        out.extend_from_slice(STORE_MAGIC);
        out.push(self.kind.tag());
        out.extend_from_slice(&k.to_be_bytes());
        out.extend_from_slice(&label_len.to_be_bytes());
        out.extend_from_slice(label);
        for v in payload {
            out.extend_from_slice(&v.to_be_bytes());
        }
        Ok(out)
    }

    /// Parses a store file; the loaded model uses the seeded challenge policy.
    pub fn from_store_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| Error::Store(m.to_string());
        if bytes.len() < 15 || &bytes[..8] != STORE_MAGIC {
            return Err(err("bad magic"));
        }
        let tag = bytes[8];
        let k = u32::from_be_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
        let label_len = u16::from_be_bytes(bytes[13..15].try_into().expect("2 bytes")) as usize;
        let rest = &bytes[15..];
        if rest.len() < label_len {
            return Err(err("truncated condition label"));
        }
        let label = std::str::from_utf8(&rest[..label_len]).map_err(|_| err("label is not UTF-8"))?;
        let payload = &rest[label_len..];
        if !payload.len().is_multiple_of(8) {
            return Err(err("payload length is not a multiple of 8"));
        }
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let kind = match tag {
            1 => SimPufKind::RopufTable { freqs: values },
            2 => SimPufKind::LapufModel {
                weights: values,
                fitted: false,
                scale: 1.0,
            },
            3 => SimPufKind::ConfTable { conf: values },
            t => return Err(Error::Store(format!("unknown kind tag {t}"))),
        };
        SimPuf::new(kind, label, k, ChallengePolicy::Seeded)
    }
}

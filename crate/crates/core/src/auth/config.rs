use super::owf::HashId;
use crate::error::{Error, Result};
use crate::puf::ResponseBits;

/// Largest supported unreliable-bit budget.
pub const MAX_M: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub k: usize,
    /// Unreliable-bit budget.
    pub m: usize,
    /// Reference SimPUF count.
    pub refs: usize,
    /// Authentication rounds.
    pub rounds: usize,
    /// Aging flip budget for detection-update.
    pub n_ag: usize,
    pub hash: HashId,
    /// 1 runs sequentially; anything else uses the rayon pool.
    pub parallel: usize,
}

impl TrialConfig {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        let cfg = Self {
            k,
            m,
            refs: 1,
            rounds: 1,
            n_ag: 0,
            hash: HashId::default(),
            parallel: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_refs(mut self, refs: usize) -> Result<Self> {
        self.refs = refs;
        self.validate().map(|_| self)
    }

    pub fn with_rounds(mut self, rounds: usize) -> Result<Self> {
        self.rounds = rounds;
        self.validate().map(|_| self)
    }

    pub fn with_n_ag(mut self, n_ag: usize) -> Result<Self> {
        self.n_ag = n_ag;
        self.validate().map(|_| self)
    }

    pub fn with_hash(mut self, hash: HashId) -> Self {
        self.hash = hash;
        self
    }

    pub fn with_parallel(mut self, parallel: usize) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Invalid("k must be >= 1".into()));
        }
        if self.m > self.k {
            return Err(Error::Invalid(format!("m = {} exceeds k = {}", self.m, self.k)));
        }
        if self.m > MAX_M {
            return Err(Error::Invalid(format!("m = {} exceeds the supported {MAX_M}", self.m)));
        }
        if self.refs == 0 || self.rounds == 0 {
            return Err(Error::Invalid("M and d must be >= 1".into()));
        }
        if self.n_ag > self.k - self.m {
            return Err(Error::Invalid(format!(
                "n_ag = {} exceeds k - m = {}",
                self.n_ag,
                self.k - self.m
            )));
        }
        Ok(())
    }

    pub fn patterns(&self) -> u64 {
        1u64 << self.m
    }
}

/// `2^m · M · d`, or an overflow error past `2^63`.
pub fn worst_case_trials(cfg: &TrialConfig) -> Result<u64> {
    let overflow = || Error::Overflow(format!("2^{} * {} * {}", cfg.m, cfg.refs, cfg.rounds));
    let n = 1u64
        .checked_shl(cfg.m as u32)
        .filter(|_| cfg.m < 64)
        .and_then(|p| p.checked_mul(cfg.refs as u64))
        .and_then(|p| p.checked_mul(cfg.rounds as u64))
        .ok_or_else(overflow)?;
    if n > 1u64 << 63 {
        return Err(overflow());
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthState {
    Success,
    Fail,
}

/// Which trial matched. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedPattern {
    pub t: u64,
    /// Reliable positions flipped by detection-update.
    pub aged_flips: Vec<usize>,
    pub round: usize,
    pub reference: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthOutcome {
    pub state: AuthState,
    pub trials_used: u64,
    pub matched: Option<MatchedPattern>,
    pub recovered: Option<ResponseBits>,
}

impl AuthOutcome {
    pub fn is_success(&self) -> bool {
        self.state == AuthState::Success
    }

    pub(crate) fn fail(trials_used: u64) -> Self {
        Self {
            state: AuthState::Fail,
            trials_used,
            matched: None,
            recovered: None,
        }
    }
}

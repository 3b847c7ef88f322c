use super::config::{AuthOutcome, TrialConfig};
use super::owf::{Digest, Nonce};
use super::trial::trial_search;
use crate::error::{Error, Result};
use crate::puf::{Challenge, SimPuf};

/// One round of prover output.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResponse {
    pub challenges: Vec<Challenge>,
    pub digest: Digest,
    pub nonce: Nonce,
}

/// Source of fresh rounds for the augmented search.
pub trait Prover {
    fn next_round(&mut self, round: usize) -> Result<RoundResponse>;
}

impl<F: FnMut(usize) -> Result<RoundResponse>> Prover for F {
    fn next_round(&mut self, round: usize) -> Result<RoundResponse> {
        self(round)
    }
}

/// Up to `d` rounds, each searched against every reference SimPUF in turn.
/// The first success ends both loops; `trials_used` sums every trial made.
pub fn augmented_authenticate(
    simpufs: &[SimPuf],
    prover: &mut dyn Prover,
    cfg: &TrialConfig,
) -> Result<AuthOutcome> {
    cfg.validate()?;
    if simpufs.len() != cfg.refs {
        return Err(Error::Invalid(format!(
            "{} reference SimPUFs given, configuration expects {}",
            simpufs.len(),
            cfg.refs
        )));
    }
    if let Some(s) = simpufs.iter().find(|s| s.k() != cfg.k) {
        return Err(Error::Invalid(format!("SimPUF k = {} differs from k = {}", s.k(), cfg.k)));
    }
    let mut total = 0u64;
    for round in 0..cfg.rounds {
        let r = prover.next_round(round)?;
        for (reference, sp) in simpufs.iter().enumerate() {
            let (e, conf) = sp.query_vector(&r.challenges)?;
            let mut out = trial_search(&e, &conf, &r.digest, &r.nonce, cfg)?;
            total += out.trials_used;
            if let Some(m) = out.matched.as_mut() {
                m.round = round;
                m.reference = reference;
                out.trials_used = total;
                return Ok(out);
            }
        }
    }
    Ok(AuthOutcome::fail(total))
}

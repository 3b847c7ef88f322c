use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::message::Message;
use crate::auth::{owf, Digest, HashId, Nonce};
use crate::error::{Error, Result};
use crate::puf::{expand_challenge, Challenge, ChallengeSeed, PhysicalPuf, ResponseBits};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// Fixed challenge list, server nonce.
    A,
    /// Server challenge seed, prover nonce.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionMode {
    Unilateral,
    Mutual,
}

/// Simulated prover token.
#[derive(Debug, Clone)]
pub struct ProverDevice {
    arch: Architecture,
    puf: Arc<PhysicalPuf>,
    condition: String,
    k: usize,
    hash: HashId,
    fixed: Vec<Challenge>,
    nonce_rng: ChaCha20Rng,
    noise_rng: ChaCha20Rng,
    last: Option<ResponseBits>,
}

impl ProverDevice {
    fn build(arch: Architecture, puf: Arc<PhysicalPuf>, k: usize, fixed: Vec<Challenge>, condition: &str, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("k must be >= 1".into()));
        }
        let mut nonce_rng = ChaCha20Rng::seed_from_u64(seed);
        nonce_rng.set_stream(1);
        let mut noise_rng = ChaCha20Rng::seed_from_u64(seed);
        noise_rng.set_stream(2);
        Ok(Self {
            arch,
            puf,
            condition: condition.to_string(),
            k,
            hash: HashId::default(),
            fixed,
            nonce_rng,
            noise_rng,
            last: None,
        })
    }

    /// Architecture A device reading out `challenges` every session.
    pub fn new_a(puf: impl Into<Arc<PhysicalPuf>>, challenges: Vec<Challenge>, condition: &str, seed: u64) -> Result<Self> {
        let puf = puf.into();
        let space = puf.space();
        for ch in &challenges {
            space.check(ch)?;
        }
        Self::build(Architecture::A, puf, challenges.len(), challenges, condition, seed)
    }

    /// Architecture B device expanding `k` challenges from each server seed.
    pub fn new_b(puf: impl Into<Arc<PhysicalPuf>>, k: usize, condition: &str, seed: u64) -> Result<Self> {
        Self::build(Architecture::B, puf.into(), k, Vec::new(), condition, seed)
    }

    pub fn with_hash(mut self, hash: HashId) -> Self {
        self.hash = hash;
        self
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn condition(&self) -> &str {
        &self.condition
    }

    pub fn set_condition(&mut self, condition: &str) {
        self.condition = condition.to_string();
    }

    pub fn puf(&self) -> &PhysicalPuf {
        &self.puf
    }

    /// Response regenerated in the latest round.
    pub fn last_response(&self) -> Option<&ResponseBits> {
        self.last.as_ref()
    }

    pub fn fresh_nonce(&mut self) -> Nonce {
        Nonce::random(&mut self.nonce_rng)
    }

    fn regenerate(&mut self, challenges: &[Challenge]) -> Result<&ResponseBits> {
        let e = self.puf.evaluate_vector(challenges, &self.condition, &mut self.noise_rng)?;
        Ok(self.last.insert(e))
    }

    fn mismatch(&self, want: Architecture) -> Error {
        Error::Protocol(format!("architecture {:?} device cannot serve {want:?}", self.arch))
    }

    /// Reads out the fixed challenge list and binds it to the server nonce.
    pub fn prover_respond_a(&mut self, n: &Nonce) -> Result<Message> {
        if self.arch != Architecture::A {
            return Err(self.mismatch(Architecture::A));
        }
        let challenges = std::mem::take(&mut self.fixed);
        let e = self.regenerate(&challenges).cloned();
        self.fixed = challenges;
        Ok(Message::ProverDigest(owf(&e?, n, self.hash)?))
    }

    /// Expands the server seed and answers with a digest under a fresh nonce.
    pub fn prover_respond_b(&mut self, seed: ChallengeSeed) -> Result<Message> {
        if self.arch != Architecture::B {
            return Err(self.mismatch(Architecture::B));
        }
        let challenges = expand_challenge(seed, self.k, self.puf.space())?;
        let e = self.regenerate(&challenges)?.clone();
        let n = self.fresh_nonce();
        Ok(Message::ProverDigestWithNonce(owf(&e, &n, self.hash)?, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Rounds { responded: bool },
    AwaitDigest2,
    Done,
}

/// Prover-side state machine for one session.
#[derive(Debug)]
pub struct ProverSession<'a> {
    device: &'a mut ProverDevice,
    mode: SessionMode,
    state: State,
    expected_r2: Option<Digest>,
    accept: Option<bool>,
}

impl<'a> ProverSession<'a> {
    pub fn new(device: &'a mut ProverDevice, mode: SessionMode) -> Result<Self> {
        if mode == SessionMode::Mutual && device.arch != Architecture::B {
            return Err(Error::Invalid("mutual authentication needs an architecture B device".into()));
        }
        Ok(Self {
            device,
            mode,
            state: State::Rounds { responded: false },
            expected_r2: None,
            accept: None,
        })
    }

    /// Whether the prover accepted the server (mutual mode).
    pub fn accepted(&self) -> Option<bool> {
        self.accept
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>> {
        let arch = self.device.arch;
        let reply = match (self.state, msg) {
            (State::Rounds { .. }, Message::ServerNonce(n)) if arch == Architecture::A => {
                self.state = State::Rounds { responded: true };
                Some(self.device.prover_respond_a(n)?)
            }
            (State::Rounds { .. }, Message::ServerChallenge(s)) if arch == Architecture::B => {
                self.state = State::Rounds { responded: true };
                Some(self.device.prover_respond_b(*s)?)
            }
            (State::Rounds { responded: true }, Message::ServerAck) if self.mode == SessionMode::Mutual => {
                let n2 = self.device.fresh_nonce();
                let e = self.device.last.as_ref().expect("responded rounds keep a response");
                self.expected_r2 = Some(owf(e, &n2, self.device.hash)?);
                self.state = State::AwaitDigest2;
                Some(Message::ProverNonce2(n2))
            }
            (State::AwaitDigest2, Message::ServerDigest2(d)) => {
                self.accept = Some(self.expected_r2 == Some(*d));
                self.state = State::Done;
                None
            }
            (state, other) => {
                self.state = State::Done;
                if self.mode == SessionMode::Mutual {
                    self.accept = Some(false);
                }
                return Err(Error::Protocol(format!(
                    "prover got {} in state {state:?}",
                    other.kind()
                )));
            }
        };
        Ok(reply)
    }
}

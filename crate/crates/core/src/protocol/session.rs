use std::collections::VecDeque;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::device::{Architecture, ProverDevice, ProverSession, SessionMode};
use super::message::Message;
use super::transcript::{Direction, Transcript};
use super::transport::Transport;
use crate::auth::{augmented_authenticate, owf, AuthOutcome, Nonce, Prover, RoundResponse, TrialConfig};
use crate::error::{Error, Result};
use crate::puf::{Challenge, ChallengePolicy, ChallengeSeed, SimPuf};

/// Anything that can play the prover role in a session.
pub trait ProverEndpoint {
    fn handle(&mut self, msg: &Message) -> Result<Option<Message>>;

    fn accepted(&self) -> Option<bool> {
        None
    }
}

impl ProverEndpoint for ProverSession<'_> {
    fn handle(&mut self, msg: &Message) -> Result<Option<Message>> {
        ProverSession::handle(self, msg)
    }

    fn accepted(&self) -> Option<bool> {
        ProverSession::accepted(self)
    }
}

/// Fresh per-round server input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundInput {
    Nonce(Nonce),
    Seed(ChallengeSeed),
}

/// Verifier holding the reference SimPUFs of one device.
#[derive(Debug, Clone)]
pub struct Server {
    simpufs: Arc<Vec<SimPuf>>,
    arch: Architecture,
    rng: ChaCha20Rng,
    forced: VecDeque<RoundInput>,
    r2_override: Option<SimPuf>,
    sessions: u64,
}

impl Server {
    pub fn new(simpufs: impl Into<Arc<Vec<SimPuf>>>, arch: Architecture, seed: u64) -> Result<Self> {
        let simpufs = simpufs.into();
        let first = simpufs
            .first()
            .ok_or_else(|| Error::Invalid("server needs at least one SimPUF".into()))?;
        if simpufs.iter().any(|s| s.k() != first.k() || s.policy() != first.policy()) {
            return Err(Error::Invalid("reference SimPUFs must share k and challenge policy".into()));
        }
        match (arch, first.policy()) {
            (Architecture::A, ChallengePolicy::Fixed(_)) | (Architecture::B, ChallengePolicy::Seeded) => {}
            (a, p) => {
                return Err(Error::Invalid(format!(
                    "architecture {a:?} does not fit challenge policy {}",
                    match p {
                        ChallengePolicy::Fixed(_) => "fixed",
                        ChallengePolicy::Seeded => "seeded",
                    }
                )))
            }
        }
        Ok(Self {
            simpufs,
            arch,
            rng: ChaCha20Rng::seed_from_u64(seed),
            forced: VecDeque::new(),
            r2_override: None,
            sessions: 0,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn simpufs(&self) -> &[SimPuf] {
        &self.simpufs
    }

    pub fn k(&self) -> usize {
        self.simpufs[0].k()
    }

    /// Makes the next rounds use these inputs instead of fresh ones.
    pub fn force_round_inputs(&mut self, inputs: impl IntoIterator<Item = RoundInput>) {
        self.forced.extend(inputs);
    }

    /// Re-issues the server inputs recorded in `t`.
    pub fn force_from_transcript(&mut self, t: &Transcript) {
        let inputs: Vec<RoundInput> = t
            .sent_by(Direction::ServerToProver)
            .filter_map(|m| match m {
                Message::ServerNonce(n) => Some(RoundInput::Nonce(*n)),
                Message::ServerChallenge(s) => Some(RoundInput::Seed(*s)),
                _ => None,
            })
            .collect();
        self.force_round_inputs(inputs);
    }

    /// Answers the mutual step from `simpuf` instead of the recovered
    /// response, as a server without the right model would.
    pub fn with_r2_override(mut self, simpuf: SimPuf) -> Self {
        self.r2_override = Some(simpuf);
        self
    }

    pub(crate) fn next_input(&mut self) -> RoundInput {
        if let Some(i) = self.forced.pop_front() {
            return i;
        }
        match self.arch {
            Architecture::A => RoundInput::Nonce(Nonce::random(&mut self.rng)),
            Architecture::B => RoundInput::Seed(ChallengeSeed(self.rng.next_u64())),
        }
    }
}

/// Result of one session as seen by both parties.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub outcome: AuthOutcome,
    pub prover_accept: Option<bool>,
    pub transcript: Transcript,
}

struct Link<'a> {
    transport: &'a mut dyn Transport,
    prover: &'a mut dyn ProverEndpoint,
    transcript: Transcript,
}

impl Link<'_> {
    /// Sends `msg` to the prover and returns its reply, if any.
    fn exchange(&mut self, msg: Message) -> Result<Option<Message>> {
        self.transport.send(Direction::ServerToProver, msg.encode())?;
        self.transcript.push(Direction::ServerToProver, msg);
        let got = Message::decode(&self.transport.recv(Direction::ServerToProver)?)?;
        let Some(reply) = self.prover.handle(&got)? else {
            return Ok(None);
        };
        self.transport.send(Direction::ProverToServer, reply.encode())?;
        self.transcript.push(Direction::ProverToServer, reply);
        Ok(Some(Message::decode(&self.transport.recv(Direction::ProverToServer)?)?))
    }
}

struct Rounds<'a, 'b> {
    server: &'a mut Server,
    refs: Arc<Vec<SimPuf>>,
    link: &'a mut Link<'b>,
    last_challenges: Vec<Challenge>,
}

impl Prover for Rounds<'_, '_> {
    fn next_round(&mut self, _round: usize) -> Result<RoundResponse> {
        let input = self.server.next_input();
        let msg = match input {
            RoundInput::Nonce(n) => Message::ServerNonce(n),
            RoundInput::Seed(s) => Message::ServerChallenge(s),
        };
        let reply = self.link.exchange(msg)?;
        let (challenges, digest, nonce) = match (input, reply) {
            (RoundInput::Nonce(n), Some(Message::ProverDigest(d))) => {
                (self.refs[0].session_challenges(None)?, d, n)
            }
            (RoundInput::Seed(s), Some(Message::ProverDigestWithNonce(d, n))) => {
                (self.refs[0].session_challenges(Some(s))?, d, n)
            }
            (_, other) => {
                return Err(Error::Protocol(format!(
                    "server expected a prover digest, got {}",
                    other.map_or("nothing".to_string(), |m| m.kind().to_string())
                )))
            }
        };
        self.last_challenges = challenges.clone();
        Ok(RoundResponse { challenges, digest, nonce })
    }
}

fn mutual_tail(server: &Server, link: &mut Link<'_>, out: &AuthOutcome, challenges: &[Challenge], cfg: &TrialConfig) -> Result<()> {
    let n2 = match link.exchange(Message::ServerAck)? {
        Some(Message::ProverNonce2(n2)) => n2,
        other => {
            return Err(Error::Protocol(format!(
                "server expected a second nonce, got {}",
                other.map_or("nothing".to_string(), |m| m.kind().to_string())
            )))
        }
    };
    let e = match &server.r2_override {
        Some(sp) => sp.query_vector(challenges)?.0,
        None => out.recovered.clone().expect("success carries the recovered response"),
    };
    match link.exchange(Message::ServerDigest2(owf(&e, &n2, cfg.hash)?))? {
        None => Ok(()),
        Some(m) => Err(Error::Protocol(format!("unexpected {} after the final digest", m.kind()))),
    }
}

/// Runs one session between `server` and an arbitrary prover endpoint.
/// Failures inside the session abort it and are recorded in the transcript.
pub fn run_session(
    server: &mut Server,
    prover: &mut dyn ProverEndpoint,
    cfg: &TrialConfig,
    mode: SessionMode,
    transport: &mut dyn Transport,
) -> Result<SessionReport> {
    if cfg.k != server.k() {
        return Err(Error::Invalid(format!("k = {} but the server enrolled k = {}", cfg.k, server.k())));
    }
    if mode == SessionMode::Mutual && server.arch != Architecture::B {
        return Err(Error::Invalid("mutual authentication needs architecture B".into()));
    }
    let id = server.sessions;
    server.sessions += 1;
    let mut link = Link { transport, prover, transcript: Transcript::new(id) };
    let simpufs = Arc::clone(&server.simpufs);
    let mut rounds = Rounds { server: &mut *server, refs: Arc::clone(&simpufs), link: &mut link, last_challenges: Vec::new() };
    let searched = augmented_authenticate(&simpufs, &mut rounds, cfg);
    let challenges = rounds.last_challenges;

    let mut abort = None;
    let outcome = match searched {
        Ok(out) => out,
        Err(e) => {
            abort = Some(e.to_string());
            AuthOutcome::fail(0)
        }
    };
    if mode == SessionMode::Mutual && outcome.is_success() {
        if let Err(e) = mutual_tail(server, &mut link, &outcome, &challenges, cfg) {
            abort = Some(e.to_string());
        }
    }
    let prover_accept = match mode {
        SessionMode::Unilateral => None,
        SessionMode::Mutual => Some(link.prover.accepted().unwrap_or(false)),
    };
    let mut transcript = link.transcript;
    transcript.server_outcome = Some(outcome.state);
    transcript.prover_accept = prover_accept;
    transcript.abort = abort;
    Ok(SessionReport { outcome, prover_accept, transcript })
}

fn check_pair(server: &Server, device: &ProverDevice) -> Result<()> {
    if server.arch != device.architecture() || server.k() != device.k() {
        return Err(Error::Invalid(format!(
            "server ({:?}, k = {}) and device ({:?}, k = {}) disagree",
            server.arch,
            server.k(),
            device.architecture(),
            device.k()
        )));
    }
    Ok(())
}

/// One-way authentication of `device` by `server`.
pub fn run_unilateral(
    server: &mut Server,
    device: &mut ProverDevice,
    cfg: &TrialConfig,
    transport: &mut dyn Transport,
) -> Result<SessionReport> {
    check_pair(server, device)?;
    let mut p = ProverSession::new(device, SessionMode::Unilateral)?;
    run_session(server, &mut p, cfg, SessionMode::Unilateral, transport)
}

/// Unilateral rounds followed by the prover authenticating the server.
pub fn run_mutual(
    server: &mut Server,
    device: &mut ProverDevice,
    cfg: &TrialConfig,
    transport: &mut dyn Transport,
) -> Result<SessionReport> {
    check_pair(server, device)?;
    let mut p = ProverSession::new(device, SessionMode::Mutual)?;
    run_session(server, &mut p, cfg, SessionMode::Mutual, transport)
}

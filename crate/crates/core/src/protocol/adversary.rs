use std::collections::VecDeque;

use super::device::{ProverDevice, SessionMode};
use super::message::Message;
use super::session::{run_session, run_unilateral, ProverEndpoint, Server};
use super::transcript::{Direction, Transcript};
use super::transport::InProcessTransport;
use crate::auth::{AuthOutcome, TrialConfig};
use crate::error::{Error, Result};

/// Answers every server message with the next recorded prover message.
#[derive(Debug, Clone)]
pub struct ReplayProver {
    replies: VecDeque<Message>,
}

impl ReplayProver {
    pub fn new(recorded: &Transcript) -> Self {
        Self {
            replies: recorded.sent_by(Direction::ProverToServer).cloned().collect(),
        }
    }
}

impl ProverEndpoint for ReplayProver {
    fn handle(&mut self, _msg: &Message) -> Result<Option<Message>> {
        self.replies
            .pop_front()
            .map(Some)
            .ok_or_else(|| Error::Protocol("replay exhausted".into()))
    }
}

/// Replays the prover side of `recorded` against a new session of `server`.
pub fn adversary_replay(recorded: &Transcript, server: &mut Server, cfg: &TrialConfig) -> Result<AuthOutcome> {
    let mut p = ReplayProver::new(recorded);
    let mut t = InProcessTransport::new();
    Ok(run_session(server, &mut p, cfg, SessionMode::Unilateral, &mut t)?.outcome)
}

/// Runs `sessions` honest sessions of a device the server never enrolled
/// and counts acceptances.
pub fn adversary_impostor(
    foreign: &mut ProverDevice,
    server: &mut Server,
    cfg: &TrialConfig,
    sessions: u64,
) -> Result<u64> {
    let mut accepted = 0;
    for _ in 0..sessions {
        let mut t = InProcessTransport::new();
        if run_unilateral(server, foreign, cfg, &mut t)?.outcome.is_success() {
            accepted += 1;
        }
    }
    Ok(accepted)
}

use std::fmt;

use super::message::{Message, MessageKind};
use crate::auth::AuthState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ServerToProver,
    ProverToServer,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ServerToProver => "s2p",
            Direction::ProverToServer => "p2s",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "s2p" => Ok(Direction::ServerToProver),
            "p2s" => Ok(Direction::ProverToServer),
            _ => Err(Error::Protocol(format!("unknown direction `{s}`"))),
        }
    }
}

/// Ordered record of one session.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    pub session_id: u64,
    pub messages: Vec<(Direction, Message)>,
    pub server_outcome: Option<AuthState>,
    pub prover_accept: Option<bool>,
    pub abort: Option<String>,
}

impl Transcript {
    pub fn new(session_id: u64) -> Self {
        Self {
            session_id,
            ..Self::default()
        }
    }

    pub fn push(&mut self, dir: Direction, msg: Message) {
        self.messages.push((dir, msg));
    }

    pub fn sent_by(&self, dir: Direction) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |(d, _)| *d == dir).map(|(_, m)| m)
    }

    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|(_, m)| m.kind() == kind).count()
    }

    /// One `dir,kind,hex(payload)` line per message.
    pub fn to_hex_log(&self) -> String {
        self.messages
            .iter()
            .map(|(d, m)| format!("{},{},{}\n", d.name(), m.kind().name(), hex::encode(m.payload())))
            .collect()
    }

    pub fn from_hex_log(session_id: u64, log: &str) -> Result<Self> {
        let mut t = Self::new(session_id);
        for (i, line) in log.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |msg: String| Error::Parse { line: i as u64 + 1, msg };
            let mut parts = line.trim().splitn(3, ',');
            let (Some(d), Some(k), Some(h)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `dir,kind,hex`".into()));
            };
            let dir = Direction::from_name(d).map_err(|e| bad(e.to_string()))?;
            let kind = MessageKind::from_name(k).map_err(|e| bad(e.to_string()))?;
            let payload = hex::decode(h).map_err(|e| bad(e.to_string()))?;
            let msg = Message::from_payload(kind, &payload).map_err(|e| bad(e.to_string()))?;
            t.push(dir, msg);
        }
        Ok(t)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex_log())
    }
}

use std::fmt;

use crate::auth::{Digest, Nonce, DIGEST_LEN, NONCE_LEN};
use crate::error::{Error, Result};
use crate::puf::ChallengeSeed;

pub const ACK_BYTE: u8 = 0x06;
/// Largest accepted payload.
pub const MAX_FRAME: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ServerNonce,
    ServerChallenge,
    ProverDigest,
    ProverDigestWithNonce,
    ServerAck,
    ProverNonce2,
    ServerDigest2,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::ServerNonce,
        MessageKind::ServerChallenge,
        MessageKind::ProverDigest,
        MessageKind::ProverDigestWithNonce,
        MessageKind::ServerAck,
        MessageKind::ProverNonce2,
        MessageKind::ServerDigest2,
    ];

    pub fn tag(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL
            .get((tag as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Protocol(format!("unknown message tag {tag:#04x}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::ServerNonce => "server_nonce",
            MessageKind::ServerChallenge => "server_challenge",
            MessageKind::ProverDigest => "prover_digest",
            MessageKind::ProverDigestWithNonce => "prover_digest_nonce",
            MessageKind::ServerAck => "server_ack",
            MessageKind::ProverNonce2 => "prover_nonce2",
            MessageKind::ServerDigest2 => "server_digest2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Protocol(format!("unknown message kind `{name}`")))
    }

    pub fn payload_len(self) -> usize {
        match self {
            MessageKind::ServerNonce | MessageKind::ProverNonce2 => NONCE_LEN,
            MessageKind::ServerChallenge => 8,
            MessageKind::ProverDigest | MessageKind::ServerDigest2 => DIGEST_LEN,
            MessageKind::ProverDigestWithNonce => DIGEST_LEN + NONCE_LEN,
            MessageKind::ServerAck => 1,
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    ServerNonce(Nonce),
    ServerChallenge(ChallengeSeed),
    ProverDigest(Digest),
    ProverDigestWithNonce(Digest, Nonce),
    ServerAck,
    ProverNonce2(Nonce),
    ServerDigest2(Digest),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::ServerNonce(_) => MessageKind::ServerNonce,
            Message::ServerChallenge(_) => MessageKind::ServerChallenge,
            Message::ProverDigest(_) => MessageKind::ProverDigest,
            Message::ProverDigestWithNonce(..) => MessageKind::ProverDigestWithNonce,
            Message::ServerAck => MessageKind::ServerAck,
            Message::ProverNonce2(_) => MessageKind::ProverNonce2,
            Message::ServerDigest2(_) => MessageKind::ServerDigest2,
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        match self {
            Message::ServerNonce(n) | Message::ProverNonce2(n) => n.0.to_vec(),
            Message::ServerChallenge(s) => s.0.to_be_bytes().to_vec(),
            Message::ProverDigest(d) | Message::ServerDigest2(d) => d.0.to_vec(),
            Message::ProverDigestWithNonce(d, n) => [&d.0[..], &n.0[..]].concat(),
            Message::ServerAck => vec![ACK_BYTE],
        }
    }

    pub fn from_payload(kind: MessageKind, p: &[u8]) -> Result<Self> {
        if p.len() != kind.payload_len() {
            return Err(Error::Protocol(format!(
                "{kind} payload must be {} bytes, got {}",
                kind.payload_len(),
                p.len()
            )));
        }
        Ok(match kind {
            MessageKind::ServerNonce => Message::ServerNonce(Nonce::from_slice(p)?),
            MessageKind::ServerChallenge => {
                Message::ServerChallenge(ChallengeSeed(u64::from_be_bytes(p.try_into().unwrap())))
            }
            MessageKind::ProverDigest => Message::ProverDigest(Digest::from_slice(p)?),
            MessageKind::ProverDigestWithNonce => Message::ProverDigestWithNonce(
                Digest::from_slice(&p[..DIGEST_LEN])?,
                Nonce::from_slice(&p[DIGEST_LEN..])?,
            ),
            MessageKind::ServerAck if p[0] == ACK_BYTE => Message::ServerAck,
            MessageKind::ServerAck => {
                return Err(Error::Protocol(format!("bad acknowledgement byte {:#04x}", p[0])))
            }
            MessageKind::ProverNonce2 => Message::ProverNonce2(Nonce::from_slice(p)?),
            MessageKind::ServerDigest2 => Message::ServerDigest2(Digest::from_slice(p)?),
        })
    }

    /// `tag ‖ len:u16be ‖ payload`.
    pub fn encode(&self) -> Vec<u8> {
        let p = self.payload();
        let mut out = Vec::with_capacity(3 + p.len());
        out.push(self.kind().tag());
        out.extend_from_slice(&(p.len() as u16).to_be_bytes());
        out.extend_from_slice(&p);
        out
    }

    /// Decodes exactly one frame.
    pub fn decode(frame: &[u8]) -> Result<Self> {
        if frame.len() < 3 {
            return Err(Error::Protocol(format!("frame of {} bytes is too short", frame.len())));
        }
        let kind = MessageKind::from_tag(frame[0])?;
        let len = u16::from_be_bytes([frame[1], frame[2]]) as usize;
        if len > MAX_FRAME || frame.len() != 3 + len {
            return Err(Error::Protocol(format!(
                "frame length {} disagrees with header length {len}",
                frame.len() - 3
            )));
        }
        Self::from_payload(kind, &frame[3..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<Message> {
        vec![
            Message::ServerNonce(Nonce([1; 16])),
            Message::ServerChallenge(ChallengeSeed(0x0102_0304_0506_0708)),
            Message::ProverDigest(Digest([2; 32])),
            Message::ProverDigestWithNonce(Digest([3; 32]), Nonce([4; 16])),
            Message::ServerAck,
            Message::ProverNonce2(Nonce([5; 16])),
            Message::ServerDigest2(Digest([6; 32])),
        ]
    }

    #[test]
    fn round_trip_and_layout() {
        for m in samples() {
            let f = m.encode();
            assert_eq!(f.len(), 3 + m.kind().payload_len());
            assert_eq!(Message::decode(&f).unwrap(), m);
            assert_eq!(MessageKind::from_name(m.kind().name()).unwrap(), m.kind());
        }
        assert_eq!(Message::ServerAck.encode(), vec![5, 0, 1, 0x06]);
        assert_eq!(
            Message::ServerChallenge(ChallengeSeed(0x0102_0304_0506_0708)).encode(),
            vec![2, 0, 8, 1, 2, 3, 4, 5, 6, 7, 8]
        );
    }

    #[test]
    fn malformed_frames() {
        assert!(Message::decode(&[]).is_err());
        assert!(Message::decode(&[9, 0, 0]).is_err());
        assert!(Message::decode(&[5, 0, 1, 0x07]).is_err());
        assert!(Message::decode(&[1, 0, 15]).is_err());
        let mut f = Message::ProverDigest(Digest([0; 32])).encode();
        f.pop();
        assert!(Message::decode(&f).is_err());
        f.extend_from_slice(&[0, 0]);
        assert!(Message::decode(&f).is_err());
    }
}

use std::fmt;

use blake2::Blake2s256;
use rand::RngCore;
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::puf::ResponseBits;

pub const DIGEST_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;
const DOMAIN_TAG: u8 = 0x54;

/// Raw 32-byte hash output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub [u8; DIGEST_LEN]);

impl Digest {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        bytes
            .try_into()
            .map(Self)
            .map_err(|_| Error::Invalid(format!("digest must be {DIGEST_LEN} bytes, got {}", bytes.len())))
    }

    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// Per-session 16-byte nonce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Nonce(pub [u8; NONCE_LEN]);

impl Nonce {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        bytes
            .try_into()
            .map(Self)
            .map_err(|_| Error::Invalid(format!("nonce must be {NONCE_LEN} bytes, got {}", bytes.len())))
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut n = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut n);
        Self(n)
    }

    pub fn as_bytes(&self) -> &[u8; NONCE_LEN] {
        &self.0
    }
}

impl fmt::Display for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// Hash function behind the OWF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HashId {
    #[default]
    Blake2s256,
    Sha256,
}

impl HashId {
    pub fn id(self) -> u8 {
        match self {
            HashId::Blake2s256 => 1,
            HashId::Sha256 => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(HashId::Blake2s256),
            2 => Ok(HashId::Sha256),
            other => Err(Error::UnknownHash(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashId::Blake2s256 => "blake2s256",
            HashId::Sha256 => "sha256",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "blake2s" | "blake2s256" | "blake2s-256" => Ok(HashId::Blake2s256),
            "sha256" | "sha-256" => Ok(HashId::Sha256),
            _ => Err(Error::Invalid(format!("unknown hash `{name}`"))),
        }
    }

    pub(crate) fn hash(self, msg: &[u8]) -> Digest {
        let mut d = [0u8; DIGEST_LEN];
        match self {
            HashId::Blake2s256 => d.copy_from_slice(&Blake2s256::digest(msg)),
            HashId::Sha256 => d.copy_from_slice(&Sha256::digest(msg)),
        }
        Digest(d)
    }
}

/// OWF input: `0x54 ‖ k:u16be ‖ bits (MSB first, zero padded) ‖ len(n):u16be ‖ n`.
pub fn owf_input(e: &ResponseBits, n: &Nonce) -> Result<Vec<u8>> {
    let k = u16::try_from(e.len())
        .map_err(|_| Error::Overflow(format!("response length {} exceeds 65535", e.len())))?;
    let packed = e.pack_msb_first();
    let mut msg = Vec::with_capacity(5 + packed.len() + NONCE_LEN);
    msg.push(DOMAIN_TAG);
    msg.extend_from_slice(&k.to_be_bytes());
    msg.extend_from_slice(&packed);
    msg.extend_from_slice(&(NONCE_LEN as u16).to_be_bytes());
    msg.extend_from_slice(&n.0);
    Ok(msg)
}

pub fn owf(e: &ResponseBits, n: &Nonce, hash: HashId) -> Result<Digest> {
    Ok(hash.hash(&owf_input(e, n)?))
}

/// Byte offset of the first response byte inside [`owf_input`].
pub(crate) const BITS_OFFSET: usize = 3;

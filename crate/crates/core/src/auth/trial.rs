use rayon::prelude::*;

use super::config::{AuthOutcome, AuthState, MatchedPattern, TrialConfig};
use super::owf::{owf_input, Digest, HashId, Nonce, BITS_OFFSET};
use crate::error::{Error, Result};
use crate::puf::{ConfidenceVector, ResponseBits};

const CHUNK: u64 = 1 << 12;

/// Positions ordered by ascending `|conf|`, ties by position.
pub fn sort_unreliable(conf: &ConfidenceVector) -> Vec<usize> {
    let v = conf.values();
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()));
    idx
}

/// The `m` least-confident positions, `index_1` first.
pub fn pattern_positions(conf: &ConfidenceVector, m: usize) -> Vec<usize> {
    let mut idx = sort_unreliable(conf);
    idx.truncate(m);
    idx
}

/// Trial response `t`: bit `m-1-j` of `t` flips `positions[j]`, so
/// `index_1` is the most significant bit of the pattern.
pub fn trial_response(e: &ResponseBits, positions: &[usize], t: u64) -> ResponseBits {
    let m = positions.len();
    let mut out = e.clone();
    for (j, &p) in positions.iter().enumerate() {
        if (t >> (m - 1 - j)) & 1 == 1 {
            out.flip(p);
        }
    }
    out
}

struct Searcher<'a> {
    base: Vec<u8>,
    masks: Vec<(usize, u8)>,
    target: &'a Digest,
    hash: HashId,
}

impl Searcher<'_> {
    fn hit(&self, t: u64, buf: &mut [u8]) -> bool {
        buf.copy_from_slice(&self.base);
        let m = self.masks.len();
        for (j, &(byte, mask)) in self.masks.iter().enumerate() {
            if (t >> (m - 1 - j)) & 1 == 1 {
                buf[byte] ^= mask;
            }
        }
        self.hash.hash(buf) == *self.target
    }

    fn scan(&self, lo: u64, hi: u64) -> Option<u64> {
        let mut buf = vec![0u8; self.base.len()];
        (lo..hi).find(|&t| self.hit(t, &mut buf))
    }
}

/// Smallest `t < 2^|positions|` whose trial response hashes to `target`.
pub(crate) fn first_match(
    base: &ResponseBits,
    positions: &[usize],
    target: &Digest,
    nonce: &Nonce,
    hash: HashId,
    parallel: usize,
) -> Result<Option<u64>> {
    let s = Searcher {
        base: owf_input(base, nonce)?,
        masks: positions
            .iter()
            .map(|&p| (BITS_OFFSET + p / 8, 0x80u8 >> (p % 8)))
            .collect(),
        target,
        hash,
    };
    let n = 1u64 << positions.len();
    if parallel == 1 || n <= CHUNK {
        return Ok(s.scan(0, n));
    }
    Ok((0..n.div_ceil(CHUNK))
        .into_par_iter()
        .find_map_first(|c| s.scan(c * CHUNK, ((c + 1) * CHUNK).min(n))))
}

pub(crate) fn check_lengths(e: &ResponseBits, conf: &ConfidenceVector, cfg: &TrialConfig) -> Result<()> {
    cfg.validate()?;
    if e.len() != cfg.k || conf.len() != cfg.k {
        return Err(Error::Invalid(format!(
            "response/confidence lengths ({}, {}) differ from k = {}",
            e.len(),
            conf.len(),
            cfg.k
        )));
    }
    Ok(())
}

/// Exhaustive search over the `2^m` error patterns on the least-confident
/// bits of `e`. Returns the smallest matching pattern.
pub fn trial_search(
    e: &ResponseBits,
    conf: &ConfidenceVector,
    received: &Digest,
    nonce: &Nonce,
    cfg: &TrialConfig,
) -> Result<AuthOutcome> {
    check_lengths(e, conf, cfg)?;
    let positions = pattern_positions(conf, cfg.m);
    Ok(
        match first_match(e, &positions, received, nonce, cfg.hash, cfg.parallel)? {
            Some(t) => AuthOutcome {
                state: AuthState::Success,
                trials_used: t + 1,
                matched: Some(MatchedPattern {
                    t,
                    aged_flips: Vec::new(),
                    round: 0,
                    reference: 0,
                }),
                recovered: Some(trial_response(e, &positions, t)),
            },
            None => AuthOutcome::fail(cfg.patterns()),
        },
    )
}

//! Deterministic challenge expansion from a 64-bit seed.

use super::challenge::{Challenge, ChallengeSeed, ChallengeSpace};
use crate::error::{Error, Result};

/// Maximal-length 64-bit Fibonacci LFSR, taps 64, 63, 61, 60.
#[derive(Debug, Clone)]
pub struct Lfsr64 {
    state: u64,
}

impl Lfsr64 {
    /// A zero seed would lock the register, so it is mapped to 1.
    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 { 1 } else { seed },
        }
    }

    #[inline]
    fn shift(&mut self) {
        let s = self.state;
        let fb = ((s >> 63) ^ (s >> 62) ^ (s >> 60) ^ (s >> 59)) & 1;
        self.state = (s << 1) | fb;
    }

    /// Advances 64 shifts and returns the full register.
    pub fn next_word(&mut self) -> u64 {
        for _ in 0..64 {
            self.shift();
        }
        self.state
    }
}

/// Expands `seed` into `k` sub-challenges inside `space`.
///
/// One 64-bit register word per sub-challenge; table spaces reduce the word
/// modulo their size, k-sum spaces with more than 64 stages draw one extra word
/// per additional 64 stages.
pub fn expand_challenge(seed: ChallengeSeed, k: usize, space: ChallengeSpace) -> Result<Vec<Challenge>> {
    if k == 0 {
        return Err(Error::Invalid("challenge expansion needs k >= 1".into()));
    }
    if space.size() == 0 {
        return Err(Error::ChallengeRange(format!("empty challenge space {space:?}")));
    }
    let mut lfsr = Lfsr64::new(seed.0);
    let out = (0..k)
        .map(|_| match space {
            ChallengeSpace::RoPairs { n_ros } => {
                let rank = lfsr.next_word() as u128 % space.size();
                ChallengeSpace::unrank_pair(n_ros, rank)
            }
            ChallengeSpace::Bits { n_bits } => {
                Challenge::BitIndex((lfsr.next_word() % n_bits as u64) as usize)
            }
            ChallengeSpace::KSum { stages } => {
                let mut bits = Vec::with_capacity(stages);
                while bits.len() < stages {
                    let w = lfsr.next_word();
                    let take = (stages - bits.len()).min(64);
                    bits.extend((0..take).map(|b| (w >> b) & 1 == 1));
                }
                Challenge::KSum(bits)
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-serial reference register, 1-indexed taps as in the usual tables.
    fn reference_words(seed: u64, n: usize) -> Vec<u64> {
        let taps = [64u32, 63, 61, 60];
        let mut s = if seed == 0 { 1u64 } else { seed };
        let mut out = Vec::new();
        for _ in 0..n {
            for _ in 0..64 {
                let fb = taps.iter().fold(0u64, |acc, t| acc ^ ((s >> (t - 1)) & 1));
                s = (s << 1) | fb;
            }
            out.push(s);
        }
        out
    }

    #[test]
    fn matches_bit_serial_reference() {
        let mut l = Lfsr64::new(0xDEAD_BEEF);
        let w: Vec<u64> = (0..5).map(|_| l.next_word()).collect();
        assert_eq!(w, reference_words(0xDEAD_BEEF, 5));
    }

    #[test]
    fn deterministic_and_singleton() {
        let sp = ChallengeSpace::RoPairs { n_ros: 512 };
        let a = expand_challenge(ChallengeSeed(42), 64, sp).unwrap();
        let b = expand_challenge(ChallengeSeed(42), 64, sp).unwrap();
        assert_eq!(a, b);
        assert_eq!(expand_challenge(ChallengeSeed(42), 1, sp).unwrap().len(), 1);
        assert!(expand_challenge(ChallengeSeed(42), 0, sp).is_err());
        for ch in &a {
            sp.check(ch).unwrap();
        }
    }

    #[test]
    fn adjacent_seeds_differ() {
        for space in [
            ChallengeSpace::RoPairs { n_ros: 16 },
            ChallengeSpace::Bits { n_bits: 1000 },
            ChallengeSpace::KSum { stages: 64 },
        ] {
            for s in [0u64, 1, 7, 1 << 40] {
                let a = expand_challenge(ChallengeSeed(s), 8, space).unwrap();
                let b = expand_challenge(ChallengeSeed(s + 1), 8, space).unwrap();
                // 0 and 1 map to the same register state by construction
                if s == 0 {
                    assert_eq!(a, b);
                } else {
                    assert_ne!(a, b, "seed {s} in {space:?}");
                }
            }
        }
    }

    #[test]
    fn wide_ksum_uses_several_words() {
        let sp = ChallengeSpace::KSum { stages: 100 };
        let c = expand_challenge(ChallengeSeed(3), 2, sp).unwrap();
        sp.check(&c[0]).unwrap();
        sp.check(&c[1]).unwrap();
        assert_ne!(c[0], c[1]);
    }
}

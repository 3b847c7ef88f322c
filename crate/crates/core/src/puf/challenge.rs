use std::fmt;

use crate::error::{Error, Result};

/// One challenge in the CRP space of a PUF.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Challenge {
    /// Compare ring oscillators `i` and `j`, `i < j`.
    RoPair { i: usize, j: usize },
    /// Stage-select bits of a k-sum (linear additive) PUF.
    KSum(Vec<bool>),
    /// Direct index into a confidence population.
    BitIndex(usize),
}

impl Challenge {
    pub fn ro_pair(i: usize, j: usize) -> Result<Self> {
        if i >= j {
            return Err(Error::ChallengeRange(format!("ro pair ({i}, {j}) needs i < j")));
        }
        Ok(Challenge::RoPair { i, j })
    }
}

impl fmt::Display for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Challenge::RoPair { i, j } => write!(f, "ro({i},{j})"),
            Challenge::KSum(bits) => {
                write!(f, "ksum(")?;
                for b in bits {
                    write!(f, "{}", u8::from(*b))?;
                }
                write!(f, ")")
            }
            Challenge::BitIndex(i) => write!(f, "bit({i})"),
        }
    }
}

/// Seed from which a TREVERSE-B style prover expands its sub-challenges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChallengeSeed(pub u64);

/// Shape of a PUF's challenge space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChallengeSpace {
    RoPairs { n_ros: usize },
    KSum { stages: usize },
    Bits { n_bits: usize },
}

impl ChallengeSpace {
    /// Number of distinct challenges, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        match *self {
            ChallengeSpace::RoPairs { n_ros } => {
                let n = n_ros as u128;
                n * n.saturating_sub(1) / 2
            }
            ChallengeSpace::KSum { stages } => {
                if stages >= 128 {
                    u128::MAX
                } else {
                    1u128 << stages
                }
            }
            ChallengeSpace::Bits { n_bits } => n_bits as u128,
        }
    }

    pub fn check(&self, ch: &Challenge) -> Result<()> {
        let ok = match (*self, ch) {
            (ChallengeSpace::RoPairs { n_ros }, Challenge::RoPair { i, j }) => i < j && *j < n_ros,
            (ChallengeSpace::KSum { stages }, Challenge::KSum(bits)) => bits.len() == stages,
            (ChallengeSpace::Bits { n_bits }, Challenge::BitIndex(i)) => *i < n_bits,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ChallengeRange(format!("{ch} not in {self:?}")))
        }
    }

    /// The `rank`-th ring-oscillator pair in lexicographic order.
    pub(crate) fn unrank_pair(n_ros: usize, mut rank: u128) -> Challenge {
        let mut i = 0usize;
        loop {
            let row = (n_ros - i - 1) as u128;
            if rank < row {
                return Challenge::RoPair {
                    i,
                    j: i + 1 + rank as usize,
                };
            }
            rank -= row;
            i += 1;
        }
    }

    /// First `k` challenges in canonical order, used as a fixed challenge list.
    pub fn first(&self, k: usize) -> Result<Vec<Challenge>> {
        if (k as u128) > self.size() {
            return Err(Error::ChallengeRange(format!(
                "{k} challenges requested from a space of {}",
                self.size()
            )));
        }
        Ok((0..k)
            .map(|r| match *self {
                ChallengeSpace::RoPairs { n_ros } => Self::unrank_pair(n_ros, r as u128),
                ChallengeSpace::KSum { stages } => {
                    Challenge::KSum(
                        (0..stages)
                            .map(|b| b < usize::BITS as usize && (r >> b) & 1 == 1)
                            .collect(),
                    )
                }
                ChallengeSpace::Bits { .. } => Challenge::BitIndex(r),
            })
            .collect())
    }
}

/// Number of CRPs offered by `n_ros` ring oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrpMode {
    /// Disjoint pairs only, so responses are independent.
    Independent,
    AllPairs,
}

pub fn ropuf_crp_count(n_ros: usize, mode: CrpMode) -> Result<u64> {
    if n_ros < 2 {
        return Err(Error::Invalid(format!("need at least 2 ROs, got {n_ros}")));
    }
    let n = n_ros as u64;
    Ok(match mode {
        CrpMode::Independent => n / 2,
        CrpMode::AllPairs => n * (n - 1) / 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crp_counts() {
        assert_eq!(ropuf_crp_count(512, CrpMode::AllPairs).unwrap(), 130_816);
        assert_eq!(ropuf_crp_count(512, CrpMode::Independent).unwrap(), 256);
        assert_eq!(ropuf_crp_count(2, CrpMode::AllPairs).unwrap(), 1);
        assert!(ropuf_crp_count(1, CrpMode::AllPairs).is_err());
    }

    #[test]
    fn unrank_enumerates_all_pairs_once() {
        let n = 7;
        let pairs: Vec<_> = (0..21u128)
            .map(|r| ChallengeSpace::unrank_pair(n, r))
            .collect();
        let mut expect = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                expect.push(Challenge::RoPair { i, j });
            }
        }
        assert_eq!(pairs, expect);
    }

    #[test]
    fn range_checks() {
        let s = ChallengeSpace::RoPairs { n_ros: 4 };
        assert!(s.check(&Challenge::RoPair { i: 1, j: 3 }).is_ok());
        assert!(s.check(&Challenge::RoPair { i: 1, j: 4 }).is_err());
        assert!(s.check(&Challenge::BitIndex(0)).is_err());
        assert!(Challenge::ro_pair(2, 2).is_err());
        let k = ChallengeSpace::KSum { stages: 3 };
        assert!(k.check(&Challenge::KSum(vec![true, false])).is_err());
    }
}

use super::config::{AuthOutcome, AuthState, MatchedPattern, TrialConfig};
use super::owf::{Digest, Nonce};
use super::trial::{check_lengths, first_match, sort_unreliable, trial_response};
use crate::error::{Error, Result};
use crate::puf::{Challenge, ConfidenceVector, ResponseBits, SimPuf};

/// `Σ_{f ≤ n_ag} C(k-m, f) · 2^m`.
pub fn detection_worst_case_trials(cfg: &TrialConfig) -> Result<u64> {
    cfg.validate()?;
    let n = (cfg.k - cfg.m) as u64;
    let overflow = || Error::Overflow("detection-update trial count".into());
    let mut binom = 1u64;
    let mut sum = 0u64;
    for f in 0..=cfg.n_ag as u64 {
        if f > 0 {
            binom = binom.checked_mul(n - f + 1).ok_or_else(overflow)? / f;
        }
        sum = sum.checked_add(binom).ok_or_else(overflow)?;
    }
    sum.checked_mul(cfg.patterns()).ok_or_else(overflow)
}

/// Advances `idx` to the next `idx.len()`-subset of `0..n` in lexicographic order.
fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let f = idx.len();
    for i in (0..f).rev() {
        if idx[i] < n - f + i {
            idx[i] += 1;
            for j in i + 1..f {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Trial search that additionally flips up to `n_ag` reliable bits, trying
/// smaller flip counts first. Flipped positions are reported in
/// `matched.aged_flips`; nothing is mutated.
pub fn detection_search(
    e: &ResponseBits,
    conf: &ConfidenceVector,
    received: &Digest,
    nonce: &Nonce,
    cfg: &TrialConfig,
) -> Result<AuthOutcome> {
    check_lengths(e, conf, cfg)?;
    let order = sort_unreliable(conf);
    let positions = &order[..cfg.m];
    let mut reliable = order[cfg.m..].to_vec();
    reliable.sort_unstable();

    let mut total = 0u64;
    for f in 0..=cfg.n_ag {
        let mut idx: Vec<usize> = (0..f).collect();
        loop {
            let mut base = e.clone();
            idx.iter().for_each(|&i| base.flip(reliable[i]));
            if let Some(t) = first_match(&base, positions, received, nonce, cfg.hash, cfg.parallel)? {
                return Ok(AuthOutcome {
                    state: AuthState::Success,
                    trials_used: total + t + 1,
                    matched: Some(MatchedPattern {
                        t,
                        aged_flips: idx.iter().map(|&i| reliable[i]).collect(),
                        round: 0,
                        reference: 0,
                    }),
                    recovered: Some(trial_response(&base, positions, t)),
                });
            }
            total += cfg.patterns();
            if !next_subset(&mut idx, reliable.len()) {
                break;
            }
        }
    }
    Ok(AuthOutcome::fail(total))
}

/// [`detection_search`] against `simpuf`; on success the flipped reliable
/// bits are written back as aging updates.
pub fn detection_update_search(
    simpuf: &mut SimPuf,
    challenges: &[Challenge],
    received: &Digest,
    nonce: &Nonce,
    cfg: &TrialConfig,
) -> Result<AuthOutcome> {
    let (e, conf) = simpuf.query_vector(challenges)?;
    let out = detection_search(&e, &conf, received, nonce, cfg)?;
    if let Some(m) = &out.matched {
        for &p in &m.aged_flips {
            simpuf.apply_aging_update(&challenges[p])?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_subset(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert!(!next_subset(&mut [], 4));
    }

    #[test]
    fn worst_case_bound() {
        let cfg = TrialConfig::new(110, 22).unwrap().with_n_ag(1).unwrap();
        let total = detection_worst_case_trials(&cfg).unwrap();
        let extra = total - (1 << 22);
        assert_eq!(extra, 369_098_752);
        assert!(extra < 1 << 29);
        let plain = TrialConfig::new(110, 22).unwrap();
        assert_eq!(detection_worst_case_trials(&plain).unwrap(), 1 << 22);
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpuf::auth::*;
use simpuf::error::Result;
use simpuf::puf::{
    Challenge, ChallengePolicy, ConfidenceVector, ResponseBits, SimPuf, SimPufKind,
};

fn conf_table(conf: Vec<f64>) -> SimPuf {
    let k = conf.len();
    SimPuf::new(
        SimPufKind::ConfTable { conf },
        "ref",
        k,
        ChallengePolicy::Fixed((0..k).map(Challenge::BitIndex).collect()),
    )
    .unwrap()
}

/// Accepts iff some vector that agrees with `e` outside the `m` least
/// confident positions hashes to the digest; enumerates vectors directly.
fn brute_force_accepts(e: &[bool], conf: &[f64], m: usize, d: &Digest, n: &Nonce) -> bool {
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| conf[a].abs().partial_cmp(&conf[b].abs()).unwrap());
    let free = &order[..m];
    (0..1usize << m).any(|values| {
        let mut v = e.to_vec();
        for (j, &p) in free.iter().enumerate() {
            v[p] = (values >> j) & 1 == 1;
        }
        owf(&ResponseBits::new(v).unwrap(), n, HashId::Blake2s256).unwrap() == *d
    })
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>, usize, [u8; 16])> {
    (1usize..=16).prop_flat_map(|k| {
        (
            prop::collection::vec(-4.0f64..4.0, k),
            prop::collection::vec(prop::bool::weighted(0.2), k),
            0..=k.min(6),
            any::<[u8; 16]>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agrees_with_brute_force((conf, flips, m, nonce) in instance()) {
        let c = ConfidenceVector::new(conf.clone()).unwrap();
        let e = c.to_bits();
        let prover: Vec<bool> = e.bits().iter().zip(&flips).map(|(b, f)| b ^ f).collect();
        let prover = ResponseBits::new(prover).unwrap();
        let n = Nonce(nonce);
        let d = owf(&prover, &n, HashId::Blake2s256).unwrap();
        let cfg = TrialConfig::new(conf.len(), m).unwrap();
        let out = trial_search(&e, &c, &d, &n, &cfg).unwrap();
        prop_assert_eq!(out.is_success(), brute_force_accepts(e.bits(), &conf, m, &d, &n));
        prop_assert!(out.trials_used <= 1 << m);
        if out.is_success() {
            // soundness: the recovered response re-hashes to the digest
            let rec = out.recovered.as_ref().unwrap();
            prop_assert_eq!(owf(rec, &n, HashId::Blake2s256).unwrap(), d);
            // completeness: every mismatch lies inside the searched set
            let pos = pattern_positions(&c, m);
            prop_assert!(e.mismatches(&prover).iter().all(|p| pos.contains(p)));
        } else {
            prop_assert_eq!(out.trials_used, 1 << m);
        }
    }

    #[test]
    fn larger_m_never_rejects_an_accept((conf, flips, m, nonce) in instance()) {
        let k = conf.len();
        let c = ConfidenceVector::new(conf).unwrap();
        let e = c.to_bits();
        let prover: Vec<bool> = e.bits().iter().zip(&flips).map(|(b, f)| b ^ f).collect();
        let prover = ResponseBits::new(prover).unwrap();
        let n = Nonce(nonce);
        let d = owf(&prover, &n, HashId::Blake2s256).unwrap();
        let mut prev = false;
        for mm in m..=k.min(8) {
            let ok = trial_search(&e, &c, &d, &n, &TrialConfig::new(k, mm).unwrap()).unwrap().is_success();
            prop_assert!(ok || !prev);
            prev = ok;
        }
    }
}

#[test]
fn completeness_on_random_inner_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let c = ConfidenceVector::new((0..64).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let e = c.to_bits();
        let pos = pattern_positions(&c, 8);
        let mut prover = e.clone();
        for &p in &pos {
            if rng.gen_bool(0.3) {
                prover.flip(p);
            }
        }
        let n = Nonce::random(&mut rng);
        let d = owf(&prover, &n, HashId::Sha256).unwrap();
        let cfg = TrialConfig::new(64, 8).unwrap().with_hash(HashId::Sha256);
        assert!(trial_search(&e, &c, &d, &n, &cfg).unwrap().is_success());
    }
}

struct Scripted {
    challenges: Vec<Challenge>,
    responses: Vec<ResponseBits>,
    nonce: Nonce,
    calls: usize,
}

impl Prover for Scripted {
    fn next_round(&mut self, round: usize) -> Result<RoundResponse> {
        self.calls += 1;
        let e = &self.responses[round.min(self.responses.len() - 1)];
        Ok(RoundResponse {
            challenges: self.challenges.clone(),
            digest: owf(e, &self.nonce, HashId::Blake2s256)?,
            nonce: self.nonce,
        })
    }
}

#[test]
fn augmented_success_in_first_round() {
    let sp = conf_table(vec![0.1, -2.0, 3.0, -0.2, 1.0, -1.5, 0.05, 2.5]);
    let chs: Vec<Challenge> = (0..8).map(Challenge::BitIndex).collect();
    let (e, _) = sp.query_vector(&chs).unwrap();
    let mut noisy = e.clone();
    noisy.flip(6);
    let mut p = Scripted { challenges: chs, responses: vec![noisy], nonce: Nonce([1; 16]), calls: 0 };
    let cfg = TrialConfig::new(8, 2).unwrap();
    let out = augmented_authenticate(std::slice::from_ref(&sp), &mut p, &cfg).unwrap();
    let m = out.matched.unwrap();
    assert_eq!((m.round, m.reference, m.t), (0, 0, 0b10));
    assert_eq!(out.trials_used, 3);
    assert_eq!(p.calls, 1);
}

#[test]
fn augmented_uses_second_reference() {
    // both references enroll the same bits, but rank reliability differently
    let ref1 = conf_table(vec![0.1, 0.2, 3.0, -2.0, 1.0, -1.5]);
    let ref2 = conf_table(vec![2.0, 3.0, 0.1, -0.2, 1.0, -1.5]);
    let chs: Vec<Challenge> = (0..6).map(Challenge::BitIndex).collect();
    let (e1, _) = ref1.query_vector(&chs).unwrap();
    let (e2, c2) = ref2.query_vector(&chs).unwrap();
    assert_eq!(e1, e2);
    // noise drawn against reference 2's ordering: flip its two weakest bits
    let pos2 = pattern_positions(&c2, 2);
    assert_eq!(pos2, vec![2, 3]);
    let prover = trial_response(&e2, &pos2, 0b11);
    let cfg = TrialConfig::new(6, 2).unwrap().with_refs(2).unwrap();
    let refs = [ref1, ref2];
    let mut p = Scripted { challenges: chs, responses: vec![prover.clone()], nonce: Nonce([2; 16]), calls: 0 };
    let out = augmented_authenticate(&refs, &mut p, &cfg).unwrap();
    let m = out.matched.unwrap();
    assert_eq!((m.round, m.reference, m.t), (0, 1, 3));
    assert_eq!(out.trials_used, 4 + 4);
    assert_eq!(out.recovered.unwrap(), prover);
}

#[test]
fn augmented_exhaustion_count() {
    let sp = conf_table(vec![0.1, -2.0, 3.0, -0.2]);
    let chs: Vec<Challenge> = (0..4).map(Challenge::BitIndex).collect();
    let (mut e, _) = sp.query_vector(&chs).unwrap();
    e.flip(2);
    let cfg = TrialConfig::new(4, 2).unwrap().with_refs(2).unwrap().with_rounds(3).unwrap();
    let refs = [sp.clone(), sp];
    let mut p = Scripted { challenges: chs, responses: vec![e], nonce: Nonce::default(), calls: 0 };
    let out = augmented_authenticate(&refs, &mut p, &cfg).unwrap();
    assert_eq!(out.state, AuthState::Fail);
    assert_eq!(out.trials_used, worst_case_trials(&cfg).unwrap());
    assert_eq!(out.trials_used, 4 * 2 * 3);
    assert_eq!(p.calls, 3);
}

#[test]
fn augmented_propagates_prover_errors() {
    let sp = conf_table(vec![1.0, -1.0]);
    let mut failing = |_: usize| -> Result<RoundResponse> {
        Err(simpuf::error::Error::Transport("link down".into()))
    };
    let cfg = TrialConfig::new(2, 1).unwrap();
    assert!(augmented_authenticate(&[sp], &mut failing, &cfg).is_err());
}

#[test]
fn detection_update_learns_an_aged_bit() {
    let mut sp = conf_table(vec![0.1, -2.0, 3.0, -0.2, 1.0, -1.5, 0.05, 2.5]);
    let chs: Vec<Challenge> = (0..8).map(Challenge::BitIndex).collect();
    let (e, c) = sp.query_vector(&chs).unwrap();
    // bit 2 is highly reliable but has aged
    let mut aged = e.clone();
    aged.flip(2);
    aged.flip(6);
    let n = Nonce([3; 16]);
    let d = owf(&aged, &n, HashId::Blake2s256).unwrap();

    let plain = TrialConfig::new(8, 2).unwrap();
    assert!(!trial_search(&e, &c, &d, &n, &plain).unwrap().is_success());
    // n_ag = 0 behaves exactly like the plain search
    assert_eq!(
        detection_search(&e, &c, &d, &n, &plain).unwrap(),
        trial_search(&e, &c, &d, &n, &plain).unwrap()
    );

    let cfg = plain.clone().with_n_ag(1).unwrap();
    let out = detection_update_search(&mut sp, &chs, &d, &n, &cfg).unwrap();
    assert!(out.is_success());
    let m = out.matched.as_ref().unwrap();
    assert_eq!(m.aged_flips, vec![2]);
    // reliable positions ascending: 1, 2, ... ; bit 2 is the second subset
    assert_eq!(out.trials_used, 4 + 4 + m.t + 1);
    assert!(out.trials_used <= detection_worst_case_trials(&cfg).unwrap());
    assert_eq!(sp.query(&Challenge::BitIndex(2)).unwrap(), (true, -3.0));

    // the updated SimPUF accepts the same response with a plain search
    let again = detection_update_search(&mut sp, &chs, &d, &n, &plain).unwrap();
    assert!(again.is_success());
    assert!(again.matched.unwrap().aged_flips.is_empty());
}

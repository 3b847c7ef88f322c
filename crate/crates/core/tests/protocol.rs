use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simpuf::auth::{owf, AuthState, HashId, Nonce, TrialConfig};
use simpuf::dataset::{synthesize_confidence_population, ConfidencePopulation, NoiseSpec};
use simpuf::protocol::*;
use simpuf::puf::{
    expand_challenge, simpuf_enroll, Challenge, ChallengePolicy, ChallengeSeed, EnrollKind,
    EnrollmentSource, PhysicalPuf, SimPuf,
};

const K: usize = 32;

fn population(seed: u64, sigma: f64) -> ConfidencePopulation {
    synthesize_confidence_population(4096, 0.0, 1.0, seed)
        .unwrap()
        .with_condition("hot", NoiseSpec::new(0.0, sigma).unwrap())
}

fn fixed_list() -> Vec<Challenge> {
    (0..K).map(|i| Challenge::BitIndex(3 * i + 1)).collect()
}

fn enroll(pop: &ConfidencePopulation, policy: ChallengePolicy) -> SimPuf {
    simpuf_enroll(EnrollmentSource::Population(pop), "ref", EnrollKind::Conf, K, policy).unwrap()
}

fn setup_a(sigma: f64, condition: &str) -> (Server, ProverDevice) {
    let pop = population(1, sigma);
    let server = Server::new(vec![enroll(&pop, ChallengePolicy::Fixed(fixed_list()))], Architecture::A, 10).unwrap();
    let dev = ProverDevice::new_a(PhysicalPuf::from_population(&pop), fixed_list(), condition, 20).unwrap();
    (server, dev)
}

fn setup_b(sigma: f64, condition: &str) -> (Server, ProverDevice) {
    let pop = population(2, sigma);
    let server = Server::new(vec![enroll(&pop, ChallengePolicy::Seeded)], Architecture::B, 11).unwrap();
    let dev = ProverDevice::new_b(PhysicalPuf::from_population(&pop), K, condition, 21).unwrap();
    (server, dev)
}

#[test]
fn respond_a_contract() {
    let (server, mut dev) = setup_a(0.0, "hot");
    let (e, _) = server.simpufs()[0].query_vector(&fixed_list()).unwrap();
    let n1 = Nonce([1; 16]);
    let d1 = dev.prover_respond_a(&n1).unwrap();
    assert_eq!(d1, Message::ProverDigest(owf(&e, &n1, HashId::Blake2s256).unwrap()));
    assert_ne!(d1, dev.prover_respond_a(&Nonce([2; 16])).unwrap());
    assert!(dev.prover_respond_b(ChallengeSeed(5)).is_err());

    // noisy device: digests differ exactly when the regenerated responses do
    let (_, mut noisy) = setup_a(0.8, "hot");
    let n = Nonce([9; 16]);
    let mut prev: Option<(Message, simpuf::puf::ResponseBits)> = None;
    let mut differed = 0;
    for _ in 0..50 {
        let d = noisy.prover_respond_a(&n).unwrap();
        let e = noisy.last_response().unwrap().clone();
        assert_eq!(d, Message::ProverDigest(owf(&e, &n, HashId::Blake2s256).unwrap()));
        if let Some((pd, pe)) = &prev {
            assert_eq!(pd != &d, pe != &e);
            differed += (pe != &e) as u32;
        }
        prev = Some((d, e));
    }
    assert!(differed > 0);
}

#[test]
fn respond_b_contract() {
    let (server, mut dev) = setup_b(0.0, "hot");
    let (_, mut twin) = setup_b(0.0, "hot");
    let mut nonces = HashSet::new();
    for s in 0..10_000u64 {
        let seed = ChallengeSeed(s.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let m = dev.prover_respond_b(seed).unwrap();
        assert_eq!(m, twin.prover_respond_b(seed).unwrap());
        let Message::ProverDigestWithNonce(d, n) = m else { panic!("{m:?}") };
        assert!(nonces.insert(n), "nonce repeated in session {s}");
        if s < 100 {
            let chs = expand_challenge(seed, K, server.simpufs()[0].space()).unwrap();
            let (e, _) = server.simpufs()[0].query_vector(&chs).unwrap();
            assert_eq!(d, owf(&e, &n, HashId::Blake2s256).unwrap());
        }
    }
    assert!(dev.prover_respond_a(&Nonce::default()).is_err());
}

#[test]
fn unilateral_sessions() {
    let cfg = TrialConfig::new(K, 6).unwrap();
    let (mut server, mut dev) = setup_a(0.0, "ref");
    let r = run_unilateral(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap();
    assert_eq!((r.outcome.state, r.outcome.trials_used), (AuthState::Success, 1));
    assert_eq!(r.transcript.count(MessageKind::ServerNonce), 1);
    assert_eq!(r.transcript.count(MessageKind::ProverDigest), 1);
    assert!(r.transcript.abort.is_none());

    // a reliable bit forced wrong in every regeneration
    let pop = population(1, 0.0);
    let mut conf = pop.enroll_conf().to_vec();
    let strongest = (0..K).max_by(|&a, &b| conf[3 * a + 1].abs().total_cmp(&conf[3 * b + 1].abs())).unwrap();
    conf[3 * strongest + 1] = -conf[3 * strongest + 1];
    let bad = PhysicalPuf::new(simpuf::puf::PufTruth::Confidences(conf)).with_noise("ref", NoiseSpec::default());
    let mut bad = ProverDevice::new_a(bad, fixed_list(), "ref", 3).unwrap();
    let cfg = cfg.with_refs(1).unwrap().with_rounds(3).unwrap();
    let r = run_unilateral(&mut server, &mut bad, &cfg, &mut InProcessTransport::new()).unwrap();
    assert_eq!((r.outcome.state, r.outcome.trials_used), (AuthState::Fail, 3 * 64));

    let (mut server, mut dev) = setup_b(3.0, "hot");
    let cfg = TrialConfig::new(K, 2).unwrap().with_rounds(10).unwrap();
    let r = run_unilateral(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap();
    assert!(r.transcript.count(MessageKind::ProverDigestWithNonce) <= 10);
    assert_eq!(
        r.transcript.count(MessageKind::ServerChallenge),
        r.transcript.count(MessageKind::ProverDigestWithNonce)
    );
}

#[test]
fn mismatched_parties_are_rejected() {
    let (mut server_a, _) = setup_a(0.0, "ref");
    let (_, mut dev_b) = setup_b(0.0, "ref");
    let cfg = TrialConfig::new(K, 2).unwrap();
    assert!(run_unilateral(&mut server_a, &mut dev_b, &cfg, &mut InProcessTransport::new()).is_err());
    let (mut server_a, mut dev_a) = setup_a(0.0, "ref");
    assert!(run_mutual(&mut server_a, &mut dev_a, &cfg, &mut InProcessTransport::new()).is_err());
}

#[test]
fn mutual_sessions() {
    let cfg = TrialConfig::new(K, 8).unwrap().with_rounds(3).unwrap();
    let (mut server, mut dev) = setup_b(0.15, "hot");
    let mut accepted = 0;
    for _ in 0..20 {
        let r = run_mutual(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap();
        if r.prover_accept == Some(true) {
            accepted += 1;
            assert!(r.outcome.is_success());
            assert_eq!(r.outcome.recovered.as_ref(), dev.last_response());
            assert_eq!(r.transcript.count(MessageKind::ServerAck), 1);
            assert_eq!(r.transcript.count(MessageKind::ServerDigest2), 1);
        }
    }
    assert!(accepted >= 18, "{accepted}");

    // server answering the second digest from a foreign model
    let (server, mut dev) = setup_b(0.0, "ref");
    let other = enroll(&population(77, 0.0), ChallengePolicy::Seeded);
    let mut liar = server.with_r2_override(other);
    let r = run_mutual(&mut liar, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap();
    assert!(r.outcome.is_success());
    assert_eq!(r.prover_accept, Some(false));

    // server failing step 3 never acknowledges
    let (mut server, _) = setup_b(0.0, "ref");
    let foreign = population(78, 0.0);
    let mut impostor = ProverDevice::new_b(PhysicalPuf::from_population(&foreign), K, "ref", 1).unwrap();
    let r = run_mutual(&mut server, &mut impostor, &cfg, &mut InProcessTransport::new()).unwrap();
    assert_eq!(r.outcome.state, AuthState::Fail);
    assert_eq!(r.transcript.count(MessageKind::ServerAck), 0);
    assert_eq!(r.prover_accept, Some(false));
}

#[test]
fn replays_are_rejected_unless_inputs_are_forced() {
    let cfg = TrialConfig::new(K, 4).unwrap();
    for arch in [Architecture::A, Architecture::B] {
        let (mut server, mut dev) = match arch {
            Architecture::A => setup_a(0.1, "hot"),
            Architecture::B => setup_b(0.1, "hot"),
        };
        let rec = loop {
            let r = run_unilateral(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap();
            if r.outcome.is_success() {
                break r.transcript;
            }
        };
        for _ in 0..1000 {
            assert_eq!(adversary_replay(&rec, &mut server, &cfg).unwrap().state, AuthState::Fail);
        }
        server.force_from_transcript(&rec);
        assert!(adversary_replay(&rec, &mut server, &cfg).unwrap().is_success(), "{arch:?}");
    }
}

#[test]
fn impostor_acceptance() {
    // k - m = 48: no acceptances
    let pop = population(5, 0.0);
    let foreign = population(6, 0.0);
    let k = 48;
    let sp = simpuf_enroll(EnrollmentSource::Population(&pop), "ref", EnrollKind::Conf, k, ChallengePolicy::Seeded).unwrap();
    let mut server = Server::new(vec![sp], Architecture::B, 1).unwrap();
    let mut dev = ProverDevice::new_b(PhysicalPuf::from_population(&foreign), k, "ref", 2).unwrap();
    let cfg = TrialConfig::new(k, 0).unwrap();
    assert_eq!(adversary_impostor(&mut dev, &mut server, &cfg, 10_000).unwrap(), 0);
    assert_eq!(adversary_impostor(&mut dev, &mut server, &cfg, 0).unwrap(), 0);

    // k - m = 2, unbiased bits: acceptance near 1/4
    let pop = synthesize_confidence_population(1 << 16, 0.0, 1.0, 7).unwrap();
    let foreign = synthesize_confidence_population(1 << 16, 0.0, 1.0, 8).unwrap();
    let sp = simpuf_enroll(EnrollmentSource::Population(&pop), "ref", EnrollKind::Conf, 2, ChallengePolicy::Seeded).unwrap();
    let mut server = Server::new(vec![sp], Architecture::B, 3).unwrap();
    let mut dev = ProverDevice::new_b(PhysicalPuf::from_population(&foreign), 2, "ref", 4).unwrap();
    let n = 10_000;
    let hits = adversary_impostor(&mut dev, &mut server, &TrialConfig::new(2, 0).unwrap(), n).unwrap();
    let rate = hits as f64 / n as f64;
    let sd = (0.25f64 * 0.75 / n as f64).sqrt();
    assert!((rate - 0.25).abs() < 3.0 * sd, "{rate}");
}

#[test]
fn transcripts_replay_byte_identically() {
    let cfg = TrialConfig::new(K, 6).unwrap().with_rounds(4).unwrap();
    let logs: Vec<String> = (0..2)
        .map(|_| {
            let (mut server, mut dev) = setup_b(0.3, "hot");
            (0..5)
                .map(|_| run_mutual(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap().transcript.to_hex_log())
                .collect()
        })
        .collect();
    assert_eq!(logs[0], logs[1]);
    let parsed = Transcript::from_hex_log(0, &logs[0]).unwrap();
    assert_eq!(parsed.to_hex_log(), logs[0]);
}

/// Position of the first message a mutual-mode B prover must refuse.
fn first_violation(kinds: &[MessageKind]) -> Option<usize> {
    let (mut responded, mut awaiting, mut done) = (false, false, false);
    for (i, k) in kinds.iter().enumerate() {
        let ok = !done
            && match k {
                MessageKind::ServerChallenge => !awaiting,
                MessageKind::ServerAck => responded && !awaiting,
                MessageKind::ServerDigest2 => awaiting,
                _ => false,
            };
        if !ok {
            return Some(i);
        }
        match k {
            MessageKind::ServerChallenge => responded = true,
            MessageKind::ServerAck => awaiting = true,
            _ => done = true,
        }
    }
    None
}

#[test]
fn shuffled_transcripts_abort_at_the_first_violation() {
    let cfg = TrialConfig::new(K, 6).unwrap().with_rounds(3).unwrap();
    let (mut server, mut dev) = setup_b(0.6, "hot");
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for _ in 0..40 {
        let rec = run_mutual(&mut server, &mut dev, &cfg, &mut InProcessTransport::new()).unwrap().transcript;
        let mut msgs: Vec<Message> = rec.sent_by(Direction::ServerToProver).cloned().collect();
        // inject foreign-direction messages too
        msgs.push(Message::ProverNonce2(Nonce([1; 16])));
        msgs.push(Message::ServerNonce(Nonce([2; 16])));
        for _ in 0..25 {
            msgs.shuffle(&mut rng);
            let kinds: Vec<MessageKind> = msgs.iter().map(Message::kind).collect();
            let (_, mut fresh) = setup_b(0.6, "hot");
            let mut p = ProverSession::new(&mut fresh, SessionMode::Mutual).unwrap();
            let got = msgs.iter().position(|m| p.handle(m).is_err());
            assert_eq!(got, first_violation(&kinds), "{kinds:?}");
            checked += 1;
        }

        // server side: shuffled prover messages
        let mut replies: Vec<Message> = rec.sent_by(Direction::ProverToServer).cloned().collect();
        replies.shuffle(&mut rng);
        let mut fake = rec.clone();
        fake.messages = replies.into_iter().map(|m| (Direction::ProverToServer, m)).collect();
        let first_kind = fake.messages.first().map(|(_, m)| m.kind());
        let mut p = ReplayProver::new(&fake);
        let (mut fresh_server, _) = setup_b(0.6, "hot");
        let r = run_session(&mut fresh_server, &mut p, &cfg, SessionMode::Mutual, &mut InProcessTransport::new()).unwrap();
        if first_kind != Some(MessageKind::ProverDigestWithNonce) {
            assert!(r.transcript.abort.is_some());
            assert_eq!(r.outcome.state, AuthState::Fail);
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn transport_faults_abort_the_session() {
    let cfg = TrialConfig::new(K, 4).unwrap().with_rounds(2).unwrap();
    for n in 0..4 {
        let (mut server, mut dev) = setup_b(0.0, "ref");
        let mut t = FaultyTransport::failing(InProcessTransport::new(), n);
        let r = run_mutual(&mut server, &mut dev, &cfg, &mut t).unwrap();
        assert!(r.transcript.abort.is_some(), "fault at send {n}");
        assert_ne!(r.prover_accept, Some(true));

        let (mut server, mut dev) = setup_b(0.0, "ref");
        let mut t = FaultyTransport::dropping(InProcessTransport::new(), n);
        let r = run_mutual(&mut server, &mut dev, &cfg, &mut t).unwrap();
        assert!(r.transcript.abort.is_some());
    }
    // a corrupted digest never authenticates
    let (mut server, mut dev) = setup_b(0.0, "ref");
    let mut t = FaultyTransport::corrupting(InProcessTransport::new(), 1);
    let r = run_unilateral(&mut server, &mut dev, &TrialConfig::new(K, 4).unwrap(), &mut t).unwrap();
    assert_eq!(r.outcome.state, AuthState::Fail);
}

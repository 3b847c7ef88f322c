use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpuf::auth::{detection_update_search, AuthOutcome, TrialConfig};
use simpuf::dataset::{synthesize_confidence_population, ConfidencePopulation, RoDataset};
use simpuf::protocol::{
    adversary_impostor, adversary_replay, run_mutual, run_unilateral, Architecture, InProcessTransport, Message,
    ProverDevice, Server,
};
use simpuf::puf::{expand_challenge, ChallengePolicy, ChallengeSeed, PhysicalPuf, PufTruth, SimPuf};

use super::hash_of;
use crate::error::{CliError, CliResult};
use crate::io::{open_out, read_dataset};
use crate::{AttackArgs, AuthArgs, Globals};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchArg(pub Architecture);

impl FromStr for ArchArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(ArchArg(Architecture::A)),
            "b" => Ok(ArchArg(Architecture::B)),
            _ => Err(format!("unknown architecture `{s}` (a, b)")),
        }
    }
}

fn arch_name(a: Architecture) -> &'static str {
    match a {
        Architecture::A => "A",
        Architecture::B => "B",
    }
}

/// Same measurements with the ring oscillators shuffled: a different chip.
fn shuffled(ds: &RoDataset, seed: u64) -> CliResult<RoDataset> {
    let mut perm: Vec<usize> = (0..ds.n_ros()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut freq = Vec::with_capacity(ds.conditions().len() * ds.n_ros() * ds.repeats());
    for c in 0..ds.conditions().len() {
        for &ro in &perm {
            freq.extend_from_slice(ds.repeats_of(c, ro));
        }
    }
    Ok(RoDataset::new(ds.n_ros(), ds.repeats(), ds.conditions().to_vec(), freq)?)
}

fn load_store(p: &PathBuf) -> CliResult<SimPuf> {
    let bytes = std::fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    Ok(SimPuf::from_store_bytes(&bytes)?)
}

fn report(w: &mut dyn Write, out: &AuthOutcome, simpufs: &[SimPuf]) -> CliResult<()> {
    writeln!(w, "outcome: {}", if out.is_success() { "success" } else { "fail" })?;
    writeln!(w, "trials_used: {}", out.trials_used)?;
    if let Some(m) = &out.matched {
        writeln!(w, "matched_reference: {}", simpufs[m.reference].condition())?;
        writeln!(w, "matched_round: {}", m.round + 1)?;
        writeln!(w, "matched_pattern: {}", m.t)?;
        if !m.aged_flips.is_empty() {
            let flips: Vec<String> = m.aged_flips.iter().map(|p| p.to_string()).collect();
            writeln!(w, "aged_flips: {}", flips.join(","))?;
        }
    }
    Ok(())
}

pub fn auth(g: &Globals, a: AuthArgs) -> CliResult<()> {
    let s = &g.settings;
    let stores = s.list(a.stores, "store")?;
    let dataset: PathBuf = s.require(a.dataset, "dataset")?;
    let condition: String = s.require(a.condition, "condition")?;
    let m = s.get(a.m, "m", 16)?;
    let rounds = s.get(a.rounds, "rounds", 1)?;
    let n_ag = s.get(a.n_ag, "n-ag", 0)?;
    let hash = hash_of(s.opt(a.hash, "hash")?)?;
    let arch = s.get(a.arch, "arch", ArchArg(Architecture::B)).map(|a| a.0)?;
    let mutual = s.switch(a.mutual, "mutual")?;
    let impostor = s.switch(a.impostor, "impostor")?;
    let transcript_path: Option<PathBuf> = s.opt(a.transcript, "transcript")?;
    s.finish()?;
    if stores.is_empty() {
        return Err(CliError::Usage("at least one --store is required".into()));
    }
    if mutual && arch != Architecture::B {
        return Err(CliError::Usage("--mutual needs architecture b".into()));
    }
    if n_ag > 0 && (arch != Architecture::B || mutual || stores.len() != 1 || rounds != 1) {
        return Err(CliError::Usage("--n-ag needs architecture b, one store, one round, unilateral".into()));
    }

    let mut simpufs = stores.iter().map(load_store).collect::<CliResult<Vec<_>>>()?;
    let k = simpufs[0].k();
    if simpufs.iter().any(|sp| sp.k() != k || sp.space() != simpufs[0].space()) {
        return Err(CliError::Usage("stores disagree on k or challenge space".into()));
    }
    let cfg = TrialConfig::new(k, m)?
        .with_refs(simpufs.len())?
        .with_rounds(rounds)?
        .with_n_ag(n_ag)?
        .with_hash(hash);

    let ds = read_dataset(&dataset)?;
    ds.condition_index(&condition)?;
    let ds = if impostor { shuffled(&ds, g.seed ^ 0x1a7e)? } else { ds };
    let puf = Arc::new(PhysicalPuf::new(PufTruth::Measured(Arc::new(ds))));
    let mut w = open_out(g.out.as_deref())?;

    if n_ag > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let seed = ChallengeSeed(rng.next_u64());
        let mut device = ProverDevice::new_b(puf, k, &condition, g.seed.wrapping_add(1))?.with_hash(hash);
        let Message::ProverDigestWithNonce(digest, nonce) = device.prover_respond_b(seed)? else {
            unreachable!("architecture B answers with a digest and nonce")
        };
        let sp = &mut simpufs[0];
        let challenges = sp.session_challenges(Some(seed))?;
        let out = detection_update_search(sp, &challenges, &digest, &nonce, &cfg)?;
        report(&mut *w, &out, &simpufs)?;
        w.flush()?;
        return if out.is_success() { Ok(()) } else { Err(CliError::Rejected) };
    }

    let mut device = match arch {
        Architecture::A => {
            let list = expand_challenge(ChallengeSeed(g.seed), k, simpufs[0].space())?;
            for sp in &mut simpufs {
                sp.set_policy(ChallengePolicy::Fixed(list.clone()))?;
            }
            ProverDevice::new_a(puf, list, &condition, g.seed.wrapping_add(1))?
        }
        Architecture::B => ProverDevice::new_b(puf, k, &condition, g.seed.wrapping_add(1))?,
    }
    .with_hash(hash);
    let mut server = Server::new(simpufs, arch, g.seed)?;
    let mut transport = InProcessTransport::new();
    let r = if mutual {
        run_mutual(&mut server, &mut device, &cfg, &mut transport)?
    } else {
        run_unilateral(&mut server, &mut device, &cfg, &mut transport)?
    };
    report(&mut *w, &r.outcome, server.simpufs())?;
    if let Some(p) = r.prover_accept {
        writeln!(w, "server_verdict: {}", if r.outcome.is_success() { "accept" } else { "reject" })?;
        writeln!(w, "prover_verdict: {}", if p { "accept" } else { "reject" })?;
    }
    if let Some(why) = &r.transcript.abort {
        writeln!(w, "abort: {why}")?;
    }
    w.flush()?;
    if let Some(p) = transcript_path {
        std::fs::write(&p, r.transcript.to_hex_log()).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    if r.outcome.is_success() && r.prover_accept != Some(false) {
        Ok(())
    } else {
        Err(CliError::Rejected)
    }
}

fn parties(pop: &ConfidencePopulation, arch: Architecture, k: usize, seed: u64) -> CliResult<(Server, ProverDevice)> {
    let puf = PhysicalPuf::from_population(pop);
    let mut sp = simpuf::puf::simpuf_enroll(
        simpuf::puf::EnrollmentSource::Population(pop),
        pop.reference(),
        simpuf::puf::EnrollKind::Conf,
        k,
        ChallengePolicy::Seeded,
    )?;
    let device = match arch {
        Architecture::A => {
            let list = expand_challenge(ChallengeSeed(seed), k, sp.space())?;
            sp.set_policy(ChallengePolicy::Fixed(list.clone()))?;
            ProverDevice::new_a(puf, list, pop.reference(), seed ^ 1)?
        }
        Architecture::B => ProverDevice::new_b(puf, k, pop.reference(), seed ^ 1)?,
    };
    Ok((Server::new(vec![sp], arch, seed)?, device))
}

pub fn attack(g: &Globals, a: AttackArgs) -> CliResult<()> {
    let s = &g.settings;
    let k = s.get(a.k, "k", 56)?;
    let m = s.get(a.m, "m", 8)?;
    let replays = s.get(a.replays, "replays", 1000)?;
    let sessions = s.get(a.sessions, "sessions", 10_000)?;
    s.finish()?;
    let cfg = TrialConfig::new(k, m)?;
    let pop = synthesize_confidence_population(1 << 16, 0.0, 1.0, g.seed)?;
    let foreign = synthesize_confidence_population(1 << 16, 0.0, 1.0, g.seed.wrapping_add(1))?;

    let mut w = open_out(g.out.as_deref())?;
    writeln!(w, "attack,architecture,sessions,accepted")?;
    for arch in [Architecture::A, Architecture::B] {
        let (mut server, mut device) = parties(&pop, arch, k, g.seed)?;
        let rec = run_unilateral(&mut server, &mut device, &cfg, &mut InProcessTransport::new())?;
        if !rec.outcome.is_success() {
            return Err(CliError::Usage("the honest session to record was rejected".into()));
        }
        let mut accepted = 0;
        for _ in 0..replays {
            accepted += adversary_replay(&rec.transcript, &mut server, &cfg)?.is_success() as u64;
        }
        writeln!(w, "replay,{},{replays},{accepted}", arch_name(arch))?;
        server.force_from_transcript(&rec.transcript);
        let forced = adversary_replay(&rec.transcript, &mut server, &cfg)?.is_success() as u64;
        writeln!(w, "replay-forced,{},1,{forced}", arch_name(arch))?;
    }
    let (mut server, _) = parties(&pop, Architecture::B, k, g.seed)?;
    let mut stranger = ProverDevice::new_b(PhysicalPuf::from_population(&foreign), k, foreign.reference(), g.seed ^ 2)?;
    let hits = adversary_impostor(&mut stranger, &mut server, &cfg, sessions)?;
    writeln!(w, "impostor,B,{sessions},{hits}")?;
    w.flush()?;
    Ok(())
}

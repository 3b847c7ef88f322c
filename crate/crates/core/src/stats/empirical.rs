use std::io::Write;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::auth::{pattern_positions, TrialConfig};
use crate::error::{Error, Result};
use crate::protocol::{run_unilateral, Architecture, InProcessTransport, ProverDevice, RoundInput, Server};
use crate::puf::{simpuf_enroll, ChallengePolicy, EnrollKind, EnrollmentSource, PhysicalPuf, PufTruth, SimPuf};

/// How a session decides acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrrEngine {
    /// Full protocol run with the hash search.
    #[default]
    Hashed,
    /// Same session randomness, accepting iff every mismatch lies among the
    /// `m` least-confident positions of some reference.
    Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalFrr {
    pub rate: f64,
    pub std_err: f64,
    pub rejected: u64,
    pub sessions: u64,
}

/// Enrolled references plus the honest device for empirical runs.
#[derive(Debug, Clone)]
pub struct EmpiricalSetup {
    simpufs: Arc<Vec<SimPuf>>,
    puf: Arc<PhysicalPuf>,
    condition: String,
}

impl EmpiricalSetup {
    /// Enrolls one seeded SimPUF per reference condition; the device runs at
    /// `condition`.
    pub fn new(source: EnrollmentSource<'_>, references: &[&str], condition: &str, k: usize) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::Invalid("need at least one reference condition".into()));
        }
        let (kind, puf) = match source {
            EnrollmentSource::Population(pop) => (EnrollKind::Conf, PhysicalPuf::from_population(pop)),
            EnrollmentSource::Dataset(ds) => (
                EnrollKind::Ropuf,
                PhysicalPuf::new(PufTruth::Measured(Arc::new(ds.clone()))),
            ),
        };
        let simpufs = references
            .iter()
            .map(|r| simpuf_enroll(source, r, kind, k, ChallengePolicy::Seeded))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            simpufs: Arc::new(simpufs),
            puf: Arc::new(puf),
            condition: condition.to_string(),
        })
    }

    pub fn simpufs(&self) -> &[SimPuf] {
        &self.simpufs
    }

    fn parties(&self, seed: u64) -> Result<(Server, ProverDevice)> {
        let k = self.simpufs[0].k();
        let server = Server::new(Arc::clone(&self.simpufs), Architecture::B, seed)?;
        let device = ProverDevice::new_b(Arc::clone(&self.puf), k, &self.condition, seed ^ 0x5eed)?;
        Ok((server, device))
    }

    fn verdict_session(&self, seed: u64, cfg: &TrialConfig) -> Result<bool> {
        let (mut server, mut device) = self.parties(seed)?;
        let template = &self.simpufs[0];
        for _ in 0..cfg.rounds {
            let RoundInput::Seed(s) = server.next_input() else {
                unreachable!("architecture B issues seeds")
            };
            device.prover_respond_b(s)?;
            let observed = device.last_response().expect("device just responded");
            let challenges = template.session_challenges(Some(s))?;
            for sp in self.simpufs.iter() {
                let (e, conf) = sp.query_vector(&challenges)?;
                let allowed = pattern_positions(&conf, cfg.m);
                if e.mismatches(observed).iter().all(|p| allowed.contains(p)) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn hashed_session(&self, seed: u64, cfg: &TrialConfig) -> Result<bool> {
        let (mut server, mut device) = self.parties(seed)?;
        let r = run_unilateral(&mut server, &mut device, cfg, &mut InProcessTransport::new())?;
        if let Some(why) = r.transcript.abort {
            return Err(Error::Protocol(why));
        }
        Ok(r.outcome.is_success())
    }

    /// Acceptance flag of each of `sessions` sessions. Session `i` draws its
    /// randomness from stream `i` of `seed`, so engines and thread counts
    /// agree session by session.
    pub fn session_outcomes(&self, cfg: &TrialConfig, sessions: u64, seed: u64, engine: FrrEngine) -> Result<Vec<bool>> {
        if cfg.refs != self.simpufs.len() {
            return Err(Error::Invalid(format!(
                "configuration expects {} references, {} enrolled",
                cfg.refs,
                self.simpufs.len()
            )));
        }
        let inner = cfg.clone().with_parallel(1);
        (0..sessions)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let s = rng.next_u64();
                match engine {
                    FrrEngine::Hashed => self.hashed_session(s, &inner),
                    FrrEngine::Verdict => self.verdict_session(s, &inner),
                }
            })
            .collect()
    }
}

/// Fraction of `sessions` honest sessions that end in rejection.
pub fn frr_empirical(setup: &EmpiricalSetup, cfg: &TrialConfig, sessions: u64, seed: u64, engine: FrrEngine) -> Result<EmpiricalFrr> {
    if sessions == 0 {
        return Err(Error::Invalid("need at least one session".into()));
    }
    let rejected = setup
        .session_outcomes(cfg, sessions, seed, engine)?
        .iter()
        .filter(|ok| !**ok)
        .count() as u64;
    let rate = rejected as f64 / sessions as f64;
    Ok(EmpiricalFrr {
        rate,
        std_err: (rate * (1.0 - rate) / sessions as f64).sqrt(),
        rejected,
        sessions,
    })
}

/// One line of an experiment results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub condition: String,
    pub m: usize,
    pub refs: usize,
    pub rounds: usize,
    pub frr_empirical: Option<f64>,
    pub frr_statistical: f64,
    pub far: f64,
    pub n_worst: u64,
    pub t_s_seconds: f64,
}

pub const RESULTS_HEADER: [&str; 9] = [
    "condition",
    "m",
    "M",
    "d",
    "frr_empirical",
    "frr_statistical",
    "far",
    "n_worst",
    "t_s_seconds",
];

/// Writes `rows` as CSV; a missing empirical value is an empty field.
pub fn write_results_csv<W: Write>(rows: &[ResultRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(RESULTS_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.condition.clone(),
            r.m.to_string(),
            r.refs.to_string(),
            r.rounds.to_string(),
            r.frr_empirical.map_or(String::new(), |v| format!("{v:e}")),
            format!("{:e}", r.frr_statistical),
            format!("{:e}", r.far),
            r.n_worst.to_string(),
            format!("{:e}", r.t_s_seconds),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize_confidence_population, NoiseSpec};

    #[test]
    fn noiseless_device_is_never_rejected() {
        let pop = synthesize_confidence_population(10_000, 0.0, 1.0, 1)
            .unwrap()
            .with_condition("dev", NoiseSpec::new(0.0, 0.0).unwrap());
        let setup = EmpiricalSetup::new(EnrollmentSource::Population(&pop), &["ref"], "dev", 64).unwrap();
        let cfg = TrialConfig::new(64, 0).unwrap();
        for engine in [FrrEngine::Hashed, FrrEngine::Verdict] {
            let r = frr_empirical(&setup, &cfg, 200, 3, engine).unwrap();
            assert_eq!((r.rate, r.rejected), (0.0, 0));
        }
        assert!(frr_empirical(&setup, &cfg, 0, 3, FrrEngine::Verdict).is_err());
        assert!(frr_empirical(&setup, &cfg.with_refs(2).unwrap(), 5, 3, FrrEngine::Verdict).is_err());
    }

    #[test]
    fn results_layout() {
        let row = ResultRow {
            condition: "dev".into(),
            m: 12,
            refs: 1,
            rounds: 1,
            frr_empirical: None,
            frr_statistical: 0.9,
            far: 1.0e-15,
            n_worst: 4096,
            t_s_seconds: 2.5e-7,
        };
        let mut buf = Vec::new();
        write_results_csv(&[row], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "condition,m,M,d,frr_empirical,frr_statistical,far,n_worst,t_s_seconds\ndev,12,1,1,,9e-1,1e-15,4096,2.5e-7\n"
        );
    }
}

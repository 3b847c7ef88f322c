use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simpuf::auth::{worst_case_trials, TrialConfig};
use simpuf::dataset::{extract_reliability_params, synthesize_confidence_population, NoiseSpec};
use simpuf::puf::{bit_of, expand_challenge, ChallengeSeed, ChallengeSpace, EnrollmentSource};
use simpuf::stats::{
    far as far_single, far_md, frr_empirical, frr_md, frr_statistical_sweep, server_latency, write_results_csv,
    EmpiricalSetup, FrrEngine, ResultRow,
};

use super::latency_models;
use crate::error::{CliError, CliResult};
use crate::io::{open_out, read_dataset};
use crate::settings::IntList;
use crate::{FarArgs, FrrArgs, FrrStatArgs, Globals};

#[derive(Debug, Clone, Copy)]
pub struct EngineArg(pub FrrEngine);

impl FromStr for EngineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hashed" => Ok(EngineArg(FrrEngine::Hashed)),
            "verdict" => Ok(EngineArg(FrrEngine::Verdict)),
            _ => Err(format!("unknown engine `{s}` (hashed, verdict)")),
        }
    }
}

/// Noise ratios of the measured-corner table.
pub const TABLE_LAMBDA1: [f64; 9] = [0.3672, 0.1933, 0.0239, 0.0728, 0.0700, 0.0795, 0.0881, 0.2151, 0.3231];
pub const TABLE_LAMBDA2: f64 = -0.3477;

fn m_values(list: Option<IntList>, k: usize) -> CliResult<Vec<usize>> {
    let ms = list.map_or_else(|| (12..=26).step_by(2).collect(), |l| l.0);
    if let Some(m) = ms.iter().find(|m| **m > k) {
        return Err(CliError::Usage(format!("m = {m} exceeds k = {k}")));
    }
    Ok(ms)
}

/// One device condition of a sweep: statistical inputs per reference.
struct Corner {
    label: String,
    lambdas: Vec<(f64, f64)>,
}

pub fn frr(g: &Globals, a: FrrArgs) -> CliResult<()> {
    let s = &g.settings;
    let dataset: Option<PathBuf> = s.opt(a.dataset, "dataset")?;
    let refs_arg = s.list(a.references, "reference")?;
    let conds_arg = s.list(a.conditions, "condition")?;
    let lambda1 = s.list(a.lambda1, "lambda1")?;
    let lambda2 = s.get(a.lambda2, "lambda2", TABLE_LAMBDA2)?;
    let bits = s.get(a.bits, "bits", 1 << 20)?;
    let k = s.get(a.k, "k", 64)?;
    let ms = m_values(s.opt(a.m, "m")?, k)?;
    let ds_list = s.get(a.rounds, "rounds", IntList(vec![1]))?.0;
    let sessions = s.get(a.sessions, "sessions", 1000)?;
    let samples = s.get(a.samples, "samples", 1000)?;
    let engine = s.get(a.engine, "engine", EngineArg(FrrEngine::Verdict))?.0;
    let n_stat = s.get(a.stat_challenges, "stat-challenges", 20_000)?;
    let models = latency_models(g, a.latency)?;
    s.finish()?;

    let mut rows = Vec::new();
    let mut push_rows = |setup: Option<&EmpiricalSetup>, corner: &Corner, refs: usize, tau: f64| -> CliResult<()> {
        let per_ref = corner
            .lambdas
            .iter()
            .map(|&(l1, l2)| frr_statistical_sweep(k, &ms, l1, l2, samples, g.seed))
            .collect::<Result<Vec<_>, _>>()?;
        for (mi, &m) in ms.iter().enumerate() {
            let single: Vec<f64> = per_ref.iter().map(|v| v[mi].mean).collect();
            for &d in &ds_list {
                let cfg = TrialConfig::new(k, m)?.with_refs(refs)?.with_rounds(d)?;
                let emp = match setup {
                    Some(st) if sessions > 0 => Some(frr_empirical(st, &cfg, sessions, g.seed, engine)?.rate),
                    _ => None,
                };
                let n_worst = worst_case_trials(&cfg)?;
                rows.push(ResultRow {
                    condition: corner.label.clone(),
                    m,
                    refs,
                    rounds: d,
                    frr_empirical: emp,
                    frr_statistical: frr_md(&single, d),
                    far: far_md(far_single(k, m, tau)?, refs, d),
                    n_worst,
                    t_s_seconds: server_latency(n_worst, k, &models[0]),
                });
            }
        }
        Ok(())
    };

    match dataset {
        Some(path) => {
            let ds = read_dataset(&path)?;
            let refs: Vec<String> = if refs_arg.is_empty() { vec![ds.conditions()[0].label.clone()] } else { refs_arg };
            let conds: Vec<String> = if conds_arg.is_empty() {
                ds.conditions().iter().map(|c| c.label.clone()).filter(|c| !refs.contains(c)).collect()
            } else {
                conds_arg
            };
            let space = ChallengeSpace::RoPairs { n_ros: ds.n_ros() };
            let count = (n_stat.max(2) as u128).min(space.size()) as usize;
            let challenges = expand_challenge(ChallengeSeed(g.seed), count, space)?;
            let ref_names: Vec<&str> = refs.iter().map(String::as_str).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            for c in &conds {
                let params = refs
                    .iter()
                    .map(|r| extract_reliability_params(&ds, r, c, &challenges, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?;
                let corner = Corner { label: c.clone(), lambdas: params.iter().map(|p| (p.lambda1, p.lambda2)).collect() };
                let setup = if sessions > 0 {
                    Some(EmpiricalSetup::new(EnrollmentSource::Dataset(&ds), &ref_names, c, k)?)
                } else {
                    None
                };
                push_rows(setup.as_ref(), &corner, refs.len(), params[0].bias_tau)?;
            }
        }
        None => {
            if !refs_arg.is_empty() || !conds_arg.is_empty() {
                return Err(CliError::Usage("--reference/--condition need --dataset".into()));
            }
            let lambda1 = if lambda1.is_empty() { vec![TABLE_LAMBDA1[0]] } else { lambda1 };
            let mut pop = synthesize_confidence_population(bits, lambda2, 1.0, g.seed)?;
            let labels: Vec<String> = lambda1.iter().map(|l| format!("lambda1={l}")).collect();
            for (label, &l1) in labels.iter().zip(&lambda1) {
                pop = pop.with_condition(label.clone(), NoiseSpec::new(0.0, l1)?);
            }
            let tau = pop.enroll_conf().iter().filter(|c| bit_of(**c)).count() as f64 / bits as f64;
            for (label, &l1) in labels.iter().zip(&lambda1) {
                let setup = if sessions > 0 {
                    Some(EmpiricalSetup::new(EnrollmentSource::Population(&pop), &[pop.reference()], label, k)?)
                } else {
                    None
                };
                let corner = Corner { label: label.clone(), lambdas: vec![(l1, lambda2)] };
                push_rows(setup.as_ref(), &corner, 1, tau)?;
            }
        }
    }
    let mut w = open_out(g.out.as_deref())?;
    write_results_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn frr_stat(g: &Globals, a: FrrStatArgs) -> CliResult<()> {
    let s = &g.settings;
    let mut lambda1 = s.list(a.lambda1, "lambda1")?;
    if lambda1.is_empty() {
        lambda1 = TABLE_LAMBDA1.to_vec();
    }
    let lambda2 = s.get(a.lambda2, "lambda2", TABLE_LAMBDA2)?;
    let k = s.get(a.k, "k", 64)?;
    let ms = m_values(s.opt(a.m, "m")?, k)?;
    let samples = s.get(a.samples, "samples", 1000)?;
    s.finish()?;
    let mut w = open_out(g.out.as_deref())?;
    writeln!(w, "lambda1,lambda2,k,m,frr_statistical,std_err")?;
    for l1 in lambda1 {
        let est = frr_statistical_sweep(k, &ms, l1, lambda2, samples, g.seed)?;
        for (m, e) in ms.iter().zip(est) {
            writeln!(w, "{l1},{lambda2},{k},{m},{:e},{:e}", e.mean, e.std_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn far(g: &Globals, a: FarArgs) -> CliResult<()> {
    let s = &g.settings;
    let k = s.get(a.k, "k", 64)?;
    let ms = s.get(a.m, "m", IntList(vec![16]))?.0;
    let refs = s.get(a.refs, "refs", 1)?;
    let rounds = s.get(a.rounds, "rounds", 1)?;
    let tau = s.get(a.tau, "tau", 0.5)?;
    s.finish()?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(CliError::Usage(format!("tau = {tau} is not a probability")));
    }
    if refs == 0 || rounds == 0 {
        return Err(CliError::Usage("--refs and --rounds must be at least 1".into()));
    }
    let mut w = open_out(g.out.as_deref())?;
    writeln!(w, "k,m,M,d,tau,far")?;
    for m in ms {
        let f = far_md(far_single(k, m, tau)?, refs, rounds);
        writeln!(w, "{k},{m},{refs},{rounds},{tau},{f:e}")?;
    }
    w.flush()?;
    Ok(())
}

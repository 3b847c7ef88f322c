use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simpuf::dataset::{
    bit_error_rate, emit_ro_dataset, extract_reliability_params, synthesize_ro_dataset, ConditionSynth,
    OperatingCondition, RoSynthParams,
};
use simpuf::puf::{expand_challenge, simpuf_enroll, ChallengePolicy, ChallengeSeed, EnrollKind, EnrollmentSource};

use crate::error::{CliError, CliResult};
use crate::io::{open_out, read_dataset};
use crate::{EnrollArgs, Globals, IngestArgs, SynthArgs};

/// `label:voltage:temperature:shift:sigma_noise`.
#[derive(Debug, Clone)]
pub struct CondSpec(pub ConditionSynth);

impl FromStr for CondSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts: Vec<&str> = s.rsplitn(5, ':').collect();
        if parts.len() != 5 {
            return Err(format!("`{s}`: expected label:voltage:temperature:shift:sigma_noise"));
        }
        parts.reverse();
        let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let condition = OperatingCondition::new(parts[0], num(parts[1])?, num(parts[2])?).map_err(|e| e.to_string())?;
        Ok(CondSpec(ConditionSynth {
            condition,
            delta_shift: num(parts[3])?,
            sigma_noise: num(parts[4])?,
        }))
    }
}

/// The nine measured corners with their pairwise noise widths.
const DEFAULT_CONDITIONS: [(&str, f64, f64, f64); 9] = [
    ("1.20V_25C", 1.20, 25.0, 0.0523),
    ("0.96V_25C", 0.96, 25.0, 0.8006),
    ("1.08V_25C", 1.08, 25.0, 0.4248),
    ("1.20V_35C", 1.20, 35.0, 0.1627),
    ("1.20V_45C", 1.20, 45.0, 0.1569),
    ("1.20V_55C", 1.20, 55.0, 0.1741),
    ("1.20V_65C", 1.20, 65.0, 0.1933),
    ("1.32V_25C", 1.32, 25.0, 0.4729),
    ("1.44V_25C", 1.44, 25.0, 0.7182),
];

fn default_conditions() -> Vec<ConditionSynth> {
    DEFAULT_CONDITIONS
        .iter()
        .map(|&(label, v, t, sigma)| ConditionSynth {
            condition: OperatingCondition::new(label, v, t).expect("valid default"),
            delta_shift: 0.0,
            sigma_noise: sigma,
        })
        .collect()
}

pub fn synth(g: &Globals, a: SynthArgs) -> CliResult<()> {
    let s = &g.settings;
    let mut conditions: Vec<ConditionSynth> = s.list(a.conditions, "condition")?.into_iter().map(|c| c.0).collect();
    if conditions.is_empty() {
        conditions = default_conditions();
    }
    let params = RoSynthParams {
        n_ros: s.get(a.n_ros, "n-ros", 512)?,
        f0: s.get(a.f0, "f0", 200.0)?,
        sigma_process: s.get(a.sigma_process, "sigma-process", 1.556)?,
        conditions,
        repeats: s.get(a.repeats, "repeats", 10)?,
        seed: g.seed,
    };
    s.finish()?;
    let ds = synthesize_ro_dataset(&params)?;
    let mut w = open_out(g.out.as_deref())?;
    emit_ro_dataset(&ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn ingest(g: &Globals, a: IngestArgs) -> CliResult<()> {
    let path: PathBuf = g.settings.require(a.dataset, "dataset")?;
    g.settings.finish()?;
    let ds = read_dataset(&path)?;
    let mut w = open_out(g.out.as_deref())?;
    writeln!(w, "condition,voltage_v,temperature_c,n_ros,repeats,mean_freq_mhz")?;
    for (c, cond) in ds.conditions().iter().enumerate() {
        let mean = (0..ds.n_ros()).map(|ro| ds.mean_freq(c, ro)).sum::<f64>() / ds.n_ros() as f64;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            cond.label,
            cond.voltage,
            cond.temperature,
            ds.n_ros(),
            ds.repeats(),
            mean
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum KindArg {
    Ropuf,
    KSum,
}

impl FromStr for KindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ropuf" | "ro" => Ok(KindArg::Ropuf),
            "ksum" | "k-sum" | "lapuf" => Ok(KindArg::KSum),
            _ => Err(format!("unknown kind `{s}` (ropuf, ksum)")),
        }
    }
}

/// Store file name for the `i`-th reference.
pub fn store_name(i: usize, label: &str) -> String {
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    format!("ref{i}_{clean}.simpuf")
}

pub fn enroll(g: &Globals, a: EnrollArgs) -> CliResult<()> {
    let s = &g.settings;
    let path: PathBuf = s.require(a.dataset, "dataset")?;
    let refs = s.list(a.references, "reference")?;
    let kind = s.get(a.kind, "kind", KindArg::Ropuf)?;
    let k = s.get(a.k, "k", 64)?;
    let n_stat = s.get(a.stat_challenges, "stat-challenges", 20_000)?;
    s.finish()?;
    let ds = read_dataset(&path)?;

    let mut labels: Vec<String> = Vec::new();
    for r in refs {
        if labels.contains(&r) {
            eprintln!("warning: duplicate reference `{r}` ignored");
        } else {
            labels.push(r);
        }
    }
    if labels.is_empty() {
        labels.push(ds.conditions()[0].label.clone());
    }
    let enroll_kind = match kind {
        KindArg::Ropuf => EnrollKind::Ropuf,
        KindArg::KSum => EnrollKind::KSum,
    };
    let simpufs = labels
        .iter()
        .map(|r| simpuf_enroll(EnrollmentSource::Dataset(&ds), r, enroll_kind, k, ChallengePolicy::Seeded))
        .collect::<Result<Vec<_>, _>>()?;
    if n_stat < 2 {
        return Err(CliError::Usage("--stat-challenges must be at least 2".into()));
    }
    let space = simpufs[0].space();
    let count = (n_stat as u128).min(space.size()) as usize;
    let challenges = expand_challenge(ChallengeSeed(g.seed), count, space)?;

    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("stores"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (i, sp) in simpufs.iter().enumerate() {
        let p = dir.join(store_name(i, sp.condition()));
        std::fs::write(&p, sp.to_store_bytes()?).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    let mut w = open_out(Some(&dir.join("manifest.csv")))?;
    writeln!(w, "reference,condition,lambda1,lambda2,sigma_inter,sigma_intra,bias_tau,ber")?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    for r in &labels {
        for c in ds.conditions() {
            let p = extract_reliability_params(&ds, r, &c.label, &challenges, &mut rng)?;
            let ber = bit_error_rate(&ds, r, &c.label, &challenges, &mut rng)?;
            writeln!(
                w,
                "{r},{},{},{},{},{},{},{}",
                c.label, p.lambda1, p.lambda2, p.sigma_inter, p.sigma_intra, p.bias_tau, ber
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

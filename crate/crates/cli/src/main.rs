use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmd;
mod error;
mod io;
mod settings;

use error::{CliError, CliResult};
use settings::{IntList, Settings};

#[derive(Parser, Debug)]
#[command(name = "simpuf", version, about = "Simulatable-PUF authentication experiments")]
pub struct Cli {
    /// Seed for every randomised step (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (directory for `enroll`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` file; keys are the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Refuse to run a randomised command without an explicit seed.
    #[arg(long, global = true)]
    pub strict_seed: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesise a ring-oscillator dataset.
    ///
    /// CSV columns: condition,voltage_v,temperature_c,ro_index,repeat_index,freq_mhz
    Synth(SynthArgs),
    /// Validate a dataset file and summarise it.
    ///
    /// CSV columns: condition,voltage_v,temperature_c,n_ros,repeats,mean_freq_mhz
    Ingest(IngestArgs),
    /// Enroll one SimPUF store per reference condition plus a manifest.
    ///
    /// manifest.csv columns: reference,condition,lambda1,lambda2,sigma_inter,sigma_intra,bias_tau,ber
    Enroll(EnrollArgs),
    /// Run one authentication session against enrolled stores.
    Auth(AuthArgs),
    /// Empirical and statistical FRR sweep.
    ///
    /// CSV columns: condition,m,M,d,frr_empirical,frr_statistical,far,n_worst,t_s_seconds
    Frr(FrrArgs),
    /// Statistical FRR table.
    ///
    /// CSV columns: lambda1,lambda2,k,m,frr_statistical,std_err
    FrrStat(FrrStatArgs),
    /// False-acceptance rate table.
    ///
    /// CSV columns: k,m,M,d,tau,far
    Far(FarArgs),
    /// Hash throughput of this machine and the server latency model.
    ///
    /// CSV columns: log2_n_worst,n_worst,k,hash_speed_mib_s,gpu_cores,cpu_cores,t_s_seconds
    Bench(BenchArgs),
    /// Replay and impostor batteries.
    ///
    /// CSV columns: attack,architecture,sessions,accepted
    Attack(AttackArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_ros: Option<usize>,
    /// Nominal frequency (MHz).
    #[arg(long)]
    pub f0: Option<f64>,
    /// Process variation of one RO (MHz).
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_process: Option<f64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// `label:voltage:temperature:shift:sigma_noise`, repeatable.
    #[arg(long = "condition", allow_hyphen_values = true)]
    pub conditions: Vec<cmd::data::CondSpec>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnrollArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Reference condition label, repeatable (default: first in the dataset).
    #[arg(long = "reference")]
    pub references: Vec<String>,
    /// `ropuf` or `ksum`.
    #[arg(long)]
    pub kind: Option<cmd::data::KindArg>,
    /// Response length.
    #[arg(long)]
    pub k: Option<usize>,
    /// Challenges used for the manifest statistics.
    #[arg(long)]
    pub stat_challenges: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AuthArgs {
    /// Store file, repeatable; one per reference.
    #[arg(long = "store")]
    pub stores: Vec<PathBuf>,
    /// Dataset the device replays its measurements from.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Operating condition of the device.
    #[arg(long)]
    pub condition: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Rounds `d`.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Reliable bits the server may flip (detection-update search).
    #[arg(long)]
    pub n_ag: Option<usize>,
    /// `blake2s256` or `sha256`.
    #[arg(long)]
    pub hash: Option<String>,
    /// `a` (fixed challenges, nonce) or `b` (seeded challenges).
    #[arg(long)]
    pub arch: Option<cmd::auth::ArchArg>,
    #[arg(long)]
    pub mutual: bool,
    /// Use a device the server never enrolled.
    #[arg(long)]
    pub impostor: bool,
    /// Write the session as a hex log.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FrrArgs {
    /// Measured dataset; without it a confidence population is synthesised.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long = "reference")]
    pub references: Vec<String>,
    /// Device condition, repeatable.
    #[arg(long = "condition")]
    pub conditions: Vec<String>,
    /// Population noise ratios, one device condition each.
    #[arg(long = "lambda1", value_delimiter = ',')]
    pub lambda1: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Population size.
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<IntList>,
    #[arg(long)]
    pub rounds: Option<IntList>,
    /// Protocol sessions per row; 0 skips the empirical column.
    #[arg(long)]
    pub sessions: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `hashed` or `verdict`.
    #[arg(long)]
    pub engine: Option<cmd::rates::EngineArg>,
    #[arg(long)]
    pub stat_challenges: Option<usize>,
    #[command(flatten)]
    pub latency: LatencyArgs,
}

#[derive(Args, Debug)]
pub struct FrrStatArgs {
    #[arg(long = "lambda1", value_delimiter = ',')]
    pub lambda1: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<IntList>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FarArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<IntList>,
    /// References `M`.
    #[arg(long)]
    pub refs: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Probability of a `1` bit.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Args, Debug)]
pub struct LatencyArgs {
    /// Hash throughput of one core (MiB/s).
    #[arg(long)]
    pub hash_speed_mib: Option<f64>,
    #[arg(long)]
    pub gpu_cores: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub cpu_cores: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Tolerance used for the throughput measurement (2^m trials).
    #[arg(long)]
    pub bench_m: Option<usize>,
    #[arg(long)]
    pub hash: Option<String>,
    /// Skip the throughput measurement.
    #[arg(long)]
    pub no_measure: bool,
    #[command(flatten)]
    pub latency: LatencyArgs,
}

#[derive(Args, Debug)]
pub struct AttackArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Replays per architecture.
    #[arg(long)]
    pub replays: Option<u64>,
    /// Impostor sessions.
    #[arg(long)]
    pub sessions: Option<u64>,
}

/// Resolved global options.
pub struct Globals {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub settings: Settings,
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let seed = settings.opt(cli.seed, "seed")?;
    let strict = settings.switch(cli.strict_seed, "strict-seed")?;
    let out = settings.opt(cli.out, "out")?;
    if let Some(jobs) = settings.opt(cli.jobs, "jobs")? {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let randomised = !matches!(cli.command, Command::Ingest(_) | Command::Far(_) | Command::Bench(_));
    if strict && randomised && seed.is_none() {
        return Err(CliError::Usage("--strict-seed requires --seed".into()));
    }
    let g = Globals { seed: seed.unwrap_or(0), out, settings };
    match cli.command {
        Command::Synth(a) => cmd::data::synth(&g, a),
        Command::Ingest(a) => cmd::data::ingest(&g, a),
        Command::Enroll(a) => cmd::data::enroll(&g, a),
        Command::Auth(a) => cmd::auth::auth(&g, a),
        Command::Frr(a) => cmd::rates::frr(&g, a),
        Command::FrrStat(a) => cmd::rates::frr_stat(&g, a),
        Command::Far(a) => cmd::rates::far(&g, a),
        Command::Bench(a) => cmd::bench::bench(&g, a),
        Command::Attack(a) => cmd::auth::attack(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Rejected) => ExitCode::from(1),
        Err(e) => {
            eprintln!("simpuf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simpuf::auth::{trial_search, Digest, Nonce, TrialConfig};
use simpuf::puf::{ConfidenceVector, ResponseBits};
use simpuf::stats::{server_latency, MIB};

use super::{hash_of, latency_models};
use crate::error::CliResult;
use crate::io::open_out;
use crate::{BenchArgs, Globals};

pub fn bench(g: &Globals, a: BenchArgs) -> CliResult<()> {
    let s = &g.settings;
    let k = s.get(a.k, "k", 128)?;
    let bench_m = s.get(a.bench_m, "bench-m", 18)?;
    let hash = hash_of(s.opt(a.hash, "hash")?)?;
    let no_measure = s.switch(a.no_measure, "no-measure")?;
    let models = latency_models(g, a.latency)?;
    s.finish()?;

    if !no_measure {
        // a digest nothing matches forces the full 2^m search
        let cfg = TrialConfig::new(k, bench_m)?.with_hash(hash);
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let e = ResponseBits::new((0..k).map(|_| rng.gen()).collect())?;
        let conf = ConfidenceVector::new((0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
        let start = Instant::now();
        let out = trial_search(&e, &conf, &Digest([0xa5; 32]), &Nonce::default(), &cfg)?;
        let secs = start.elapsed().as_secs_f64().max(1e-9);
        eprintln!(
            "measured: {} {}-bit {} trials in {secs:.3} s = {:.3e} trials/s",
            out.trials_used,
            k,
            hash.name(),
            out.trials_used as f64 / secs
        );
    }

    let mut w = open_out(g.out.as_deref())?;
    writeln!(w, "log2_n_worst,n_worst,k,hash_speed_mib_s,gpu_cores,cpu_cores,t_s_seconds")?;
    for model in &models {
        for log2 in 20..=33u32 {
            let n = 1u64 << log2;
            writeln!(
                w,
                "{log2},{n},{k},{},{},{},{:e}",
                model.hash_speed / MIB,
                model.n_gpu_cores,
                model.n_cpu_cores,
                server_latency(n, k, model)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

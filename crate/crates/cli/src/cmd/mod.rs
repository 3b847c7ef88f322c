pub mod auth;
pub mod bench;
pub mod data;
pub mod rates;

use crate::error::{CliError, CliResult};
use simpuf::auth::HashId;
use simpuf::stats::{LatencyModel, MIB};

pub(crate) fn hash_of(name: Option<String>) -> CliResult<HashId> {
    match name {
        None => Ok(HashId::default()),
        Some(n) => HashId::from_name(&n).map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Latency models for each requested CPU-core count.
pub(crate) fn latency_models(g: &crate::Globals, a: crate::LatencyArgs) -> CliResult<Vec<LatencyModel<f64>>> {
    let s = &g.settings;
    let speed = s.get(a.hash_speed_mib, "hash-speed-mib", 648.0)?;
    let gpu = s.get(a.gpu_cores, "gpu-cores", 1920)?;
    let mut cpus = s.list(a.cpu_cores, "cpu-cores")?;
    if cpus.is_empty() {
        cpus.push(1);
    }
    cpus.into_iter()
        .map(|c| Ok(LatencyModel::new(speed * MIB, gpu, c)?))
        .collect()
}

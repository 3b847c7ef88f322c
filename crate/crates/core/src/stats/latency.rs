use crate::error::{Error, Result};
use crate::scalar::Real;

/// Server hardware parameters for the trial-and-error latency estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyModel<T = f64> {
    /// Hash throughput of one core, bytes per second.
    pub hash_speed: T,
    pub n_gpu_cores: usize,
    pub n_cpu_cores: usize,
}

/// One mebibyte in bytes.
pub const MIB: f64 = 1024.0 * 1024.0;

impl<T: Real> LatencyModel<T> {
    pub fn new(hash_speed: T, n_gpu_cores: usize, n_cpu_cores: usize) -> Result<Self> {
        if !(hash_speed > T::zero()) || n_gpu_cores == 0 || n_cpu_cores == 0 {
            return Err(Error::Invalid(
                "latency model parameters must be strictly positive".into(),
            ));
        }
        Ok(Self {
            hash_speed,
            n_gpu_cores,
            n_cpu_cores,
        })
    }

    /// BLAKE2s at 648 MiB/s on 1920 GPU cores with one CPU core.
    pub fn reference() -> Self {
        Self {
            hash_speed: T::lit(648.0 * MIB),
            n_gpu_cores: 1920,
            n_cpu_cores: 1,
        }
    }
}

/// Seconds needed to hash `n_worst` candidate `k`-bit responses.
pub fn server_latency<T: Real>(n_worst: u64, k: usize, model: &LatencyModel<T>) -> T {
    let bytes = T::from_u64(n_worst).expect("u64 fits") * T::count(k) / T::lit(8.0);
    bytes / model.hash_speed / T::count(model.n_gpu_cores) / T::count(model.n_cpu_cores)
}

//! Closed-form and Monte-Carlo reliability statistics.

mod bch;
mod empirical;
mod frr;
mod latency;
mod normal;
mod perr;
mod poisson_binomial;

pub use bch::{bch_failure_rate, binomial_upper_tail, BchCode};
pub use empirical::{
    frr_empirical, write_results_csv, EmpiricalFrr, EmpiricalSetup, FrrEngine, ResultRow,
    RESULTS_HEADER,
};
pub use frr::{
    brute_force_prob, far, far_d, far_md, far_mr, frr_d, frr_from_samples, frr_md, frr_mr,
    frr_of_sample, frr_statistical, frr_statistical_sweep, sample_perr_batch, FrrEstimate,
    DEFAULT_FRR_SAMPLES,
};
pub use latency::{server_latency, LatencyModel, MIB};
pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use perr::{cdf_pe, cdf_perr, invert_cdf_perr, sample_perr, PerrVector};
pub use poisson_binomial::{poisson_binomial_cdf, poisson_binomial_pmf};

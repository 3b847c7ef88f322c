//! PUF models: server-side SimPUFs and noisy physical devices.

mod challenge;
mod fit;
mod lfsr;
mod physical;
mod response;
mod simpuf;

pub use challenge::{ropuf_crp_count, Challenge, ChallengeSeed, ChallengeSpace, CrpMode};
pub use fit::{fit_lapuf_model, fit_lapuf_model_with, FitOptions, LapufFit};
pub use lfsr::{expand_challenge, Lfsr64};
pub use physical::{physical_evaluate, physical_evaluate_vector, PhysicalPuf, PufTruth};
pub use response::{bit_of, ConfidenceVector, ResponseBits};
pub use simpuf::{
    ksum_confidence, simpuf_enroll, ChallengePolicy, EnrollKind, EnrollmentSource, Query, SimPuf,
    SimPufKind,
};

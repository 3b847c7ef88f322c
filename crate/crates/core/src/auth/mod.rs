//! Server-side trial-and-error authentication.

mod augmented;
mod config;
mod detect;
mod owf;
mod trial;

pub use augmented::{augmented_authenticate, Prover, RoundResponse};
pub use config::{worst_case_trials, AuthOutcome, AuthState, MatchedPattern, TrialConfig};
pub use detect::{detection_search, detection_update_search, detection_worst_case_trials};
pub use owf::{owf, owf_input, Digest, HashId, Nonce, DIGEST_LEN, NONCE_LEN};
pub use trial::{pattern_positions, sort_unreliable, trial_response, trial_search};

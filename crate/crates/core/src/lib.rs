pub mod auth;
pub mod dataset;
pub mod error;
pub mod protocol;
pub mod puf;
pub mod scalar;
pub mod stats;

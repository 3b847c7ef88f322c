//! Ring-oscillator measurement datasets, confidence populations and the
//! reliability parameters extracted from them.

mod csv_io;
mod extract;
mod population;
mod ro;

pub use csv_io::{emit_ro_dataset, ingest_ro_dataset, CSV_HEADER};
pub use extract::{
    bit_error_rate, extract_reliability_params, MeasurementSource, ReliabilityParams,
};
pub use population::{synthesize_confidence_population, ConfidencePopulation, NoiseSpec};
pub use ro::{synthesize_ro_dataset, ConditionSynth, OperatingCondition, RoDataset, RoSynthParams};

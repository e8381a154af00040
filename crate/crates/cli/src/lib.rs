//! Experiment configs, presets and the runner behind the `zklab` binary.

pub mod config;
pub mod error;
pub mod manifest;
pub mod presets;
pub mod run;

pub use config::{Experiment, ExperimentConfig, Kind, OneOrMany, Parameters};
pub use error::{CliError, Result};
pub use manifest::{Artifact, Manifest, ManifestEntry, MANIFEST_NAME};
pub use presets::{preset, PRESETS};
pub use run::{run, RunOptions, RunReport};

/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "ZKLAB_THREADS";

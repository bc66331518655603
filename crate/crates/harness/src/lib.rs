//! Experiment harness for clustered LTI identification: scenario
//! generation, Monte-Carlo sweeps over `(width, N, T)`, CSV and SVG
//! reporting, and the validation suite behind `lticlust validate`.

pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod scenario;
pub mod sweep;
pub mod validation;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use report::{emit_csv, read_csv, write_csv, CSV_HEADER};
pub use scenario::{generate_scenario, ClusterScenario};
pub use sweep::{run_sweep, ResultRow};

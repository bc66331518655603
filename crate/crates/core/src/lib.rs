//! Identification of clusters of partially observed linear time-invariant
//! systems.
//!
//! The pipeline has four stages, each in its own module:
//!
//! 1. [`estimation`]: least-squares estimates of the first `L + 1` Markov
//!    parameters from one or many input/output trajectories.
//! 2. [`clustering`]: k-means over flattened Markov blocks.
//! 3. pooled re-estimation over every trajectory assigned to a cluster.
//! 4. [`realization`]: Ho-Kalman recovery of a balanced state-space model.
//!
//! [`pipeline`] strings the stages together; [`lti`] holds the model types,
//! the simulator and the model-intrinsic quantities (Markov parameters,
//! impulse-response distance, Gramian-like series, Hankel matrices).

pub mod clustering;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod lti;
pub mod pipeline;
pub mod realization;
pub mod rng;

pub use clustering::{kmeans, match_clusters, ClusterMatching, ClusteringResult, KMeansOptions};
pub use error::{Error, Result, Stage};
pub use estimation::{
    build_output_matrix, build_toeplitz_input, ls_markov, ls_markov_fit, min_singular_certificate,
    page_partition, sample_complexity_bound, DataMatrices, LeastSquaresFit, PagePartition,
};
pub use lti::{
    gramian_gamma_inf, gramian_gamma_obs, hankel_from_markov, impulse_response_distance,
    impulse_response_distance_with, markov_parameters, random_nilpotent_model,
    random_stable_model, simulate, Horizon, MarkovBlock, NoiseSpec, RandomModelSpec,
    StateSpaceModel, TrajectoryData,
};
pub use pipeline::{run_algorithm1, PipelineConfig, PipelineDiagnostics, PipelineOutput};
pub use realization::{ho_kalman, realization_error, RealizationReport};

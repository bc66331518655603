use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Stage of the clustered identification pipeline, attached to errors that
/// escape from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    SystemEstimation,
    Clustering,
    ClusterEstimation,
    Realization,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::SystemEstimation => "per-system estimation",
            Stage::Clustering => "clustering",
            Stage::ClusterEstimation => "cluster estimation",
            Stage::Realization => "realization",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("model is not strictly stable (spectral radius {spectral_radius:.6})")]
    Unstable { spectral_radius: f64 },

    #[error("ill-conditioned regression data (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("page partition is empty: {samples} samples per trajectory cannot fill stride {stride}")]
    PartitionEmpty { samples: usize, stride: usize },

    #[error("degenerate clustering input: {distinct} distinct points for {k} clusters")]
    DegenerateInput { distinct: usize, k: usize },

    #[error("Hankel matrix does not support order {order} (sigma_n / sigma_1 = {ratio:.3e})")]
    RankDeficient { order: usize, ratio: f64 },

    #[error("cluster {cluster} has no trajectory longer than {required} samples")]
    InsufficientLength { cluster: usize, required: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

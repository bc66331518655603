//! Clustered identification end to end:
//!
//! 1. estimate `[G_0 .. G_L1]` for every trajectory on its own;
//! 2. k-means on the flattened estimates;
//! 3. re-estimate `[G_0 .. G_L2]` per cluster, pooling that cluster's
//!    sufficiently long trajectories;
//! 4. Ho-Kalman realization of order `n` per cluster.
//!
//! Systems whose trajectories are too short for step 3 still take part in
//! clustering and inherit their cluster's model.

use rayon::prelude::*;

use crate::clustering::{kmeans, ClusteringResult, KMeansOptions};
use crate::error::{Error, Result, Stage};
use crate::estimation::ls_markov_fit;
use crate::lti::{MarkovBlock, StateSpaceModel, TrajectoryData};
use crate::realization::{ho_kalman, RealizationReport};
use crate::rng::derive_seed;

/// Cap on the default first-stage horizon.
pub const DEFAULT_L1_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    /// System order `n`.
    pub order: usize,
    /// Number of clusters `K`.
    pub clusters: usize,
    /// First-stage horizon `L1`.
    pub l1: usize,
    /// Refinement horizon `L2`, at least `2n + 1`.
    pub l2: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(order: usize, clusters: usize, l1: usize, l2: usize, seed: u64) -> Self {
        Self {
            order,
            clusters,
            l1,
            l2,
            restarts: 20,
            max_iter: 300,
            seed,
        }
    }

    /// Minimum trajectory length for pooling at horizon `L2`: enough columns
    /// for a single trajectory to span the `m(L2+1)`-dimensional regressor.
    pub fn pooling_threshold(&self, input_dim: usize) -> usize {
        self.l2 + input_dim * (self.l2 + 1)
    }
}

/// `min_i floor(T_i / m)`, capped at [`DEFAULT_L1_CAP`] and kept within
/// `1..=min_i T_i - 1`.
pub fn default_l1(trajs: &[TrajectoryData]) -> Option<usize> {
    let m = trajs.first()?.input_dim();
    let shortest = trajs.iter().map(TrajectoryData::len).min()?;
    if shortest < 2 {
        return None;
    }
    Some((shortest / m).min(DEFAULT_L1_CAP).min(shortest - 1).max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineDiagnostics {
    /// Condition number of each system's input matrix at horizon `L1`.
    pub system_condition: Vec<f64>,
    /// Condition number of each cluster's pooled input matrix at `L2`.
    pub cluster_condition: Vec<f64>,
    /// Smallest singular value of each cluster's pooled input matrix.
    pub cluster_min_sv: Vec<f64>,
    /// Trajectories pooled into each cluster's estimate.
    pub pooled: Vec<Vec<usize>>,
    /// `None` when labels were supplied instead of clustered.
    pub kmeans_sse: Option<f64>,
    pub restarts_used: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub assignments: Vec<usize>,
    pub per_system_markov: Vec<MarkovBlock>,
    pub cluster_markov: Vec<MarkovBlock>,
    pub cluster_models: Vec<RealizationReport>,
    pub diagnostics: PipelineDiagnostics,
}

impl PipelineOutput {
    /// The identified model of system `i`: its cluster's realization.
    pub fn system_model(&self, i: usize) -> &StateSpaceModel {
        &self.cluster_models[self.assignments[i]].model
    }
}

fn validate(trajs: &[TrajectoryData], cfg: &PipelineConfig) -> Result<()> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trajectories".into()))?;
    if trajs
        .iter()
        .any(|t| t.input_dim() != first.input_dim() || t.output_dim() != first.output_dim())
    {
        return Err(Error::InvalidArgument("trajectories have different signal dimensions".into()));
    }
    if cfg.clusters == 0 {
        return Err(Error::InvalidArgument("need at least one cluster".into()));
    }
    if cfg.order == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let shortest = trajs.iter().map(TrajectoryData::len).min().unwrap_or(0);
    if cfg.l1 == 0 || cfg.l1 + 1 > shortest {
        return Err(Error::Horizon(format!(
            "L1 = {} must lie in 1..={} for the shortest trajectory",
            cfg.l1,
            shortest.saturating_sub(1)
        )));
    }
    if cfg.l2 < 2 * cfg.order + 1 {
        return Err(Error::Horizon(format!(
            "L2 = {} must be at least 2n + 1 = {}",
            cfg.l2,
            2 * cfg.order + 1
        )));
    }
    Ok(())
}

/// Runs all four stages.
pub fn run_algorithm1(trajs: &[TrajectoryData], cfg: &PipelineConfig) -> Result<PipelineOutput> {
    validate(trajs, cfg)?;
    let fits = trajs
        .par_iter()
        .map(|t| ls_markov_fit([t], cfg.l1))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::SystemEstimation))?;
    let points: Vec<Vec<f64>> = fits.iter().map(|f| f.markov.to_flat()).collect();
    let opts = KMeansOptions {
        k: cfg.clusters,
        restarts: cfg.restarts,
        max_iter: cfg.max_iter,
        seed: derive_seed(cfg.seed, "kmeans", 0),
    };
    let clustering = kmeans(&points, &opts).map_err(|e| e.at(Stage::Clustering))?;
    let system_condition = fits.iter().map(|f| f.condition()).collect();
    let per_system_markov = fits.into_iter().map(|f| f.markov).collect();
    refine(trajs, cfg, per_system_markov, system_condition, Some(clustering))
}

/// Stages 3 and 4 with caller-supplied cluster labels (`0..K`). Stage 1 is
/// still run so the output has the same shape as [`run_algorithm1`].
pub fn run_with_labels(trajs: &[TrajectoryData], labels: &[usize], cfg: &PipelineConfig) -> Result<PipelineOutput> {
    validate(trajs, cfg)?;
    if labels.len() != trajs.len() || labels.iter().any(|&l| l >= cfg.clusters) {
        return Err(Error::InvalidArgument("labels do not match trajectories and K".into()));
    }
    let fits = trajs
        .par_iter()
        .map(|t| ls_markov_fit([t], cfg.l1))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::SystemEstimation))?;
    let system_condition = fits.iter().map(|f| f.condition()).collect();
    let per_system_markov = fits.into_iter().map(|f| f.markov).collect();
    let clustering = ClusteringResult {
        assignments: labels.to_vec(),
        centroids: Vec::new(),
        sse: f64::NAN,
        restarts_used: 0,
        restart_sse: Vec::new(),
    };
    let mut out = refine(trajs, cfg, per_system_markov, system_condition, Some(clustering))?;
    out.diagnostics.kmeans_sse = None;
    Ok(out)
}

fn refine(
    trajs: &[TrajectoryData],
    cfg: &PipelineConfig,
    per_system_markov: Vec<MarkovBlock>,
    system_condition: Vec<f64>,
    clustering: Option<ClusteringResult>,
) -> Result<PipelineOutput> {
    let clustering = clustering.expect("labels available");
    let assignments = clustering.assignments;
    let threshold = cfg.pooling_threshold(trajs[0].input_dim());
    let pooled: Vec<Vec<usize>> = (0..cfg.clusters)
        .map(|k| {
            (0..trajs.len())
                .filter(|&i| assignments[i] == k && trajs[i].len() >= threshold)
                .collect()
        })
        .collect();
    if let Some(k) = pooled.iter().position(Vec::is_empty) {
        return Err(Error::InsufficientLength {
            cluster: k,
            required: threshold,
        }
        .at(Stage::ClusterEstimation));
    }
    let per_cluster = pooled
        .par_iter()
        .map(|members| {
            let fit = ls_markov_fit(members.iter().map(|&i| &trajs[i]), cfg.l2)
                .map_err(|e| e.at(Stage::ClusterEstimation))?;
            let report = ho_kalman(&fit.markov, cfg.order).map_err(|e| e.at(Stage::Realization))?;
            Ok((fit, report))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cluster_markov = Vec::with_capacity(cfg.clusters);
    let mut cluster_models = Vec::with_capacity(cfg.clusters);
    let mut cluster_condition = Vec::with_capacity(cfg.clusters);
    let mut cluster_min_sv = Vec::with_capacity(cfg.clusters);
    for (fit, report) in per_cluster {
        cluster_condition.push(fit.condition());
        cluster_min_sv.push(fit.min_singular_value());
        cluster_markov.push(fit.markov);
        cluster_models.push(report);
    }
    Ok(PipelineOutput {
        assignments,
        per_system_markov,
        cluster_markov,
        cluster_models,
        diagnostics: PipelineDiagnostics {
            system_condition,
            cluster_condition,
            cluster_min_sv,
            pooled,
            kmeans_sse: Some(clustering.sse),
            restarts_used: clustering.restarts_used,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{random_stable_model, simulate, NoiseSpec};

    fn trajectories(models: &[StateSpaceModel], per: usize, len: usize, seed: u64) -> Vec<TrajectoryData> {
        let noise = NoiseSpec::new(1.0, 0.15, 0.2).unwrap();
        let mut out = Vec::new();
        for (k, m) in models.iter().enumerate() {
            for j in 0..per {
                out.push(simulate(m, len, &noise, derive_seed(seed, "t", (k * per + j) as u64)).unwrap());
            }
        }
        out
    }

    #[test]
    fn single_cluster_is_pooled_estimation() {
        let model = random_stable_model(2, 1, 1, (0.6, 0.9), 1).unwrap();
        let trajs = trajectories(&[model], 4, 80, 3);
        let cfg = PipelineConfig::new(2, 1, 3, 5, 0);
        let out = run_algorithm1(&trajs, &cfg).unwrap();
        let pooled = crate::estimation::ls_markov(&trajs, 5).unwrap();
        assert_eq!(out.cluster_markov[0], pooled);
        assert_eq!(out.assignments, vec![0; 4]);
    }

    #[test]
    fn horizons_are_validated() {
        let model = random_stable_model(2, 1, 1, (0.6, 0.9), 1).unwrap();
        let trajs = trajectories(&[model], 2, 30, 3);
        assert!(run_algorithm1(&trajs, &PipelineConfig::new(2, 1, 0, 5, 0)).is_err());
        assert!(run_algorithm1(&trajs, &PipelineConfig::new(2, 1, 30, 5, 0)).is_err());
        assert!(matches!(
            run_algorithm1(&trajs, &PipelineConfig::new(2, 1, 3, 4, 0)),
            Err(Error::Horizon(_))
        ));
    }

    #[test]
    fn short_clusters_are_named() {
        let model = random_stable_model(2, 1, 1, (0.6, 0.9), 1).unwrap();
        let trajs = trajectories(&[model], 3, 10, 3);
        let err = run_algorithm1(&trajs, &PipelineConfig::new(2, 1, 3, 5, 0)).unwrap_err();
        assert!(matches!(
            err.root(),
            Error::InsufficientLength { cluster: 0, required: 11 }
        ));
        assert!(err.to_string().starts_with("cluster estimation"));
    }

    #[test]
    fn default_l1_rule() {
        let model = random_stable_model(2, 1, 1, (0.6, 0.9), 1).unwrap();
        assert_eq!(default_l1(&trajectories(&[model.clone()], 1, 5, 0)), Some(4));
        assert_eq!(default_l1(&trajectories(&[model], 1, 100, 0)), Some(8));
        assert_eq!(default_l1(&[]), None);
    }
}

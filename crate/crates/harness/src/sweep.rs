//! Monte-Carlo sweeps over `(width, N, T)` grids.

use std::time::Instant;

use lticlust::clustering::best_assignment;
use lticlust::rng::derive_seed;
use lticlust::{
    markov_parameters, match_clusters, realization_error, run_algorithm1, simulate, PipelineConfig,
    PipelineOutput,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::scenario::{generate_scenario, ClusterScenario};

/// Outcome of one trial in one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub trial: usize,
    pub clusters: usize,
    pub per_cluster: usize,
    pub len: usize,
    pub l1: usize,
    pub l2: usize,
    pub width: f64,
    pub clustering_accuracy: f64,
    /// Mean over clusters of `||G_hat^(L) - G^(L)||_F` after the
    /// error-minimizing matching of estimated clusters to centers.
    pub avg_markov_error: f64,
    /// Mean impulse-response distance (horizon `L2`) between each center and
    /// its matched realization.
    pub avg_realization_error: f64,
    pub kmeans_sse: f64,
    /// Smallest singular value over the clusters' pooled input matrices.
    pub min_sv_u: f64,
    pub runtime_ms: u64,
    /// Set when the trial failed; metrics are then NaN.
    pub error: Option<String>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// One `(width, N, T)` grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub width: f64,
    pub per_cluster: usize,
    pub len: usize,
}

/// Grid cells in emission order: width, then N, then T.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &width in &config.width_grid {
        for &per_cluster in &config.n_grid {
            for &len in &config.t_grid {
                out.push(Cell {
                    index: out.len(),
                    width,
                    per_cluster,
                    len,
                });
            }
        }
    }
    out
}

/// Runs every cell and trial. Jobs may run on any number of threads; rows
/// come back in grid order (cell, then trial) and depend only on the config.
///
/// Per-trial failures are recorded in the row, not returned.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let jobs: Vec<(Cell, usize)> = cells(config)
        .into_iter()
        .flat_map(|cell| (0..config.trials).map(move |trial| (cell, trial)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(cell, trial)| run_trial(config, &cell, trial))
        .collect())
}

/// A trial's scenario depends on the trial index and width only, so cells
/// that differ in `N` or `T` share their centers.
pub fn scenario_seed(config: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(config.seed, "scenario", trial as u64)
}

fn trial_seed(config: &ExperimentConfig, cell: &Cell, trial: usize) -> u64 {
    derive_seed(derive_seed(config.seed, "cell", cell.index as u64), "trial", trial as u64)
}

pub fn run_trial(config: &ExperimentConfig, cell: &Cell, trial: usize) -> ResultRow {
    let started = Instant::now();
    let mut row = ResultRow {
        trial,
        clusters: config.clusters,
        per_cluster: cell.per_cluster,
        len: cell.len,
        l1: config.l1,
        l2: config.l2,
        width: cell.width,
        clustering_accuracy: f64::NAN,
        avg_markov_error: f64::NAN,
        avg_realization_error: f64::NAN,
        kmeans_sse: f64::NAN,
        min_sv_u: f64::NAN,
        runtime_ms: 0,
        error: None,
    };
    match evaluate(config, cell, trial) {
        Ok(metrics) => {
            row.clustering_accuracy = metrics.accuracy;
            row.avg_markov_error = metrics.markov_error;
            row.avg_realization_error = metrics.realization_error;
            row.kmeans_sse = metrics.sse;
            row.min_sv_u = metrics.min_sv;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if config.record_runtime {
        row.runtime_ms = started.elapsed().as_millis() as u64;
    }
    row
}

struct TrialMetrics {
    accuracy: f64,
    markov_error: f64,
    realization_error: f64,
    sse: f64,
    min_sv: f64,
}

fn evaluate(config: &ExperimentConfig, cell: &Cell, trial: usize) -> Result<TrialMetrics> {
    let scenario = generate_scenario(config, cell.per_cluster, cell.width, scenario_seed(config, trial))?;
    let seed = trial_seed(config, cell, trial);
    let trajs = scenario
        .system_models
        .iter()
        .enumerate()
        .map(|(i, model)| simulate(model, cell.len, &config.noise, derive_seed(seed, "system", i as u64)))
        .collect::<lticlust::Result<Vec<_>>>()?;
    let pipeline = PipelineConfig {
        order: config.order,
        clusters: config.clusters,
        l1: config.l1,
        l2: config.l2,
        restarts: config.restarts,
        max_iter: config.max_iter,
        seed: derive_seed(seed, "pipeline", 0),
    };
    let out = run_algorithm1(&trajs, &pipeline)?;
    score(config, &scenario, &out)
}

/// Metrics of one pipeline run against its scenario.
fn score(config: &ExperimentConfig, scenario: &ClusterScenario, out: &PipelineOutput) -> Result<TrialMetrics> {
    let k = config.clusters;
    let accuracy = match_clusters(&out.assignments, &scenario.truth, k)?.accuracy;

    let horizon = config.metric_horizon;
    let truths: Vec<_> = scenario
        .centers
        .iter()
        .map(|c| markov_parameters(c, horizon))
        .collect();
    let estimates = out
        .cluster_markov
        .iter()
        .map(|g| g.truncated(horizon))
        .collect::<lticlust::Result<Vec<_>>>()?;
    let mut cost = vec![vec![0.0; k]; k];
    for (t, truth) in truths.iter().enumerate() {
        for (e, est) in estimates.iter().enumerate() {
            cost[t][e] = est.frobenius_distance(truth)?;
        }
    }
    // center t is matched to estimated cluster matching[t]
    let matching = if k <= 8 {
        best_assignment(k, |t, e| cost[t][e], false)
    } else {
        greedy_min(&cost)
    };
    let markov_error = (0..k).map(|t| cost[t][matching[t]]).sum::<f64>() / k as f64;
    let mut realization_total = 0.0;
    for (t, center) in scenario.centers.iter().enumerate() {
        realization_total += realization_error(center, &out.cluster_models[matching[t]].model, config.l2)?;
    }
    Ok(TrialMetrics {
        accuracy,
        markov_error,
        realization_error: realization_total / k as f64,
        sse: out.diagnostics.kmeans_sse.unwrap_or(f64::NAN),
        min_sv: out
            .diagnostics
            .cluster_min_sv
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
    })
}

fn greedy_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut out = vec![usize::MAX; k];
    let mut used = vec![false; k];
    for _ in 0..k {
        let mut best = (f64::INFINITY, 0, 0);
        for t in (0..k).filter(|&t| out[t] == usize::MAX) {
            for e in (0..k).filter(|&e| !used[e]) {
                if cost[t][e] < best.0 || best.0.is_infinite() {
                    best = (cost[t][e], t, e);
                }
            }
        }
        out[best.1] = best.2;
        used[best.2] = true;
    }
    out
}

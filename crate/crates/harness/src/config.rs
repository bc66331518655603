//! Sweep configuration, read from a flat JSON file.
//!
//! Every field is required except `metric_horizon` (4), `restarts` (20),
//! `max_iter` (300), `zero_d` (false), `include_d_in_distance` (true),
//! `record_runtime` (true) and `out_dir` (`"results"`).

use std::fs;
use std::path::{Path, PathBuf};

use lticlust::{NoiseSpec, RandomModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of clusters.
    #[serde(rename = "K")]
    pub clusters: usize,
    /// Trajectories per cluster for `generate`.
    #[serde(rename = "N")]
    pub per_cluster: usize,
    /// State dimension.
    #[serde(rename = "n")]
    pub order: usize,
    #[serde(rename = "m")]
    pub input_dim: usize,
    #[serde(rename = "p")]
    pub output_dim: usize,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<usize>,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<usize>,
    #[serde(rename = "L1")]
    pub l1: usize,
    #[serde(rename = "L2")]
    pub l2: usize,
    /// Markov parameters `G_0..G_L` compared in `avg_markov_error`.
    #[serde(default = "default_metric_horizon")]
    pub metric_horizon: usize,
    pub rho_range: (f64, f64),
    pub noise: NoiseSpec,
    pub width_grid: Vec<f64>,
    pub min_separation: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub zero_d: bool,
    #[serde(default = "default_true")]
    pub include_d_in_distance: bool,
    /// Write wall-clock trial time to `runtime_ms`; when false the column is
    /// zero and the CSV is reproducible byte for byte.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_metric_horizon() -> usize {
    4
}

fn default_restarts() -> usize {
    20
}

fn default_max_iter() -> usize {
    300
}

fn default_true() -> bool {
    true
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn model_spec(&self) -> RandomModelSpec {
        RandomModelSpec {
            state_dim: self.order,
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            rho_range: self.rho_range,
            zero_feedthrough: self.zero_d,
        }
    }

    /// Shortest trajectory that step 3 of the pipeline will pool.
    pub fn pooling_threshold(&self) -> usize {
        self.l2 + self.input_dim * (self.l2 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.clusters == 0 || self.per_cluster == 0 {
            return fail("K and N must be positive".into());
        }
        if self.order == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return fail("n, m and p must be positive".into());
        }
        if self.t_grid.is_empty() || self.n_grid.is_empty() || self.width_grid.is_empty() {
            return fail("T_grid, N_grid and width_grid must be nonempty".into());
        }
        if self.n_grid.contains(&0) {
            return fail("N_grid entries must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return fail("restarts and max_iter must be positive".into());
        }
        if self.l1 == 0 {
            return fail("L1 must be at least 1".into());
        }
        if self.l2 < 2 * self.order + 1 {
            return fail(format!("L2 = {} must be at least 2n + 1 = {}", self.l2, 2 * self.order + 1));
        }
        if self.metric_horizon > self.l2 {
            return fail(format!(
                "metric_horizon {} exceeds L2 = {}",
                self.metric_horizon, self.l2
            ));
        }
        let (lo, hi) = self.rho_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return fail(format!("rho_range must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})"));
        }
        let threshold = self.pooling_threshold().max(self.l1 + 1);
        if let Some(&t) = self.t_grid.iter().find(|&&t| t < threshold) {
            return fail(format!("T = {t} is shorter than the pooling threshold {threshold}"));
        }
        if !(self.min_separation.is_finite() && self.min_separation >= 0.0) {
            return fail("min_separation must be finite and nonnegative".into());
        }
        for &w in &self.width_grid {
            if !(w.is_finite() && w >= 0.0) {
                return fail(format!("width {w} must be finite and nonnegative"));
            }
            if self.clusters > 1 && self.min_separation <= 2.0 * w {
                return fail(format!(
                    "min_separation {} must exceed twice the width {w}",
                    self.min_separation
                ));
            }
        }
        Ok(())
    }

    /// The configuration used by the figure-style studies: three SISO
    /// clusters of order 3, spectral radii in `[0.6, 0.9]`, unit input
    /// variance and noise levels `(0.15, 0.2)`.
    pub fn reference() -> Self {
        Self {
            clusters: 3,
            per_cluster: 8,
            order: 3,
            input_dim: 1,
            output_dim: 1,
            t_grid: vec![64, 128, 256, 512],
            n_grid: vec![1, 2, 4, 8, 16],
            l1: 4,
            l2: 7,
            metric_horizon: 4,
            rho_range: (0.6, 0.9),
            noise: NoiseSpec::new(1.0, 0.15, 0.2).expect("valid noise"),
            width_grid: vec![0.0],
            min_separation: 0.5,
            trials: 20,
            seed: 2024,
            restarts: 20,
            max_iter: 300,
            zero_d: false,
            include_d_in_distance: true,
            record_runtime: true,
            out_dir: default_out_dir(),
        }
    }
}

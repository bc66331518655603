//! Clustered scenarios: `K` separated centers and per-system models within a
//! target width of their center.

use lticlust::linalg::gaussian_matrix;
use lticlust::rng::{derive_seed, rng_from_seed};
use lticlust::{impulse_response_distance_with, Horizon, StateSpaceModel};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Consecutive center rejections before the separation is declared
/// infeasible.
pub const MAX_CENTER_REJECTIONS: usize = 1000;

const WIDTH_BISECTIONS: usize = 40;

/// Relative slack on the within-cluster distance.
pub const WIDTH_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ClusterScenario {
    pub centers: Vec<StateSpaceModel>,
    pub system_models: Vec<StateSpaceModel>,
    pub truth: Vec<usize>,
    /// Minimum pairwise center distance at horizon `L1`; infinite for `K = 1`.
    pub separation: f64,
    pub width: f64,
}

fn distance(config: &ExperimentConfig, a: &StateSpaceModel, b: &StateSpaceModel) -> Result<f64> {
    Ok(impulse_response_distance_with(
        a,
        b,
        Horizon::Fixed(config.l1),
        config.include_d_in_distance,
    )?)
}

/// Draws `K` centers by rejection (each at least `min_separation` from those
/// already accepted) and `systems_per_cluster` members per center.
///
/// Members are copies of the center when `width == 0`; otherwise `B` and
/// `C` are perturbed along a random Gaussian direction whose scale is
/// bisected until the distance to the center lies in `[0.8 width, width]`.
/// Systems are ordered cluster by cluster.
pub fn generate_scenario(
    config: &ExperimentConfig,
    systems_per_cluster: usize,
    width: f64,
    seed: u64,
) -> Result<ClusterScenario> {
    if !(width.is_finite() && width >= 0.0) {
        return Err(HarnessError::Config(format!("invalid width {width}")));
    }
    if config.clusters > 1 && config.min_separation <= 2.0 * width {
        return Err(HarnessError::Config(format!(
            "min_separation {} must exceed twice the width {width}",
            config.min_separation
        )));
    }
    let spec = config.model_spec();
    let mut centers: Vec<StateSpaceModel> = Vec::with_capacity(config.clusters);
    let mut attempt = 0u64;
    let mut rejections = 0;
    let mut separation = f64::INFINITY;
    while centers.len() < config.clusters {
        let candidate = spec.sample(derive_seed(seed, "center", attempt))?;
        attempt += 1;
        let mut closest = f64::INFINITY;
        for c in &centers {
            closest = closest.min(distance(config, c, &candidate)?);
        }
        if closest < config.min_separation {
            rejections += 1;
            if rejections >= MAX_CENTER_REJECTIONS {
                return Err(HarnessError::InfeasibleSeparation {
                    attempts: rejections,
                });
            }
            continue;
        }
        rejections = 0;
        separation = separation.min(closest);
        centers.push(candidate);
    }

    let mut system_models = Vec::with_capacity(config.clusters * systems_per_cluster);
    let mut truth = Vec::with_capacity(config.clusters * systems_per_cluster);
    for (k, center) in centers.iter().enumerate() {
        for j in 0..systems_per_cluster {
            let model = if width == 0.0 {
                center.clone()
            } else {
                let s = derive_seed(seed, "member", (k * systems_per_cluster + j) as u64);
                perturb_to_width(config, center, width, s)?
            };
            system_models.push(model);
            truth.push(k);
        }
    }
    Ok(ClusterScenario {
        centers,
        system_models,
        truth,
        separation,
        width,
    })
}

fn perturb_to_width(
    config: &ExperimentConfig,
    center: &StateSpaceModel,
    width: f64,
    seed: u64,
) -> Result<StateSpaceModel> {
    let mut rng = rng_from_seed(seed);
    let dir_b = gaussian_matrix(center.state_dim(), center.input_dim(), &mut rng);
    let dir_c = gaussian_matrix(center.output_dim(), center.state_dim(), &mut rng);
    let at = |scale: f64| -> Result<(StateSpaceModel, f64)> {
        let model = StateSpaceModel::new(
            center.a().clone(),
            center.b() + &dir_b * scale,
            center.c() + &dir_c * scale,
            center.d().clone(),
        )?;
        let d = distance(config, center, &model)?;
        Ok((model, d))
    };
    let band = (0.8 * width, width);
    let mut lo = (0.0, at(0.0)?);
    let mut hi_scale = width.min(1.0) * 1e-3;
    let mut hi = at(hi_scale)?;
    while hi.1 < band.0 {
        lo = (hi_scale, hi);
        hi_scale *= 2.0;
        if hi_scale > 1e12 {
            return Err(HarnessError::Config(format!(
                "perturbation cannot reach width {width}"
            )));
        }
        hi = at(hi_scale)?;
    }
    if hi.1 <= band.1 {
        return Ok(hi.0);
    }
    let mut lo_scale = lo.0;
    for _ in 0..WIDTH_BISECTIONS {
        let mid_scale = 0.5 * (lo_scale + hi_scale);
        let mid = at(mid_scale)?;
        if mid.1 > band.1 {
            hi_scale = mid_scale;
        } else if mid.1 < band.0 {
            lo_scale = mid_scale;
            lo = (mid_scale, mid);
        } else {
            return Ok(mid.0);
        }
    }
    // Closest from below; still within the width.
    Ok(lo.1 .0)
}

#[derive(Serialize)]
struct ModelRecord {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl From<&StateSpaceModel> for ModelRecord {
    fn from(m: &StateSpaceModel) -> Self {
        ModelRecord {
            a: rows(m.a()),
            b: rows(m.b()),
            c: rows(m.c()),
            d: rows(m.d()),
        }
    }
}

#[derive(Serialize)]
struct ScenarioRecord {
    centers: Vec<ModelRecord>,
    system_models: Vec<ModelRecord>,
    truth: Vec<usize>,
    /// `null` when there is a single cluster.
    separation: Option<f64>,
    width: f64,
}

impl ClusterScenario {
    /// JSON document with every matrix written row by row.
    pub fn to_json(&self) -> String {
        let record = ScenarioRecord {
            centers: self.centers.iter().map(ModelRecord::from).collect(),
            system_models: self.system_models.iter().map(ModelRecord::from).collect(),
            truth: self.truth.clone(),
            separation: self.separation.is_finite().then_some(self.separation),
            width: self.width,
        };
        serde_json::to_string_pretty(&record).expect("scenario serializes")
    }
}

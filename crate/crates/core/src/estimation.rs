//! Least-squares estimation of Markov parameters from input/output data.
//!
//! For horizon `L`, each trajectory contributes the columns `t = L..=T` of
//!
//! ```text
//! Y_i = [y_L ... y_T]                      (p x T_f)
//! U_i = [ubar_L ... ubar_T],  ubar_t = [u_t; u_{t-1}; ...; u_{t-L}]
//! ```
//!
//! with `T_f = T - L + 1`, and the estimate is `G_hat = Y U^+` over the
//! column-wise concatenation of all trajectories.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lti::{gramian_gamma_inf, gramian_gamma_obs, MarkovBlock, NoiseSpec, StateSpaceModel, TrajectoryData};

/// Singular values of `U` below this fraction of the largest are treated as
/// zero, which makes the regression rank deficient.
pub const RANK_TOL: f64 = 1e-10;

const GRAMIAN_TOL: f64 = 1e-12;

fn check_horizon(traj: &TrajectoryData, horizon: usize) -> Result<()> {
    if horizon + 1 > traj.len() {
        return Err(Error::Horizon(format!(
            "horizon {horizon} needs a trajectory of length at least {}, got {}",
            horizon + 1,
            traj.len()
        )));
    }
    Ok(())
}

/// Block-Toeplitz input matrix, `m(L+1) x T_f`. Column `j` stacks
/// `u_{L+j}, u_{L+j-1}, ..., u_j`.
pub fn build_toeplitz_input(traj: &TrajectoryData, horizon: usize) -> Result<DMatrix<f64>> {
    check_horizon(traj, horizon)?;
    let m = traj.input_dim();
    let samples = traj.len() - horizon + 1;
    let inputs = traj.inputs();
    let mut u = DMatrix::zeros(m * (horizon + 1), samples);
    for j in 0..samples {
        for lag in 0..=horizon {
            u.view_mut((lag * m, j), (m, 1))
                .copy_from(&inputs.column(horizon + j - lag));
        }
    }
    Ok(u)
}

/// Output matrix `[y_L ... y_T]`, aligned with [`build_toeplitz_input`].
///
/// `y_0` is never observed, so the horizon must be at least 1.
pub fn build_output_matrix(traj: &TrajectoryData, horizon: usize) -> Result<DMatrix<f64>> {
    check_horizon(traj, horizon)?;
    if horizon == 0 {
        return Err(Error::Horizon(
            "horizon 0 would need the unobserved output y_0".into(),
        ));
    }
    let samples = traj.len() - horizon + 1;
    Ok(traj.outputs().columns(horizon - 1, samples).into_owned())
}

/// Stacked regression data over one or more trajectories.
#[derive(Clone, Debug)]
pub struct DataMatrices {
    y: DMatrix<f64>,
    u: DMatrix<f64>,
    horizon: usize,
    columns: Vec<Range<usize>>,
}

impl DataMatrices {
    pub fn build<'a, I>(trajs: I, horizon: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TrajectoryData>,
    {
        let trajs: Vec<&TrajectoryData> = trajs.into_iter().collect();
        let first = trajs
            .first()
            .ok_or_else(|| Error::InvalidArgument("no trajectories".into()))?;
        let (m, p) = (first.input_dim(), first.output_dim());
        if horizon == 0 {
            return Err(Error::Horizon(
                "horizon 0 would need the unobserved output y_0".into(),
            ));
        }
        for t in &trajs {
            if t.input_dim() != m || t.output_dim() != p {
                return Err(Error::InvalidArgument(
                    "trajectories have different signal dimensions".into(),
                ));
            }
            check_horizon(t, horizon)?;
        }
        let total: usize = trajs.iter().map(|t| t.len() - horizon + 1).sum();
        let mut y = DMatrix::zeros(p, total);
        let mut u = DMatrix::zeros(m * (horizon + 1), total);
        let mut columns = Vec::with_capacity(trajs.len());
        let mut offset = 0;
        for t in trajs {
            let ui = build_toeplitz_input(t, horizon)?;
            let yi = build_output_matrix(t, horizon)?;
            let width = ui.ncols();
            u.columns_mut(offset, width).copy_from(&ui);
            y.columns_mut(offset, width).copy_from(&yi);
            columns.push(offset..offset + width);
            offset += width;
        }
        Ok(Self {
            y,
            u,
            horizon,
            columns,
        })
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn trajectory_count(&self) -> usize {
        self.columns.len()
    }

    /// Column range of each trajectory, in input order.
    pub fn trajectory_columns(&self) -> &[Range<usize>] {
        &self.columns
    }

    /// `T_f`, when every trajectory has the same length.
    pub fn samples_per_trajectory(&self) -> Option<usize> {
        let first = self.columns.first()?.len();
        self.columns
            .iter()
            .all(|r| r.len() == first)
            .then_some(first)
    }

    pub fn input_dim(&self) -> usize {
        self.u.nrows() / (self.horizon + 1)
    }

    /// Page partition of the columns of `U`; requires equal trajectory lengths.
    pub fn page_partition(&self) -> Result<PagePartition> {
        let samples = self.samples_per_trajectory().ok_or_else(|| {
            Error::InvalidArgument("page partition needs equal-length trajectories".into())
        })?;
        page_partition(self.horizon, samples, self.columns.len())
    }
}

/// Outcome of a least-squares fit.
#[derive(Clone, Debug)]
pub struct LeastSquaresFit {
    pub markov: MarkovBlock,
    /// Singular values of `U`, non-increasing.
    pub singular_values: Vec<f64>,
}

impl LeastSquaresFit {
    pub fn min_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn condition(&self) -> f64 {
        let min = self.min_singular_value();
        match self.singular_values.first() {
            Some(&max) if min > 0.0 => max / min,
            _ => f64::INFINITY,
        }
    }
}

impl DataMatrices {
    /// `Y U^+` through the SVD of `U`.
    pub fn solve(&self) -> Result<LeastSquaresFit> {
        let rows = self.u.nrows();
        if self.u.ncols() < rows {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
            });
        }
        let svd = self.u.clone().svd(true, true);
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let max = sv[0];
        let min = sv[rows - 1];
        if !(max > 0.0) || min < RANK_TOL * max {
            return Err(Error::IllConditioned {
                condition: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        let left = svd.u.as_ref().expect("left singular vectors requested");
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        // Y V Sigma^-1 W' with U = W Sigma V'.
        let mut yv = &self.y * v_t.transpose();
        for (k, s) in sv.iter().enumerate() {
            yv.column_mut(k).scale_mut(1.0 / s);
        }
        let g = yv * left.transpose();
        Ok(LeastSquaresFit {
            markov: MarkovBlock::new(g, self.input_dim())?,
            singular_values: sv,
        })
    }
}

/// Least-squares estimate of `[G_0 ... G_L]` pooled over `trajs`.
pub fn ls_markov<'a, I>(trajs: I, horizon: usize) -> Result<MarkovBlock>
where
    I: IntoIterator<Item = &'a TrajectoryData>,
{
    Ok(ls_markov_fit(trajs, horizon)?.markov)
}

/// [`ls_markov`] with the singular values of the input matrix.
pub fn ls_markov_fit<'a, I>(trajs: I, horizon: usize) -> Result<LeastSquaresFit>
where
    I: IntoIterator<Item = &'a TrajectoryData>,
{
    DataMatrices::build(trajs, horizon)?.solve()
}

/// `L + 1` disjoint column sets of `U`, each a Page matrix: set `k` takes
/// columns `k, k + (L+1), ..., k + (d-1)(L+1)` of every trajectory, with
/// `d = floor(T_f / (L+1))`. Trailing remainder columns are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PagePartition {
    sets: Vec<Vec<usize>>,
}

impl PagePartition {
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn into_sets(self) -> Vec<Vec<usize>> {
        self.sets
    }
}

pub fn page_partition(horizon: usize, samples_per_trajectory: usize, trajectories: usize) -> Result<PagePartition> {
    let stride = horizon + 1;
    let per_trajectory = samples_per_trajectory / stride;
    if per_trajectory == 0 || trajectories == 0 {
        return Err(Error::PartitionEmpty {
            samples: samples_per_trajectory,
            stride,
        });
    }
    let sets = (0..stride)
        .map(|k| {
            (0..trajectories)
                .flat_map(|i| {
                    (0..per_trajectory).map(move |j| i * samples_per_trajectory + k + j * stride)
                })
                .collect()
        })
        .collect();
    Ok(PagePartition { sets })
}

/// `(sigma_min(U), sqrt(sum_k sigma_min(U_{J_k})^2))`.
///
/// For disjoint column sets `J_k`, `U U' >= sum_k U_{J_k} U_{J_k}'`, so the
/// second value is a lower bound on the first. `sigma_min` is taken over the
/// row space (zero for a submatrix with fewer columns than rows).
pub fn min_singular_certificate(u: &DMatrix<f64>, partition: &[Vec<usize>]) -> (f64, f64) {
    let full = linalg::min_row_singular_value(u);
    let bound = partition
        .iter()
        .map(|set| linalg::min_row_singular_value(&u.select_columns(set.iter())).powi(2))
        .sum::<f64>()
        .sqrt();
    (full, bound)
}

/// Right-hand side of the multi-trajectory sample condition with the
/// universal constant set to one:
///
/// ```text
/// L / (eps^2 sigma_u^2) * (p + (m+n) L + ln(N T / delta))^2 * Phi(L)
/// Phi(L) = max_k ||C_k A_k^L||^2 ||Gamma_inf(M_k)|| + sigma_w^2 ||Gamma_obs(M_k)||
/// ```
///
/// Only the relative scale is meaningful.
pub fn sample_complexity_bound(
    models: &[StateSpaceModel],
    noise: &NoiseSpec,
    horizon: usize,
    eps: f64,
    delta: f64,
    trajectories: usize,
    len: usize,
) -> Result<f64> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidArgument("no models".into()))?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if !(delta > 0.0 && delta < (-1.0f64).exp()) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1/e), got {delta}")));
    }
    if noise.sigma_u() <= 0.0 {
        return Err(Error::InvalidArgument("sigma_u must be positive".into()));
    }
    if trajectories == 0 || len == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let (m, p) = (first.input_dim(), first.output_dim());
    let mut phi: f64 = 0.0;
    let mut n = 0;
    for model in models {
        if model.input_dim() != m || model.output_dim() != p {
            return Err(Error::InvalidModel("models have different (m, p)".into()));
        }
        n = n.max(model.state_dim());
        let mut cal = model.c().clone();
        for _ in 0..horizon {
            cal = cal * model.a();
        }
        let gamma = gramian_gamma_inf(model, noise, GRAMIAN_TOL)?;
        let gamma_obs = gramian_gamma_obs(model, GRAMIAN_TOL)?;
        let value = linalg::spectral_norm(&cal).powi(2) * linalg::spectral_norm(&gamma)
            + noise.sigma_w().powi(2) * linalg::spectral_norm(&gamma_obs);
        phi = phi.max(value);
    }
    let l = horizon as f64;
    let log_term = ((trajectories as f64) * (len as f64) / delta).ln();
    let dims = p as f64 + ((m + n) as f64) * l + log_term;
    Ok(l / (eps * eps * noise.sigma_u().powi(2)) * dims * dims * phi)
}

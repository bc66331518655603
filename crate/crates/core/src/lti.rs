//! Discrete-time LTI models, trajectory simulation and model-intrinsic
//! quantities.
//!
//! A model `(C, A, B, D)` evolves as
//!
//! ```text
//! x_{t+1} = A x_t + B u_t + w1_t
//! y_t     = C x_t + D u_t + w2_t
//! ```
//!
//! from `x_0 = 0`. Its Markov parameters are `G_0 = D` and
//! `G_k = C A^{k-1} B` for `k >= 1`.

use nalgebra::{DMatrix, DMatrixView, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{rng_from_seed, stream};

/// Models with spectral radius at or above `1 - STABILITY_TOL` are treated as
/// not strictly stable.
pub const STABILITY_TOL: f64 = 1e-12;

/// Consecutive sub-tolerance terms required before an infinite series is
/// truncated. Non-normal `A` can produce transient growth after a small term.
const SERIES_HYSTERESIS: usize = 10;

/// Hard cap on the number of terms summed for an infinite series.
const SERIES_MAX_TERMS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let p = c.nrows();
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidModel(format!(
                "dimensions must be positive, got n={n}, m={m}, p={p}"
            )));
        }
        if a.ncols() != n {
            return Err(Error::InvalidModel(format!(
                "A must be square, got {}x{}",
                n,
                a.ncols()
            )));
        }
        if b.nrows() != n || c.ncols() != n || d.nrows() != p || d.ncols() != m {
            return Err(Error::InvalidModel(format!(
                "inconsistent shapes: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        let finite = [&a, &b, &c, &d]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidModel("non-finite entry".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.a)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0 - STABILITY_TOL
    }

    pub(crate) fn require_stable(&self) -> Result<()> {
        let spectral_radius = self.spectral_radius();
        if spectral_radius < 1.0 - STABILITY_TOL {
            Ok(())
        } else {
            Err(Error::Unstable { spectral_radius })
        }
    }

    /// `(C Q^-1, Q A Q^-1, Q B, D)`.
    pub fn similarity_transform(&self, q: &DMatrix<f64>) -> Result<Self> {
        let n = self.state_dim();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "similarity matrix must be {n}x{n}"
            )));
        }
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("similarity matrix is singular".into()))?;
        Self::new(
            q * &self.a * &q_inv,
            q * &self.b,
            &self.c * &q_inv,
            self.d.clone(),
        )
    }

    pub fn markov_parameters(&self, horizon: usize) -> MarkovBlock {
        markov_parameters(self, horizon)
    }
}

/// The `p x m(L+1)` matrix `[G_0 G_1 ... G_L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovBlock {
    horizon: usize,
    input_dim: usize,
    data: DMatrix<f64>,
}

impl MarkovBlock {
    pub fn new(data: DMatrix<f64>, input_dim: usize) -> Result<Self> {
        if input_dim == 0 || data.nrows() == 0 {
            return Err(Error::InvalidArgument("empty Markov block".into()));
        }
        if data.ncols() < input_dim || data.ncols() % input_dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} columns is not a positive multiple of the input dimension {input_dim}",
                data.ncols()
            )));
        }
        Ok(Self {
            horizon: data.ncols() / input_dim - 1,
            input_dim,
            data,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Block `G_k`.
    ///
    /// # Panics
    ///
    /// Panics if `k > horizon`.
    pub fn block(&self, k: usize) -> DMatrixView<'_, f64> {
        assert!(k <= self.horizon, "block {k} beyond horizon {}", self.horizon);
        self.data.columns(k * self.input_dim, self.input_dim)
    }

    /// The leading `[G_0 ... G_horizon]`.
    pub fn truncated(&self, horizon: usize) -> Result<MarkovBlock> {
        if horizon > self.horizon {
            return Err(Error::Horizon(format!(
                "cannot truncate horizon {} to {horizon}",
                self.horizon
            )));
        }
        let cols = (horizon + 1) * self.input_dim;
        MarkovBlock::new(self.data.columns(0, cols).into_owned(), self.input_dim)
    }

    /// Row-major flattening of the `p x m(L+1)` matrix.
    pub fn to_flat(&self) -> Vec<f64> {
        let (rows, cols) = self.data.shape();
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`MarkovBlock::to_flat`].
    pub fn from_flat(flat: &[f64], output_dim: usize, input_dim: usize) -> Result<MarkovBlock> {
        if output_dim == 0 || flat.len() % output_dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot fill {output_dim} rows",
                flat.len()
            )));
        }
        let cols = flat.len() / output_dim;
        MarkovBlock::new(DMatrix::from_row_slice(output_dim, cols, flat), input_dim)
    }

    pub fn frobenius_distance(&self, other: &MarkovBlock) -> Result<f64> {
        if self.data.shape() != other.data.shape() || self.input_dim != other.input_dim {
            return Err(Error::InvalidArgument(format!(
                "Markov block shapes differ: {:?} vs {:?}",
                self.data.shape(),
                other.data.shape()
            )));
        }
        Ok((&self.data - &other.data).norm())
    }

    pub fn spectral_distance(&self, other: &MarkovBlock) -> Result<f64> {
        if self.data.shape() != other.data.shape() || self.input_dim != other.input_dim {
            return Err(Error::InvalidArgument(format!(
                "Markov block shapes differ: {:?} vs {:?}",
                self.data.shape(),
                other.data.shape()
            )));
        }
        Ok(linalg::spectral_norm(&(&self.data - &other.data)))
    }
}

/// Input and output records of one trajectory: `u_0..u_T` and `y_1..y_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryData {
    inputs: DMatrix<f64>,
    outputs: DMatrix<f64>,
}

impl TrajectoryData {
    /// `inputs` is `m x (T+1)` (column `t` is `u_t`); `outputs` is `p x T`
    /// (column `t - 1` is `y_t`).
    pub fn new(inputs: DMatrix<f64>, outputs: DMatrix<f64>) -> Result<Self> {
        if outputs.ncols() == 0 {
            return Err(Error::InvalidArgument("trajectory has no outputs".into()));
        }
        if inputs.ncols() != outputs.ncols() + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} input samples for {} outputs, got {}",
                outputs.ncols() + 1,
                outputs.ncols(),
                inputs.ncols()
            )));
        }
        if inputs.nrows() == 0 || outputs.nrows() == 0 {
            return Err(Error::InvalidArgument("zero-dimensional signal".into()));
        }
        Ok(Self { inputs, outputs })
    }

    /// Trajectory length `T`.
    pub fn len(&self) -> usize {
        self.outputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.ncols() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.nrows()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DMatrix<f64> {
        &self.outputs
    }

    /// `u_t` for `t` in `0..=T`.
    pub fn input(&self, t: usize) -> DMatrixView<'_, f64> {
        self.inputs.columns(t, 1)
    }

    /// `y_t` for `t` in `1..=T`.
    pub fn output(&self, t: usize) -> DMatrixView<'_, f64> {
        assert!(t >= 1, "y_0 is not observed");
        self.outputs.columns(t - 1, 1)
    }
}

/// Standard deviations of the input, process noise and measurement noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoiseSpec", into = "RawNoiseSpec")]
pub struct NoiseSpec {
    sigma_u: f64,
    sigma_w1: f64,
    sigma_w2: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawNoiseSpec {
    sigma_u: f64,
    sigma_w1: f64,
    sigma_w2: f64,
}

impl TryFrom<RawNoiseSpec> for NoiseSpec {
    type Error = Error;

    fn try_from(raw: RawNoiseSpec) -> Result<Self> {
        NoiseSpec::new(raw.sigma_u, raw.sigma_w1, raw.sigma_w2)
    }
}

impl From<NoiseSpec> for RawNoiseSpec {
    fn from(n: NoiseSpec) -> Self {
        RawNoiseSpec {
            sigma_u: n.sigma_u,
            sigma_w1: n.sigma_w1,
            sigma_w2: n.sigma_w2,
        }
    }
}

impl NoiseSpec {
    pub fn new(sigma_u: f64, sigma_w1: f64, sigma_w2: f64) -> Result<Self> {
        for (name, v) in [("sigma_u", sigma_u), ("sigma_w1", sigma_w1), ("sigma_w2", sigma_w2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            sigma_u,
            sigma_w1,
            sigma_w2,
        })
    }

    /// Unit inputs, no noise.
    pub fn noiseless() -> Self {
        Self {
            sigma_u: 1.0,
            sigma_w1: 0.0,
            sigma_w2: 0.0,
        }
    }

    pub fn sigma_u(&self) -> f64 {
        self.sigma_u
    }

    pub fn sigma_w1(&self) -> f64 {
        self.sigma_w1
    }

    pub fn sigma_w2(&self) -> f64 {
        self.sigma_w2
    }

    /// `max(sigma_w1, sigma_w2)`.
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w1.max(self.sigma_w2)
    }
}

/// A simulated trajectory together with the hidden quantities behind it.
#[derive(Clone, Debug)]
pub struct SimulationRecord {
    pub trajectory: TrajectoryData,
    /// `x_0..x_T`, `n x (T+1)`.
    pub states: DMatrix<f64>,
    /// `w1_0..w1_{T-1}`, `n x T`.
    pub process_noise: DMatrix<f64>,
    /// `w2_1..w2_T`, `p x T`.
    pub measurement_noise: DMatrix<f64>,
}

/// Simulates `len` steps with Gaussian inputs and noise from `x_0 = 0`.
pub fn simulate(
    model: &StateSpaceModel,
    len: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<TrajectoryData> {
    if len == 0 {
        return Err(Error::InvalidArgument("trajectory length must be at least 1".into()));
    }
    let mut rng = stream(seed, "inputs", 0);
    let inputs = linalg::gaussian_matrix(model.input_dim(), len + 1, &mut rng) * noise.sigma_u();
    Ok(simulate_with_inputs(model, inputs, noise, seed)?.trajectory)
}

/// Simulates with caller-supplied inputs (`m x (T+1)`); process and
/// measurement noise are still drawn from `seed`.
pub fn simulate_with_inputs(
    model: &StateSpaceModel,
    inputs: DMatrix<f64>,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<SimulationRecord> {
    let (n, m, p) = (model.state_dim(), model.input_dim(), model.output_dim());
    if inputs.nrows() != m {
        return Err(Error::InvalidModel(format!(
            "inputs have {} rows, model expects {m}",
            inputs.nrows()
        )));
    }
    if inputs.ncols() < 2 {
        return Err(Error::InvalidArgument("trajectory length must be at least 1".into()));
    }
    let len = inputs.ncols() - 1;
    let process_noise =
        linalg::gaussian_matrix(n, len, &mut stream(seed, "process", 0)) * noise.sigma_w1();
    let measurement_noise =
        linalg::gaussian_matrix(p, len, &mut stream(seed, "measurement", 0)) * noise.sigma_w2();

    let mut states = DMatrix::zeros(n, len + 1);
    let mut outputs = DMatrix::zeros(p, len);
    let mut x = DVector::zeros(n);
    for t in 0..len {
        let next = &model.a * &x + &model.b * inputs.column(t) + process_noise.column(t);
        x = next;
        states.set_column(t + 1, &x);
        let y = &model.c * &x + &model.d * inputs.column(t + 1) + measurement_noise.column(t);
        outputs.set_column(t, &y);
    }
    Ok(SimulationRecord {
        trajectory: TrajectoryData::new(inputs, outputs)?,
        states,
        process_noise,
        measurement_noise,
    })
}

/// `[D, CB, CAB, ..., CA^{L-1}B]` by iterated multiplication.
pub fn markov_parameters(model: &StateSpaceModel, horizon: usize) -> MarkovBlock {
    let (m, p) = (model.input_dim(), model.output_dim());
    let mut data = DMatrix::zeros(p, m * (horizon + 1));
    data.columns_mut(0, m).copy_from(&model.d);
    let mut reach = model.b.clone();
    for k in 1..=horizon {
        data.columns_mut(k * m, m).copy_from(&(&model.c * &reach));
        if k < horizon {
            reach = &model.a * reach;
        }
    }
    MarkovBlock {
        horizon,
        input_dim: m,
        data,
    }
}

/// Number of Markov parameters compared by [`impulse_response_distance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// `G_0..G_L`.
    Fixed(usize),
    /// Sum until the per-term Frobenius norm stays below `tol` for ten
    /// consecutive terms. Both models must be strictly stable.
    Auto { tol: f64 },
}

/// `sqrt(sum_t ||G_t(m1) - G_t(m2)||_F^2)`, including the `G_0 = D` term.
pub fn impulse_response_distance(
    m1: &StateSpaceModel,
    m2: &StateSpaceModel,
    horizon: Horizon,
) -> Result<f64> {
    impulse_response_distance_with(m1, m2, horizon, true)
}

/// [`impulse_response_distance`] with the feedthrough term optional.
pub fn impulse_response_distance_with(
    m1: &StateSpaceModel,
    m2: &StateSpaceModel,
    horizon: Horizon,
    include_feedthrough: bool,
) -> Result<f64> {
    if m1.input_dim() != m2.input_dim() || m1.output_dim() != m2.output_dim() {
        return Err(Error::InvalidModel(format!(
            "models have different (m, p): ({}, {}) vs ({}, {})",
            m1.input_dim(),
            m1.output_dim(),
            m2.input_dim(),
            m2.output_dim()
        )));
    }
    let mut sum = if include_feedthrough {
        (&m1.d - &m2.d).norm_squared()
    } else {
        0.0
    };
    let mut reach1 = m1.b.clone();
    let mut reach2 = m2.b.clone();
    let term = |reach1: &mut DMatrix<f64>, reach2: &mut DMatrix<f64>| {
        let diff = (&m1.c * &*reach1 - &m2.c * &*reach2).norm();
        *reach1 = &m1.a * &*reach1;
        *reach2 = &m2.a * &*reach2;
        diff
    };
    match horizon {
        Horizon::Fixed(l) => {
            for _ in 1..=l {
                let t = term(&mut reach1, &mut reach2);
                sum += t * t;
            }
        }
        Horizon::Auto { tol } => {
            check_tol(tol)?;
            m1.require_stable()?;
            m2.require_stable()?;
            let mut quiet = 0;
            for _ in 0..SERIES_MAX_TERMS {
                let t = term(&mut reach1, &mut reach2);
                sum += t * t;
                if t < tol {
                    quiet += 1;
                    if quiet >= SERIES_HYSTERESIS {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
    }
    Ok(sum.sqrt())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Sums symmetric PSD terms until `SERIES_HYSTERESIS` consecutive terms
/// have spectral norm below `tol`.
fn sum_psd_series(
    dim: usize,
    tol: f64,
    mut next_term: impl FnMut() -> DMatrix<f64>,
) -> DMatrix<f64> {
    let mut total = DMatrix::zeros(dim, dim);
    let mut quiet = 0;
    for _ in 0..SERIES_MAX_TERMS {
        let term = next_term();
        let size = linalg::symmetric_norm(&term);
        total += term;
        if size < tol {
            quiet += 1;
            if quiet >= SERIES_HYSTERESIS {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    total
}

/// `sum_t sigma_u^2 A^t B (A^t B)' + sigma_w^2 A^t (A^t)'`.
pub fn gramian_gamma_inf(model: &StateSpaceModel, noise: &NoiseSpec, tol: f64) -> Result<DMatrix<f64>> {
    check_tol(tol)?;
    model.require_stable()?;
    let su2 = noise.sigma_u().powi(2);
    let sw2 = noise.sigma_w().powi(2);
    let n = model.state_dim();
    let mut reach = model.b.clone();
    let mut power = DMatrix::identity(n, n);
    Ok(sum_psd_series(n, tol, || {
        let term = &reach * reach.transpose() * su2 + &power * power.transpose() * sw2;
        reach = &model.a * &reach;
        power = &model.a * &power;
        term
    }))
}

/// `I_p + sum_t C A^t (C A^t)'`.
pub fn gramian_gamma_obs(model: &StateSpaceModel, tol: f64) -> Result<DMatrix<f64>> {
    check_tol(tol)?;
    model.require_stable()?;
    let p = model.output_dim();
    let mut observe = model.c.clone();
    let series = sum_psd_series(p, tol, || {
        let term = &observe * observe.transpose();
        observe = &observe * &model.a;
        term
    });
    Ok(DMatrix::identity(p, p) + series)
}

/// Block Hankel matrix whose block `(i, j)` is `G_{i+j+1}`.
pub fn hankel_from_markov(g: &MarkovBlock, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("Hankel matrix needs at least one block row and column".into()));
    }
    if g.horizon() + 1 < rows + cols {
        return Err(Error::Horizon(format!(
            "a {rows}x{cols} block Hankel matrix needs G_1..G_{}, block has horizon {}",
            rows + cols - 1,
            g.horizon()
        )));
    }
    let (p, m) = (g.output_dim(), g.input_dim());
    let mut h = DMatrix::zeros(p * rows, m * cols);
    for i in 0..rows {
        for j in 0..cols {
            h.view_mut((i * p, j * m), (p, m)).copy_from(&g.block(i + j + 1));
        }
    }
    Ok(h)
}

/// Parameters for [`RandomModelSpec::sample`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomModelSpec {
    pub state_dim: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub rho_range: (f64, f64),
    /// Force `D = 0` instead of drawing it.
    pub zero_feedthrough: bool,
}

impl RandomModelSpec {
    /// Gaussian `A` rescaled so its spectral radius is uniform in
    /// `rho_range`; Gaussian `B`, `C`, `D` rescaled to unit spectral norm.
    pub fn sample(&self, seed: u64) -> Result<StateSpaceModel> {
        let (lo, hi) = self.rho_range;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho_range must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})"
            )));
        }
        let (n, m, p) = (self.state_dim, self.input_dim, self.output_dim);
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidModel("dimensions must be positive".into()));
        }
        let mut rng = rng_from_seed(seed);
        let a = loop {
            let g = linalg::gaussian_matrix(n, n, &mut rng);
            let radius = linalg::spectral_radius(&g);
            if radius > f64::MIN_POSITIVE {
                let target = if hi > lo { rng.random_range(lo..hi) } else { lo };
                break g * (target / radius);
            }
        };
        let b = unit_norm_gaussian(n, m, &mut rng);
        let c = unit_norm_gaussian(p, n, &mut rng);
        let d = unit_norm_gaussian(p, m, &mut rng);
        let d = if self.zero_feedthrough { DMatrix::zeros(p, m) } else { d };
        StateSpaceModel::new(a, b, c, d)
    }
}

fn unit_norm_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = linalg::gaussian_matrix(rows, cols, rng);
        let norm = linalg::spectral_norm(&g);
        if norm > f64::MIN_POSITIVE {
            return g / norm;
        }
    }
}

/// Strictly stable random model with spectral radius uniform in `rho_range`.
pub fn random_stable_model(
    n: usize,
    m: usize,
    p: usize,
    rho_range: (f64, f64),
    seed: u64,
) -> Result<StateSpaceModel> {
    RandomModelSpec {
        state_dim: n,
        input_dim: m,
        output_dim: p,
        rho_range,
        zero_feedthrough: false,
    }
    .sample(seed)
}

/// Random model with strictly upper-triangular (nilpotent) `A`, so
/// `G_k = 0` for `k > n` and the unobserved-state residual vanishes once the
/// horizon reaches `n`. `B`, `C`, `D` have unit spectral norm.
pub fn random_nilpotent_model(n: usize, m: usize, p: usize, seed: u64) -> Result<StateSpaceModel> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidModel("dimensions must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut a = linalg::gaussian_matrix(n, n, &mut rng);
    for i in 0..n {
        for j in 0..=i {
            a[(i, j)] = 0.0;
        }
    }
    let b = unit_norm_gaussian(n, m, &mut rng);
    let c = unit_norm_gaussian(p, n, &mut rng);
    let d = unit_norm_gaussian(p, m, &mut rng);
    StateSpaceModel::new(a, b, c, d)
}

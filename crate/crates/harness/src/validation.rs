//! The acceptance suite behind `lticlust validate` and the `acceptance`
//! test target. Each check returns a [`CheckOutcome`] whose `passed` field
//! already accounts for the runtime limit.

use std::fmt;
use std::time::{Duration, Instant};

use lticlust::linalg::gaussian_matrix;
use lticlust::rng::{derive_seed, rng_from_seed};
use lticlust::{
    build_toeplitz_input, ho_kalman, kmeans, markov_parameters, match_clusters,
    min_singular_certificate, page_partition, random_nilpotent_model, run_algorithm1, simulate,
    DataMatrices, KMeansOptions, MarkovBlock, NoiseSpec, PipelineConfig, TrajectoryData,
};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{median, summarize, write_csv};
use crate::sweep::run_sweep;

/// Independent reference computations.
pub mod oracles {
    use nalgebra::DMatrix;

    /// `Y U' (U U')^{-1}` through an explicit Gram inverse.
    pub fn normal_equations(y: &DMatrix<f64>, u: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let gram = u * u.transpose();
        gram.try_inverse().map(|inv| y * u.transpose() * inv)
    }

    pub fn sse(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        points
            .iter()
            .zip(labels)
            .map(|(p, &l)| {
                p.iter()
                    .zip(&sums[l])
                    .map(|(x, s)| (x - s / counts[l] as f64).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Smallest SSE over every labeling of `points` into `k` nonempty
    /// clusters, by enumeration of all `k^n` labelings.
    pub fn exhaustive_kmeans_sse(points: &[Vec<f64>], k: usize) -> f64 {
        let n = points.len();
        let total = k.pow(n as u32);
        let mut best = f64::INFINITY;
        let mut labels = vec![0usize; n];
        for code in 0..total {
            let mut c = code;
            let mut seen = vec![false; k];
            for l in labels.iter_mut() {
                *l = c % k;
                seen[*l] = true;
                c /= k;
            }
            if seen.iter().all(|&s| s) {
                best = best.min(sse(points, &labels, k));
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    /// Property and runtime limit both met.
    pub passed: bool,
    pub property_held: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2} s, limit {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

fn timed(
    id: usize,
    name: &'static str,
    limit_secs: u64,
    check: impl FnOnce() -> Result<(bool, String)>,
) -> CheckOutcome {
    let started = Instant::now();
    let (property_held, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = started.elapsed();
    let limit = Duration::from_secs(limit_secs);
    CheckOutcome {
        id,
        name,
        passed: property_held && elapsed <= limit,
        property_held,
        detail,
        elapsed,
        limit,
    }
}

fn relative(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub const CHECK_COUNT: usize = 10;

/// Runs check `id` (1-based).
pub fn run_check(id: usize, seed: u64) -> Option<CheckOutcome> {
    Some(match id {
        1 => exact_recovery(seed),
        2 => ho_kalman_consistency(seed),
        3 => least_squares_oracle(seed),
        4 => page_certificate(seed),
        5 => error_scaling(seed),
        6 => pooling_curves(seed),
        7 => separated_clustering(seed),
        8 => width_trend(seed),
        9 => determinism(seed),
        10 => kmeans_global_optimum(seed),
        _ => return None,
    })
}

pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    (1..=CHECK_COUNT).filter_map(|id| run_check(id, seed)).collect()
}

/// Zero noise, nilpotent order-2 SISO centers, `K = 3`, `N = 4`, `T = 100`:
/// perfect clustering and pooled Markov error at most 1e-8 in 20/20 trials.
pub fn exact_recovery(seed: u64) -> CheckOutcome {
    timed(1, "exact recovery", 10, || {
        let (k, per, len, trials) = (3, 4, 100, 20);
        let noise = NoiseSpec::new(1.0, 0.0, 0.0)?;
        let results = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<(f64, f64)> {
                let ts = derive_seed(seed, "exact-recovery", trial as u64);
                let centers = (0..k)
                    .map(|c| random_nilpotent_model(2, 1, 1, derive_seed(ts, "center", c as u64)))
                    .collect::<lticlust::Result<Vec<_>>>()?;
                let truth: Vec<usize> = (0..k * per).map(|i| i / per).collect();
                let trajs = truth
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| simulate(&centers[c], len, &noise, derive_seed(ts, "system", i as u64)))
                    .collect::<lticlust::Result<Vec<_>>>()?;
                let cfg = PipelineConfig::new(2, k, 4, 5, derive_seed(ts, "pipeline", 0));
                let out = run_algorithm1(&trajs, &cfg)?;
                let matching = match_clusters(&out.assignments, &truth, k)?;
                let mut worst: f64 = 0.0;
                for (est, &c) in matching.permutation.iter().enumerate() {
                    let g = markov_parameters(&centers[c], cfg.l2);
                    worst = worst.max(out.cluster_markov[est].frobenius_distance(&g)?);
                }
                Ok((matching.accuracy, worst))
            })
            .collect::<Result<Vec<_>>>()?;
        let ok = results.iter().filter(|(a, e)| *a == 1.0 && *e <= 1e-8).count();
        let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
        Ok((
            ok == trials,
            format!("{ok}/{trials} exact, worst Markov error {worst:.3e}"),
        ))
    })
}

/// Ho-Kalman on exact blocks at `L = 2n + 1` for 50 random minimal models.
pub fn ho_kalman_consistency(seed: u64) -> CheckOutcome {
    timed(2, "Ho-Kalman consistency", 5, || {
        let mut worst: f64 = 0.0;
        let mut failures = 0;
        for i in 0..50u64 {
            let mut rng = rng_from_seed(derive_seed(seed, "ho-kalman", i));
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=2);
            let p = rng.random_range(1..=2);
            let horizon = 2 * n + 1;
            let g = minimal_markov(n, m, p, horizon, derive_seed(seed, "ho-kalman-model", i))?;
            let err = match ho_kalman(&g, n) {
                Ok(report) => relative(markov_parameters(&report.model, horizon).data(), g.data()),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(err);
            if err > 1e-8 {
                failures += 1;
            }
        }
        Ok((failures == 0, format!("{failures}/50 failed, worst relative error {worst:.3e}")))
    })
}

/// Minimality screen: redraws until `sigma_n / sigma_1` of the `n x n`
/// block Hankel matrix exceeds 1e-6.
fn minimal_markov(n: usize, m: usize, p: usize, horizon: usize, seed: u64) -> Result<MarkovBlock> {
    let mut attempt = 0;
    loop {
        let model = lticlust::random_stable_model(n, m, p, (0.5, 0.9), derive_seed(seed, "draw", attempt))?;
        attempt += 1;
        let g = markov_parameters(&model, horizon);
        let h = lticlust::hankel_from_markov(&g, n, n)?;
        let mut sv: Vec<f64> = h.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        if sv[n - 1] > 1e-6 * sv[0] {
            return Ok(g);
        }
    }
}

/// SVD pseudoinverse estimate against the normal-equation oracle on 50
/// instances with `cond(U) <= 1e4`.
pub fn least_squares_oracle(seed: u64) -> CheckOutcome {
    timed(3, "least-squares oracle", 5, || {
        let mut worst: f64 = 0.0;
        let mut failures = 0;
        let mut done = 0u64;
        let mut attempt = 0u64;
        while done < 50 {
            let s = derive_seed(seed, "ls-oracle", attempt);
            attempt += 1;
            let mut rng = rng_from_seed(s);
            let (n, m, p) = (rng.random_range(1..=3), rng.random_range(1..=2), rng.random_range(1..=2));
            let horizon = rng.random_range(1..=5);
            let len = rng.random_range(60..=200);
            let trajectories: u64 = rng.random_range(1..=3);
            let model = lticlust::random_stable_model(n, m, p, (0.3, 0.9), derive_seed(s, "model", 0))?;
            let noise = NoiseSpec::new(1.0, 0.1, 0.1)?;
            let trajs = (0..trajectories)
                .map(|i| simulate(&model, len, &noise, derive_seed(s, "traj", i)))
                .collect::<lticlust::Result<Vec<TrajectoryData>>>()?;
            let data = DataMatrices::build(trajs.iter(), horizon)?;
            let sv = data.u().singular_values();
            if sv.max() / sv.min() > 1e4 {
                continue;
            }
            done += 1;
            let fit = data.solve()?;
            let oracle = oracles::normal_equations(data.y(), data.u()).expect("Gram matrix is invertible");
            let err = relative(fit.markov.data(), &oracle);
            worst = worst.max(err);
            if err > 1e-8 {
                failures += 1;
            }
        }
        Ok((failures == 0, format!("{failures}/50 failed, worst relative error {worst:.3e}")))
    })
}

/// `sigma_min(U) >= sqrt(sum_k sigma_min(U_{J_k})^2) - 1e-9` for 100 random
/// concatenated block-Toeplitz matrices and their Page partitions.
pub fn page_certificate(seed: u64) -> CheckOutcome {
    timed(4, "Page-partition certificate", 10, || {
        let mut violations = 0;
        let mut tightest = f64::INFINITY;
        for i in 0..100u64 {
            let s = derive_seed(seed, "certificate", i);
            let mut rng = rng_from_seed(s);
            let m = rng.random_range(1..=3);
            let horizon = rng.random_range(0..=6);
            let trajectories: usize = rng.random_range(1..=4);
            let len = rng.random_range(horizon + 2 * (horizon + 1)..=horizon + 120);
            let scale = 10f64.powf(rng.random_range(-2.0..2.0));
            let mut blocks = Vec::new();
            for t in 0..trajectories as u64 {
                let inputs = gaussian_matrix(m, len + 1, &mut rng_from_seed(derive_seed(s, "inputs", t))) * scale;
                let traj = TrajectoryData::new(inputs, DMatrix::zeros(1, len))?;
                blocks.push(build_toeplitz_input(&traj, horizon)?);
            }
            let samples = blocks[0].ncols();
            let mut u = DMatrix::zeros(blocks[0].nrows(), samples * trajectories);
            for (t, b) in blocks.iter().enumerate() {
                u.columns_mut(t * samples, samples).copy_from(b);
            }
            let partition = page_partition(horizon, samples, trajectories)?;
            let (full, bound) = min_singular_certificate(&u, partition.sets());
            tightest = tightest.min(full - bound);
            if full < bound - 1e-9 {
                violations += 1;
            }
        }
        Ok((
            violations == 0,
            format!("{violations}/100 violations, smallest margin {tightest:.3e}"),
        ))
    })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-log slope of the median spectral error of pooled least squares
/// (`L = 4`) against `N T_f` for one fixed order-3 SISO model.
pub fn error_scaling(seed: u64) -> CheckOutcome {
    timed(5, "error scaling", 300, || {
        let reference = ExperimentConfig::reference();
        let model = reference.model_spec().sample(derive_seed(seed, "scaling-model", 0))?;
        let horizon = 4;
        let truth = markov_parameters(&model, horizon);
        let ns = [1usize, 2, 4, 8, 16];
        let ts = [64usize, 128, 256, 512];
        let trials = 20;
        let cells: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
        let medians = cells
            .par_iter()
            .enumerate()
            .map(|(c, &(n, t))| -> Result<f64> {
                let mut errors = Vec::with_capacity(trials);
                for trial in 0..trials {
                    let s = derive_seed(derive_seed(seed, "scaling-cell", c as u64), "trial", trial as u64);
                    let trajs = (0..n)
                        .map(|i| simulate(&model, t, &reference.noise, derive_seed(s, "traj", i as u64)))
                        .collect::<lticlust::Result<Vec<_>>>()?;
                    let g = lticlust::ls_markov(trajs.iter(), horizon)?;
                    errors.push(g.spectral_distance(&truth)?);
                }
                Ok(median(&errors))
            })
            .collect::<Result<Vec<_>>>()?;
        let x: Vec<f64> = cells
            .iter()
            .map(|&(n, t)| ((n * (t - horizon + 1)) as f64).ln())
            .collect();
        let y: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
        let b = slope(&x, &y);
        Ok((
            (-0.65..=-0.35).contains(&b),
            format!("slope {b:.3} over {} cells", cells.len()),
        ))
    })
}

/// Counts strict increases along a curve.
pub fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Width-0 reference sweep: the `N = 16` median curve lies below `N = 1`
/// at every `T`, and every curve is non-increasing up to one inversion.
pub fn pooling_curves(seed: u64) -> CheckOutcome {
    timed(6, "pooling curves", 300, || {
        let mut cfg = ExperimentConfig::reference();
        cfg.seed = seed;
        cfg.record_runtime = false;
        let summary = summarize(&run_sweep(&cfg)?);
        let curve = |n: usize| -> Vec<f64> {
            cfg.t_grid
                .iter()
                .map(|&t| {
                    summary
                        .iter()
                        .find(|s| s.per_cluster == n && s.len == t)
                        .map_or(f64::NAN, |s| s.median_error)
                })
                .collect()
        };
        let (low, high) = (curve(16), curve(1));
        let below = low.iter().zip(&high).all(|(a, b)| a < b);
        let worst = cfg.n_grid.iter().map(|&n| inversions(&curve(n))).max().unwrap_or(0);
        let finite = cfg.n_grid.iter().all(|&n| curve(n).iter().all(|v| v.is_finite()));
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        Ok((
            below && worst <= 1 && finite,
            format!(
                "N=16 [{}] vs N=1 [{}], max inversions {worst}",
                fmt(&low),
                fmt(&high)
            ),
        ))
    })
}

fn cell_config(seed: u64, trials: usize, width: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::reference();
    cfg.seed = seed;
    cfg.t_grid = vec![256];
    cfg.n_grid = vec![8];
    cfg.width_grid = vec![width];
    cfg.trials = trials;
    cfg.record_runtime = false;
    cfg
}

/// `K = 3` centers at least 0.5 apart, `T = 256`, `N = 8`: perfect
/// clustering in at least 38 of 40 trials.
pub fn separated_clustering(seed: u64) -> CheckOutcome {
    timed(7, "clustering under separation", 120, || {
        let rows = run_sweep(&cell_config(seed, 40, 0.0))?;
        let exact = rows.iter().filter(|r| r.clustering_accuracy == 1.0).count();
        let failed = rows.iter().filter(|r| r.failed()).count();
        Ok((
            exact >= 38,
            format!("{exact}/40 exact, {failed} failed trials"),
        ))
    })
}

/// Median accuracy at width `0.3 * min_separation / 2` is at least that at
/// `0.9 * min_separation / 2`.
pub fn width_trend(seed: u64) -> CheckOutcome {
    timed(8, "width robustness", 180, || {
        let delta = ExperimentConfig::reference().min_separation;
        let accuracy = |w: f64| -> Result<f64> {
            let rows = run_sweep(&cell_config(seed, 20, w))?;
            let acc: Vec<f64> = rows.iter().map(|r| r.clustering_accuracy).collect();
            Ok(median(&acc))
        };
        let (narrow, wide) = (0.3 * delta / 2.0, 0.9 * delta / 2.0);
        let (a, b) = (accuracy(narrow)?, accuracy(wide)?);
        Ok((
            a >= b,
            format!("median accuracy {a:.3} at width {narrow} vs {b:.3} at width {wide}"),
        ))
    })
}

/// Small sweep on pools of 1 and 4 threads yields identical CSV bytes.
pub fn determinism(seed: u64) -> CheckOutcome {
    timed(9, "determinism", 120, || {
        let mut cfg = ExperimentConfig::reference();
        cfg.seed = seed;
        cfg.t_grid = vec![64, 128];
        cfg.n_grid = vec![1, 4];
        cfg.trials = 3;
        cfg.record_runtime = false;
        let csv_on = |threads: usize| -> Result<Vec<u8>> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            let rows = pool.install(|| run_sweep(&cfg))?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            Ok(buf)
        };
        let runs = [csv_on(1)?, csv_on(4)?, csv_on(4)?];
        let same = runs.iter().all(|r| *r == runs[0]);
        Ok((
            same,
            format!("{} bytes per run, identical: {same}", runs[0].len()),
        ))
    })
}

/// Best-of-restarts k-means against exhaustive search on 30 instances of
/// at most 8 points with `K = 2`.
pub fn kmeans_global_optimum(seed: u64) -> CheckOutcome {
    timed(10, "k-means global optimum", 5, || {
        let mut hits = 0;
        let mut worst: f64 = 0.0;
        for i in 0..30u64 {
            let s = derive_seed(seed, "tiny-kmeans", i);
            let mut rng = rng_from_seed(s);
            let count = rng.random_range(3..=8);
            let dim = rng.random_range(1..=3);
            let points: Vec<Vec<f64>> = (0..count)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let result = kmeans(&points, &KMeansOptions::new(2, derive_seed(s, "kmeans", 0)))?;
            let gap = (result.sse - oracles::exhaustive_kmeans_sse(&points, 2)).abs();
            worst = worst.max(gap);
            if gap <= 1e-10 {
                hits += 1;
            }
        }
        Ok((hits >= 29, format!("{hits}/30 optimal, largest gap {worst:.3e}")))
    })
}

use lticlust::clustering::{kmeans_plus_plus, lloyd};
use lticlust::linalg::gaussian_matrix;
use lticlust::rng::{derive_seed, rng_from_seed};
use lticlust::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_points(seed: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let g = gaussian_matrix(count, dim, &mut rng_from_seed(seed));
    (0..count).map(|i| g.row(i).iter().copied().collect()).collect()
}

/// Minimum two-cluster SSE over every labelling, centroids at cluster means.
fn exhaustive_two_cluster_sse(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let mut sse = 0.0;
        for side in [0, 1] {
            let members: Vec<&Vec<f64>> =
                (0..n).filter(|&i| (mask >> i) & 1 == side).map(|i| &points[i]).collect();
            for d in 0..dim {
                let mean = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                sse += members.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(sse);
    }
    best
}

#[test]
fn kmeans_finds_exhaustive_optimum_on_eight_points() {
    let points = random_points(5, 8, 3);
    let result = kmeans(&points, &KMeansOptions::new(2, 1)).unwrap();
    let oracle = exhaustive_two_cluster_sse(&points);
    assert!((result.sse - oracle).abs() <= 1e-10, "{} vs {oracle}", result.sse);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lloyd_sse_never_increases(seed in any::<u64>(), count in 3usize..40, k in 1usize..5) {
        prop_assume!(k <= count);
        let points = random_points(seed, count, 4);
        let init = kmeans_plus_plus(&points, k, &mut rng_from_seed(seed ^ 7));
        let run = lloyd(&points, init, 100);
        for w in run.sse_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", run.sse_history);
        }
        prop_assert!(run.sse <= run.sse_history.last().unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn kmeans_result_is_a_lloyd_fixed_point(seed in any::<u64>(), count in 4usize..30, k in 1usize..4) {
        let points = random_points(seed, count, 2);
        let r = kmeans(&points, &KMeansOptions { k, restarts: 5, max_iter: 500, seed }).unwrap();
        prop_assert!(r.assignments.iter().all(|&a| a < k));
        prop_assert!(r.sse >= 0.0);
        prop_assert!(r.restart_sse.iter().all(|&s| r.sse <= s));
        for c in 0..k {
            let members: Vec<_> = (0..count).filter(|&i| r.assignments[i] == c).collect();
            prop_assert!(!members.is_empty());
            for d in 0..2 {
                let mean = members.iter().map(|&i| points[i][d]).sum::<f64>() / members.len() as f64;
                prop_assert!((mean - r.centroids[c][d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matching_is_relabeling_invariant(seed in any::<u64>(), len in 1usize..30, k in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        use rand::Rng;
        let truth: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let est: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let shift = rng.random_range(0..k);
        let relabel = |v: &[usize]| v.iter().map(|&l| (l + shift) % k).collect::<Vec<_>>();
        let base = match_clusters(&est, &truth, k).unwrap().accuracy;
        prop_assert_eq!(base, match_clusters(&relabel(&est), &truth, k).unwrap().accuracy);
        prop_assert_eq!(base, match_clusters(&est, &relabel(&truth), k).unwrap().accuracy);
        prop_assert!((0.0..=1.0).contains(&base));
    }
}

#[test]
fn ho_kalman_round_trip_grid() {
    for n in 1..=4 {
        for (m, p) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            for rep in 0..3u64 {
                let seed = derive_seed(n as u64 * 10 + m as u64 * 3 + p as u64, "hk", rep);
                let model = random_stable_model(n, m, p, (0.6, 0.9), seed).unwrap();
                let horizon = 2 * n + 1;
                let g = markov_parameters(&model, horizon);
                let report = ho_kalman(&g, n).unwrap();
                assert_eq!(report.model.state_dim(), n);
                assert_eq!(report.model.input_dim(), m);
                assert_eq!(report.model.output_dim(), p);
                let back = markov_parameters(&report.model, horizon);
                let rel = (back.data() - g.data()).norm() / g.data().norm();
                assert!(rel <= 1e-8, "n={n} m={m} p={p}: {rel}");
                let obs = report.observability.transpose() * &report.observability;
                let ctrl = &report.controllability * report.controllability.transpose();
                assert!((&obs - &ctrl).norm() <= 1e-8 * obs.norm());
            }
        }
    }
}

fn perturbed(g: &MarkovBlock, direction: &DMatrix<f64>, eps: f64) -> MarkovBlock {
    MarkovBlock::new(g.data() + direction * eps, g.input_dim()).unwrap()
}

fn unit_direction(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let e = gaussian_matrix(rows, cols, &mut rng_from_seed(seed));
    let norm = e.clone().svd(false, false).singular_values.max();
    e / norm
}

#[test]
fn realization_error_grows_linearly_in_perturbation() {
    let model = random_stable_model(3, 1, 1, (0.6, 0.9), 77).unwrap();
    let horizon = 7;
    let g = markov_parameters(&model, horizon);
    let sigma_n = ho_kalman(&g, 3).unwrap().sigma_n;
    let levels = [1e-4, 1e-3, 1e-2];
    assert!(levels[2] <= 3f64.sqrt() * sigma_n);
    let mut medians = Vec::new();
    for &eps in &levels {
        let mut errs: Vec<f64> = (0..10u64)
            .map(|trial| {
                let dir = unit_direction(1, horizon + 1, derive_seed(1, "dir", trial));
                let report = ho_kalman(&perturbed(&g, &dir, eps), 3).unwrap();
                realization_error(&model, &report.model, horizon).unwrap()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push(0.5 * (errs[4] + errs[5]));
    }
    for w in medians.windows(2) {
        assert!(w[1] >= w[0], "{medians:?}");
    }
    let slope = (medians[2].ln() - medians[0].ln()) / (levels[2].ln() - levels[0].ln());
    assert!((0.8..=1.2).contains(&slope), "slope {slope}, medians {medians:?}");
}

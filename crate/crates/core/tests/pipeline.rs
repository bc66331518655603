use lticlust::pipeline::run_with_labels;
use lticlust::rng::derive_seed;
use lticlust::*;

fn simulate_clusters(
    models: &[StateSpaceModel],
    per_cluster: usize,
    len: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> (Vec<TrajectoryData>, Vec<usize>) {
    let mut trajs = Vec::new();
    let mut truth = Vec::new();
    for (k, model) in models.iter().enumerate() {
        for j in 0..per_cluster {
            let s = derive_seed(seed, "traj", (k * per_cluster + j) as u64);
            trajs.push(simulate(model, len, noise, s).unwrap());
            truth.push(k);
        }
    }
    (trajs, truth)
}

/// Cluster Markov error averaged over clusters, after matching labels.
fn matched_error(out: &PipelineOutput, truth_labels: &[usize], models: &[StateSpaceModel]) -> (f64, f64) {
    let k = models.len();
    let matching = match_clusters(&out.assignments, truth_labels, k).unwrap();
    let mut total = 0.0;
    for (est, &t) in matching.permutation.iter().enumerate() {
        let truth = markov_parameters(&models[t], out.cluster_markov[est].horizon());
        total += out.cluster_markov[est].frobenius_distance(&truth).unwrap();
    }
    (matching.accuracy, total / k as f64)
}

#[test]
fn exact_recovery_without_noise() {
    for trial in 0..5u64 {
        let models: Vec<_> = (0..3)
            .map(|k| random_nilpotent_model(2, 1, 1, derive_seed(trial, "center", k)).unwrap())
            .collect();
        let (trajs, truth) = simulate_clusters(&models, 4, 100, &NoiseSpec::noiseless(), trial);
        let out = run_algorithm1(&trajs, &PipelineConfig::new(2, 3, 4, 5, trial)).unwrap();
        let (accuracy, error) = matched_error(&out, &truth, &models);
        assert_eq!(accuracy, 1.0);
        assert!(error <= 1e-8, "trial {trial}: {error}");
        for report in &out.cluster_models {
            assert_eq!(report.model.state_dim(), 2);
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let noise = NoiseSpec::new(1.0, 0.15, 0.2).unwrap();
    let models: Vec<_> = (0..3)
        .map(|k| random_stable_model(3, 1, 1, (0.6, 0.9), k).unwrap())
        .collect();
    let (trajs, _) = simulate_clusters(&models, 5, 120, &noise, 4);
    let cfg = PipelineConfig::new(3, 3, 4, 7, 99);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_algorithm1(&trajs, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.assignments, b.assignments);
    assert_eq!(a.cluster_markov, b.cluster_markov);
    assert_eq!(a.diagnostics, b.diagnostics);
    for (x, y) in a.cluster_models.iter().zip(&b.cluster_models) {
        assert_eq!(x.model, y.model);
    }
}

#[test]
fn true_labels_never_hurt_on_average() {
    let noise = NoiseSpec::new(1.0, 0.15, 0.2).unwrap();
    let (mut with_kmeans, mut with_truth) = (0.0, 0.0);
    for trial in 0..15u64 {
        // deliberately close centers so clustering sometimes errs
        let base = random_stable_model(3, 1, 1, (0.6, 0.9), derive_seed(trial, "base", 0)).unwrap();
        let models: Vec<_> = (0..3)
            .map(|k| {
                let other = random_stable_model(3, 1, 1, (0.6, 0.9), derive_seed(trial, "c", k)).unwrap();
                let mix = |a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>| a * 0.85 + b * 0.15;
                StateSpaceModel::new(
                    base.a().clone(),
                    mix(base.b(), other.b()),
                    mix(base.c(), other.c()),
                    mix(base.d(), other.d()),
                )
                .unwrap()
            })
            .collect();
        let (trajs, truth) = simulate_clusters(&models, 6, 60, &noise, trial);
        let cfg = PipelineConfig::new(3, 3, 3, 7, trial);
        let clustered = run_algorithm1(&trajs, &cfg).unwrap();
        let labelled = run_with_labels(&trajs, &truth, &cfg).unwrap();
        with_kmeans += matched_error(&clustered, &truth, &models).1;
        with_truth += matched_error(&labelled, &truth, &models).1;
        assert_eq!(labelled.diagnostics.kmeans_sse, None);
    }
    assert!(with_truth <= with_kmeans, "{with_truth} > {with_kmeans}");
}

#[test]
fn short_trajectories_join_clusters_but_not_pooling() {
    let noise = NoiseSpec::new(1.0, 0.15, 0.2).unwrap();
    let models: Vec<_> = (0..2)
        .map(|k| random_stable_model(2, 1, 1, (0.6, 0.9), 40 + k).unwrap())
        .collect();
    let mut trajs = Vec::new();
    let mut truth = Vec::new();
    for (k, model) in models.iter().enumerate() {
        for j in 0..6u64 {
            // L2 = 5 pools trajectories of length >= 11; make half of them 10 long
            let len = if j % 2 == 0 { 400 } else { 10 };
            trajs.push(simulate(model, len, &noise, derive_seed(k as u64, "mixed", j)).unwrap());
            truth.push(k);
        }
    }
    let out = run_algorithm1(&trajs, &PipelineConfig::new(2, 2, 4, 5, 1)).unwrap();
    for (k, members) in out.diagnostics.pooled.iter().enumerate() {
        assert!(!members.is_empty());
        for &i in members {
            assert!(trajs[i].len() >= 11);
            assert_eq!(out.assignments[i], k);
        }
    }
    for i in 0..trajs.len() {
        assert_eq!(out.system_model(i), &out.cluster_models[out.assignments[i]].model);
    }
    assert_eq!(out.per_system_markov.len(), trajs.len());
}

#[test]
fn pooling_reduces_cluster_error() {
    let noise = NoiseSpec::new(1.0, 0.15, 0.2).unwrap();
    let median_error = |per_cluster: usize| {
        let mut errs: Vec<f64> = (0..10u64)
            .map(|trial| {
                let models: Vec<_> = (0..3)
                    .map(|k| random_stable_model(3, 1, 1, (0.6, 0.9), derive_seed(trial, "pool", k)).unwrap())
                    .collect();
                let (trajs, truth) = simulate_clusters(&models, per_cluster, 256, &noise, trial + 100);
                let out = run_algorithm1(&trajs, &PipelineConfig::new(3, 3, 4, 7, trial)).unwrap();
                matched_error(&out, &truth, &models).1
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        0.5 * (errs[4] + errs[5])
    };
    let (one, sixteen) = (median_error(1), median_error(16));
    assert!(sixteen < one, "N=16 {sixteen} vs N=1 {one}");
}

//! k-means over flattened Markov blocks and label matching against ground
//! truth.
//!
//! Labels are zero-based (`0..k`).

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KMeansOptions {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            restarts: 20,
            max_iter: 300,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    pub restarts_used: usize,
    /// Final SSE of each restart, in restart order.
    pub restart_sse: Vec<f64>,
}

/// One Lloyd run from fixed initial centroids.
#[derive(Clone, Debug, PartialEq)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    /// SSE after each assignment step.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

fn means(points: &[Vec<f64>], assignments: &[usize], previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let k = previous.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, c), prev)| {
            if c == 0 {
                prev.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}

fn sse_of(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_dist = -1.0;
        for (i, p) in points.iter().enumerate() {
            if counts[assignments[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assignments[i]]);
            if d > far_dist {
                far_dist = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        assignments[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

/// Lloyd iterations from `initial` centroids until the assignment stops
/// changing or `max_iter` assignment steps have run.
pub fn lloyd(points: &[Vec<f64>], initial: Vec<Vec<f64>>, max_iter: usize) -> LloydRun {
    let mut centroids = initial;
    let mut assignments: Vec<usize> = Vec::new();
    let mut sse_history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        repair_empty(points, &mut next, &mut centroids);
        sse_history.push(sse_of(points, &next, &centroids));
        let changed = next != assignments;
        assignments = next;
        centroids = means(points, &assignments, &centroids);
        if !changed {
            break;
        }
    }
    let sse = sse_of(points, &assignments, &centroids);
    LloydRun {
        assignments,
        centroids,
        sse,
        sse_history,
        iterations,
    }
}

/// k-means++ seeding: first centroid uniform, the rest drawn with
/// probability proportional to the squared distance to the nearest chosen
/// centroid.
pub fn kmeans_plus_plus<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut closest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &d) in closest.iter().enumerate() {
                if d > 0.0 {
                    chosen = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            chosen.expect("positive total implies a positive weight")
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick].clone();
        for (d, p) in closest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Best-of-restarts k-means with k-means++ seeding.
///
/// Restart `r` is seeded from `(opts.seed, r)`, so the result does not depend
/// on how restarts are scheduled. Ties in SSE go to the lowest restart.
pub fn kmeans(points: &[Vec<f64>], opts: &KMeansOptions) -> Result<ClusteringResult> {
    let k = opts.k;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let Some(first) = points.first() else {
        return Err(Error::DegenerateInput { distinct: 0, k });
    };
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(Error::InvalidArgument("points have different dimensions".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coordinate".into()));
    }
    let distinct = distinct_count(points);
    if distinct < k {
        return Err(Error::DegenerateInput { distinct, k });
    }
    let runs: Vec<LloydRun> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(opts.seed, "kmeans-restart", r as u64);
            let init = kmeans_plus_plus(points, k, &mut rng);
            lloyd(points, init, opts.max_iter)
        })
        .collect();
    let restart_sse: Vec<f64> = runs.iter().map(|r| r.sse).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.sse.total_cmp(&b.sse).then(i.cmp(j)))
        .map(|(_, run)| run)
        .expect("at least one restart");
    Ok(ClusteringResult {
        assignments: best.assignments,
        centroids: best.centroids,
        sse: best.sse,
        restarts_used: opts.restarts,
        restart_sse,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterMatching {
    /// `permutation[estimated_label] = truth_label`.
    pub permutation: Vec<usize>,
    pub accuracy: f64,
}

/// Relabeling of `estimated` that maximizes agreement with `truth`.
///
/// Exhaustive over all `k!` permutations for `k <= 8`; greedy on the
/// contingency table otherwise.
pub fn match_clusters(estimated: &[usize], truth: &[usize], k: usize) -> Result<ClusterMatching> {
    if estimated.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "label vectors differ in length: {} vs {}",
            estimated.len(),
            truth.len()
        )));
    }
    if estimated.iter().chain(truth).any(|&l| l >= k) {
        return Err(Error::InvalidArgument(format!("label out of range for k = {k}")));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&e, &t) in estimated.iter().zip(truth) {
        counts[e][t] += 1;
    }
    let permutation = if k <= 8 {
        best_assignment(k, |e, t| counts[e][t] as f64, true)
    } else {
        greedy_assignment(&counts)
    };
    let agree: usize = (0..k).map(|e| counts[e][permutation[e]]).sum();
    let accuracy = if truth.is_empty() {
        1.0
    } else {
        agree as f64 / truth.len() as f64
    };
    Ok(ClusterMatching {
        permutation,
        accuracy,
    })
}

/// Exhaustive search over permutations `pi` of `0..k` for the best
/// `sum_i score(i, pi[i])` (maximized or minimized). Lexicographic order, so
/// the identity wins among equals.
pub fn best_assignment(k: usize, score: impl Fn(usize, usize) -> f64, maximize: bool) -> Vec<usize> {
    fn walk(
        perm: &mut Vec<usize>,
        used: &mut [bool],
        acc: f64,
        score: &dyn Fn(usize, usize) -> f64,
        maximize: bool,
        best: &mut (f64, Vec<usize>),
    ) {
        let k = used.len();
        if perm.len() == k {
            let better = if maximize { acc > best.0 } else { acc < best.0 };
            if better {
                *best = (acc, perm.clone());
            }
            return;
        }
        let i = perm.len();
        for j in 0..k {
            if !used[j] {
                used[j] = true;
                perm.push(j);
                walk(perm, used, acc + score(i, j), score, maximize, best);
                perm.pop();
                used[j] = false;
            }
        }
    }
    let init = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut best = (init, (0..k).collect());
    walk(&mut Vec::with_capacity(k), &mut vec![false; k], 0.0, &score, maximize, &mut best);
    best.1
}

fn greedy_assignment(counts: &[Vec<usize>]) -> Vec<usize> {
    let k = counts.len();
    let mut perm = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    for _ in 0..k {
        let mut best = None;
        for e in (0..k).filter(|&e| perm[e] == usize::MAX) {
            for t in (0..k).filter(|&t| !taken[t]) {
                if best.is_none_or(|(_, _, c)| counts[e][t] > c) {
                    best = Some((e, t, counts[e][t]));
                }
            }
        }
        let (e, t, _) = best.expect("unmatched labels remain");
        perm[e] = t;
        taken[t] = true;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_cluster_is_the_mean() {
        let points = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]];
        let r = kmeans(&points, &KMeansOptions::new(1, 0)).unwrap();
        assert_eq!(r.assignments, vec![0, 0, 0]);
        assert_abs_diff_eq!(r.centroids[0][0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.centroids[0][1], 1.0, epsilon = 1e-15);
        // per-coordinate variances 8/3 and 8/3, times three points
        assert_abs_diff_eq!(r.sse, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn two_locations_give_zero_sse() {
        let points: Vec<Vec<f64>> = (0..10)
            .map(|i| if i % 3 == 0 { vec![1.0, 1.0] } else { vec![-2.0, 0.5] })
            .collect();
        let r = kmeans(&points, &KMeansOptions::new(2, 9)).unwrap();
        assert_eq!(r.sse, 0.0);
        let truth: Vec<usize> = (0..10).map(|i| usize::from(i % 3 != 0)).collect();
        assert_eq!(match_clusters(&r.assignments, &truth, 2).unwrap().accuracy, 1.0);
    }

    #[test]
    fn too_few_distinct_points() {
        let points = vec![vec![1.0], vec![1.0], vec![1.0]];
        assert!(matches!(
            kmeans(&points, &KMeansOptions::new(2, 0)),
            Err(Error::DegenerateInput { distinct: 1, k: 2 })
        ));
    }

    #[test]
    fn empty_clusters_are_repaired() {
        let points = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        // every point is closest to the first centroid
        let run = lloyd(&points, vec![vec![5.0], vec![100.0]], 50);
        let mut counts = [0; 2];
        for &a in &run.assignments {
            counts[a] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
        assert_abs_diff_eq!(run.sse, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kmeans_is_deterministic() {
        let points: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64).cos()]).collect();
        let opts = KMeansOptions::new(3, 12);
        assert_eq!(kmeans(&points, &opts).unwrap(), kmeans(&points, &opts).unwrap());
    }

    #[test]
    fn matching_examples() {
        let truth = vec![0, 0, 1, 1, 2];
        let m = match_clusters(&truth, &truth, 3).unwrap();
        assert_eq!(m.permutation, vec![0, 1, 2]);
        assert_eq!(m.accuracy, 1.0);

        let truth = vec![0, 0, 1, 1];
        let m = match_clusters(&[1, 1, 0, 0], &truth, 2).unwrap();
        assert_eq!(m.permutation, vec![1, 0]);
        assert_eq!(m.accuracy, 1.0);

        let truth: Vec<usize> = (0..12).map(|i| i / 4).collect();
        let mut est: Vec<usize> = truth.iter().map(|&t| (t + 1) % 3).collect();
        est[5] = (est[5] + 1) % 3;
        let m = match_clusters(&est, &truth, 3).unwrap();
        assert_abs_diff_eq!(m.accuracy, 11.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn greedy_matching_for_many_clusters() {
        let truth: Vec<usize> = (0..40).map(|i| i % 10).collect();
        let est: Vec<usize> = truth.iter().map(|&t| (t + 3) % 10).collect();
        let m = match_clusters(&est, &truth, 10).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.permutation[3], 0);
    }

    #[test]
    fn matching_rejects_bad_labels() {
        assert!(match_clusters(&[0, 1], &[0], 2).is_err());
        assert!(match_clusters(&[0, 2], &[0, 1], 2).is_err());
    }
}

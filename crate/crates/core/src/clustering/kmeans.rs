use rand::Rng;

use super::sq_dist;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Independent k-means++ seedings tried per call; the lowest-inertia run wins.
pub const KMEANS_RESTARTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Total within-cluster squared distance.
    pub inertia: f64,
    pub iterations_run: usize,
}

impl KMeansResult {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == cluster)
            .collect()
    }
}

/// Nearest centroid; ties go to the lowest index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    if target < w {
                        pick = Some(i);
                        break;
                    }
                    target -= w;
                }
            }
            // Rounding can walk past the end; fall back to the last positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap_or(0))
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (a, p) in assignments.iter_mut().zip(points) {
        let (j, d) = nearest(p, centroids);
        *a = j;
        inertia += d;
    }
    inertia
}

/// Moves the point farthest from its centroid into each empty cluster,
/// never emptying a singleton in the process.
fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[assignments[i]] < 2 {
                continue;
            }
            let d = sq_dist(p, &centroids[assignments[i]]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let Some((i, _)) = best else { return };
        assignments[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

fn update_centroids(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let k = centroids.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
        }
    }
}

fn inertia_of(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Single-point transfers (Hartigan): move a point to another cluster whenever
/// that lowers the SSE, accounting for both centroids shifting. Lloyd fixed
/// points are not always stable under such moves, so this polishes them.
fn transfer_refine(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assignments: &mut [usize], max_passes: usize) {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    for _ in 0..max_passes {
        let mut moved = false;
        for (i, p) in points.iter().enumerate() {
            let from = assignments[i];
            if counts[from] < 2 {
                continue;
            }
            let nf = counts[from] as f64;
            let removal = nf / (nf - 1.0) * sq_dist(p, &centroids[from]);
            let mut best: Option<(usize, f64)> = None;
            for to in (0..k).filter(|&j| j != from) {
                let nt = counts[to] as f64;
                let added = nt / (nt + 1.0) * sq_dist(p, &centroids[to]);
                // Strict with slack so rounding cannot cycle.
                if added < removal * (1.0 - 1e-12) && best.is_none_or(|(_, b)| added < b) {
                    best = Some((to, added));
                }
            }
            if let Some((to, _)) = best {
                let nt = counts[to] as f64;
                for (c, v) in centroids[from].iter_mut().zip(p) {
                    *c = (*c * nf - v) / (nf - 1.0);
                }
                for (c, v) in centroids[to].iter_mut().zip(p) {
                    *c = (*c * nt + v) / (nt + 1.0);
                }
                counts[from] -= 1;
                counts[to] += 1;
                assignments[i] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

fn lloyd<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, max_iters: usize, rng: &mut R) -> KMeansResult {
    let mut centroids = plus_plus_init(points, k, rng);
    let mut assignments = vec![0; points.len()];
    assign(points, &centroids, &mut assignments);
    repair_empty(points, &mut centroids, &mut assignments);
    let mut inertia = inertia_of(points, &centroids, &assignments);
    let mut iterations_run = 0;
    let mut next = assignments.clone();
    while iterations_run < max_iters {
        iterations_run += 1;
        update_centroids(points, &assignments, &mut centroids);
        assign(points, &centroids, &mut next);
        repair_empty(points, &mut centroids, &mut next);
        let new_inertia = inertia_of(points, &centroids, &next);
        debug_assert!(
            new_inertia <= inertia * (1.0 + 1e-12) + 1e-12,
            "inertia increased: {inertia} -> {new_inertia}"
        );
        inertia = new_inertia;
        if next == assignments {
            break;
        }
        std::mem::swap(&mut assignments, &mut next);
    }
    update_centroids(points, &assignments, &mut centroids);
    transfer_refine(points, &mut centroids, &mut assignments, max_iters);
    // Final centroids are the means of the final partition.
    update_centroids(points, &assignments, &mut centroids);
    let inertia = inertia_of(points, &centroids, &assignments);
    KMeansResult {
        centroids,
        assignments,
        inertia,
        iterations_run,
    }
}

/// Lloyd's algorithm with k-means++ seeding, best of [`KMEANS_RESTARTS`] seedings.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::Argument(format!("k = {k} exceeds {} points", points.len())));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Argument("points have mixed dimensions".into()));
    }
    let mut best: Option<KMeansResult> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = stream(seed, Purpose::PolicyClusters, &[restart as u64]);
        let run = lloyd(points, k, max_iters, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
        if k == 1 || k == points.len() {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

//! Brute-force oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use cgrpo_core::rng::{stream, Purpose};
use rand::Rng;

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sum of squared distances to cluster means for a labeling into `k` clusters.
/// `None` if some cluster is empty.
pub fn partition_sse(points: &[Vec<f64>], labels: &[usize], k: usize) -> Option<f64> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    if counts.contains(&0) {
        return None;
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|v| v / c as f64).collect())
        .collect();
    Some(points.iter().zip(labels).map(|(p, &l)| sq_dist(p, &means[l])).sum())
}

/// Minimum SSE over every labeling of `points` into exactly `k` non-empty clusters.
pub fn brute_force_min_sse(points: &[Vec<f64>], k: usize) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, labels.clone());
    loop {
        if let Some(sse) = partition_sse(points, &labels, k) {
            if sse < best.0 {
                best = (sse, labels.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Canonical form of a labeling: clusters relabeled by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Density-reachability reference for DBSCAN.
pub struct DbscanOracle {
    pub core: Vec<bool>,
    /// Connected component id of each core point among cores.
    pub component: Vec<Option<usize>>,
    /// For non-core points: components of the cores within eps (empty = noise).
    pub reachable_from: Vec<Vec<usize>>,
}

pub fn dbscan_oracle(points: &[Vec<f64>], eps: f64, min_pts: usize) -> DbscanOracle {
    let n = points.len();
    let eps2 = eps * eps;
    let near = |i: usize, j: usize| sq_dist(&points[i], &points[j]) <= eps2;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();
    // Union-find over core-core adjacency.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if core[i] && core[j] && near(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut ids = std::collections::HashMap::new();
    let component: Vec<Option<usize>> = (0..n)
        .map(|i| {
            core[i].then(|| {
                let root = find(&mut parent, i);
                let next = ids.len();
                *ids.entry(root).or_insert(next)
            })
        })
        .collect();
    let reachable_from = (0..n)
        .map(|i| {
            if core[i] {
                return vec![];
            }
            let mut c: Vec<usize> = (0..n).filter(|&j| core[j] && near(i, j)).map(|j| component[j].unwrap()).collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    DbscanOracle {
        core,
        component,
        reachable_from,
    }
}

/// Checks DBSCAN labels against the oracle; returns a description of the
/// first mismatch. Border points touching several clusters may carry any of them.
pub fn compare_dbscan(labels: &[i64], oracle: &DbscanOracle) -> Result<(), String> {
    let n = labels.len();
    let mut to_label: std::collections::HashMap<usize, i64> = Default::default();
    let mut from_label: std::collections::HashMap<i64, usize> = Default::default();
    for i in 0..n {
        if let Some(c) = oracle.component[i] {
            if labels[i] < 0 {
                return Err(format!("core point {i} labeled noise"));
            }
            if *to_label.entry(c).or_insert(labels[i]) != labels[i] || *from_label.entry(labels[i]).or_insert(c) != c {
                return Err(format!("core point {i} in the wrong cluster"));
            }
        }
    }
    for i in 0..n {
        if oracle.core[i] {
            continue;
        }
        let allowed = &oracle.reachable_from[i];
        if allowed.is_empty() {
            if labels[i] != -1 {
                return Err(format!("noise point {i} labeled {}", labels[i]));
            }
        } else if !allowed.iter().any(|c| to_label[c] == labels[i]) {
            return Err(format!("border point {i} labeled {} outside {allowed:?}", labels[i]));
        }
    }
    Ok(())
}

/// Points scattered around `centers` with uniform jitter.
pub fn blobs(seed: u64, centers: &[Vec<f64>], per_center: usize, spread: f64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, Purpose::Probes, &[0xB10B]);
    let mut out = Vec::new();
    for c in centers {
        for _ in 0..per_center {
            out.push(c.iter().map(|v| v + rng.random_range(-spread..spread)).collect());
        }
    }
    out
}

pub fn uniform_points(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, Purpose::Probes, &[0xF1A7]);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

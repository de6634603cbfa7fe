use std::collections::VecDeque;

use super::sq_dist;

pub const NOISE: i64 = -1;
const UNVISITED: i64 = -2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbscanResult {
    /// Cluster id per point, or [`NOISE`].
    pub labels: Vec<i64>,
    pub cluster_count: usize,
}

impl DbscanResult {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

/// Indices within `eps` of point `i` (itself included), ascending.
fn region(points: &[Vec<f64>], i: usize, eps_sq: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&j| sq_dist(&points[i], &points[j]) <= eps_sq)
        .collect()
}

/// Density-based clustering with Euclidean distance.
///
/// A point is core when at least `min_pts` points (itself included) lie within
/// `eps`. Clusters are seeded from unvisited points in ascending index order
/// and expanded breadth-first, so labels are a deterministic function of the
/// input order.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> DbscanResult {
    let n = points.len();
    let eps_sq = eps * eps;
    let mut labels = vec![UNVISITED; n];
    let mut cluster = 0i64;
    let mut queue = VecDeque::new();
    for i in 0..n {
        if labels[i] != UNVISITED {
            continue;
        }
        let nbrs = region(points, i, eps_sq);
        if nbrs.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        labels[i] = cluster;
        queue.extend(nbrs);
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                labels[j] = cluster;
            }
            if labels[j] != UNVISITED {
                continue;
            }
            labels[j] = cluster;
            let nj = region(points, j, eps_sq);
            if nj.len() >= min_pts {
                queue.extend(nj);
            }
        }
        cluster += 1;
    }
    DbscanResult {
        labels,
        cluster_count: cluster as usize,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_form_one_cluster() {
        let r = dbscan(&vec![vec![1.0, 2.0]; 6], 0.5, 6);
        assert_eq!(r.cluster_count, 1);
        assert!(r.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn two_blobs_and_an_outlier() {
        let mut pts = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (10.0, 0.0)] {
            for k in 0..5 {
                let a = k as f64 * std::f64::consts::TAU / 5.0;
                pts.push(vec![cx + 0.1 * a.cos(), cy + 0.1 * a.sin()]);
            }
        }
        pts.push(vec![50.0, 0.0]);
        let r = dbscan(&pts, 0.5, 3);
        assert_eq!(r.cluster_count, 2);
        assert_eq!(r.noise_count(), 1);
        assert_eq!(r.labels[10], NOISE);
        assert!(r.labels[..5].iter().all(|&l| l == 0));
        assert!(r.labels[5..10].iter().all(|&l| l == 1));
    }

    #[test]
    fn sparse_points_are_all_noise() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let r = dbscan(&pts, 0.5, 2);
        assert_eq!(r.cluster_count, 0);
        assert!(r.labels.iter().all(|&l| l == NOISE));
    }

    #[test]
    fn border_point_joins_cluster() {
        // 0,1,2 are core with min_pts = 3; 3 is a border point of 2 only.
        let pts = vec![vec![0.0], vec![0.4], vec![0.8], vec![1.25]];
        let r = dbscan(&pts, 0.5, 3);
        assert_eq!(r.labels, vec![0, 0, 0, 0]);
    }

    #[test]
    fn empty_input() {
        let r = dbscan(&[], 0.5, 3);
        assert_eq!(r.cluster_count, 0);
        assert!(r.labels.is_empty());
    }
}

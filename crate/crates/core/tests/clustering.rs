mod common;

use cgrpo_core::clustering::{dbscan, kmeans, standardize, NOISE};

#[test]
fn kmeans_finds_minimum_sse_partition() {
    for seed in 100..140u64 {
        let n = 3 + (seed % 6) as usize;
        let k = 1 + (seed % 3) as usize;
        let pts = common::uniform_points(seed, n, 2 + (seed % 2) as usize);
        let res = kmeans(&pts, k, seed, 100).unwrap();
        let (best, _) = common::brute_force_min_sse(&pts, k);
        let sse = common::partition_sse(&pts, &res.assignments, k).expect("no empty cluster");
        assert!((sse - best).abs() <= 1e-9 * best.max(1.0), "seed {seed}: {sse} vs {best}");
        assert!((res.inertia - sse).abs() <= 1e-9 * sse.max(1.0));
        assert_eq!(kmeans(&pts, k, seed, 100).unwrap(), res);
    }
}

#[test]
fn kmeans_separates_well_spaced_blobs() {
    let centers = [vec![-5.0, 0.0], vec![5.0, 0.0], vec![0.0, 8.0]];
    let pts = common::blobs(3, &centers, 10, 0.3);
    let res = kmeans(&pts, 3, 0, 100).unwrap();
    let canon = common::canonical(&res.assignments);
    let expected: Vec<usize> = (0..30).map(|i| i / 10).collect();
    assert_eq!(canon, expected);
}

#[test]
fn dbscan_matches_reachability_oracle() {
    for seed in 200..240u64 {
        let n = 5 + (seed % 46) as usize;
        let eps = 0.15 + 0.05 * (seed % 6) as f64;
        let min_pts = 1 + (seed % 5) as usize;
        let pts = common::uniform_points(seed, n, 2);
        let res = dbscan(&pts, eps, min_pts);
        let oracle = common::dbscan_oracle(&pts, eps, min_pts);
        common::compare_dbscan(&res.labels, &oracle).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn dbscan_edge_cases() {
    assert!(dbscan(&[], 0.5, 3).labels.is_empty());
    let lone = dbscan(&[vec![0.0, 0.0]], 0.5, 2);
    assert_eq!((lone.labels.clone(), lone.cluster_count), (vec![NOISE], 0));
    assert_eq!(dbscan(&[vec![0.0, 0.0]], 0.5, 1).labels, vec![0]);
    // Exactly eps apart counts as a neighbour.
    assert_eq!(dbscan(&[vec![0.0], vec![0.5]], 0.5, 2).labels, vec![0, 0]);
}

#[test]
fn standardized_blobs_keep_cluster_structure() {
    let centers = [vec![0.0, 0.0], vec![100.0, 1.0]];
    let raw = common::blobs(9, &centers, 12, 0.5);
    let z = standardize(&raw).unwrap();
    for d in 0..2 {
        let m: f64 = z.points.iter().map(|p| p[d]).sum::<f64>() / 24.0;
        let v: f64 = z.points.iter().map(|p| (p[d] - m).powi(2)).sum::<f64>() / 24.0;
        assert!(m.abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }
    let res = dbscan(&z.points, 1.0, 3);
    assert_eq!(res.cluster_count, 2);
    assert_eq!(res.noise_count(), 0);
}

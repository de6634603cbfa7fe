//! Standardization, k-means and DBSCAN over small dense point sets.
//!
//! All routines are deterministic: k-means seeds its own ChaCha stream, and
//! DBSCAN expands clusters in ascending point order.

mod dbscan;
mod kmeans;

pub use dbscan::{dbscan, DbscanResult, NOISE};
pub use kmeans::{kmeans, KMeansResult, KMEANS_RESTARTS};

use crate::error::{Error, Result};

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Z-scored copy of the points together with the statistics used.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub points: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Population standard deviation per dimension.
    pub std: Vec<f64>,
}

/// Per-dimension z-scores with population std; zero-variance dimensions map to 0.
pub fn standardize(points: &[Vec<f64>]) -> Result<Standardized> {
    let first = points
        .first()
        .ok_or_else(|| Error::Argument("cannot standardize an empty point set".into()))?;
    let dim = first.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Argument("points have mixed dimensions".into()));
    }
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for p in points {
        for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
    let out = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .zip(&std)
                .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(Standardized {
        points: out,
        mean,
        std,
    })
}

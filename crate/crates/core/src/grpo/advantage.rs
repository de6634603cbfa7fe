//! Returns-to-go, state-cluster baselines and group normalization.

use super::features::GroupAssignment;
use crate::clustering::{dbscan, standardize, NOISE};
use crate::error::{Error, Result};

/// `G_t = r_t + γ·G_{t+1}`, evaluated backward from the last step.
pub fn return_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Population mean and standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let var = if values.is_empty() {
        0.0
    } else {
        values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
    };
    (m, var.sqrt())
}

/// DBSCAN state clusters and the mean return-to-go inside each.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBaselines {
    /// Cluster per transition, [`NOISE`] for noise.
    pub labels: Vec<i64>,
    pub cluster_means: Vec<f64>,
    /// Baseline shared by all noise states.
    pub global_mean: f64,
}

impl StateBaselines {
    pub fn cluster_count(&self) -> usize {
        self.cluster_means.len()
    }

    pub fn noise_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == NOISE).count() as f64 / self.labels.len() as f64
    }

    pub fn baseline(&self, label: i64) -> Option<f64> {
        if label == NOISE {
            Some(self.global_mean)
        } else {
            usize::try_from(label).ok().and_then(|l| self.cluster_means.get(l).copied())
        }
    }
}

/// Clusters the pooled (standardized) states and averages returns per cluster.
pub fn state_baselines(states: &[Vec<f64>], returns: &[f64], eps: f64, min_pts: usize) -> Result<StateBaselines> {
    if states.len() != returns.len() {
        return Err(Error::Shape(format!(
            "{} states but {} returns",
            states.len(),
            returns.len()
        )));
    }
    if states.is_empty() {
        return Ok(StateBaselines {
            labels: vec![],
            cluster_means: vec![],
            global_mean: 0.0,
        });
    }
    let z = standardize(states)?;
    let clusters = dbscan(&z.points, eps, min_pts);
    let mut sums = vec![0.0; clusters.cluster_count];
    let mut counts = vec![0usize; clusters.cluster_count];
    for (&l, &g) in clusters.labels.iter().zip(returns) {
        if l != NOISE {
            sums[l as usize] += g;
            counts[l as usize] += 1;
        }
    }
    let cluster_means = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    Ok(StateBaselines {
        labels: clusters.labels,
        cluster_means,
        global_mean: mean(returns),
    })
}

/// `A = G − Ḡ_cluster(s)`
pub fn raw_advantages(returns: &[f64], labels: &[i64], baselines: &StateBaselines) -> Result<Vec<f64>> {
    if returns.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} returns but {} labels",
            returns.len(),
            labels.len()
        )));
    }
    returns
        .iter()
        .zip(labels)
        .map(|(&g, &l)| {
            baselines
                .baseline(l)
                .map(|b| g - b)
                .ok_or_else(|| Error::Internal(format!("no baseline for state cluster {l}")))
        })
        .collect()
}

/// One transition's advantage bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageRecord {
    pub policy_index: usize,
    pub step: usize,
    pub return_to_go: f64,
    pub state_cluster: i64,
    pub raw: f64,
    pub normalized: f64,
    pub group: usize,
}

impl AdvantageRecord {
    pub fn new(policy_index: usize, raw: f64) -> Self {
        AdvantageRecord {
            policy_index,
            step: 0,
            return_to_go: 0.0,
            state_cluster: NOISE,
            raw,
            normalized: 0.0,
            group: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    /// `μ_g` over all member transitions.
    pub mean: f64,
    /// `σ_g`, population standard deviation.
    pub std: f64,
    pub count: usize,
    /// `max |A − μ_g|` inside the group.
    pub max_abs_deviation: f64,
    pub max_abs_normalized: f64,
    pub normalized_mean: f64,
    pub normalized_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageBuffer {
    pub records: Vec<AdvantageRecord>,
    pub groups: Vec<GroupStats>,
    /// Population std of all raw advantages in the iteration.
    pub sigma_global: f64,
    pub delta: f64,
}

/// `Â = (A − μ_g)/(σ_g + δ)` with statistics pooled over every transition of
/// every member policy of group `g`.
pub fn group_normalize(
    mut records: Vec<AdvantageRecord>,
    groups: &GroupAssignment,
    delta: f64,
) -> Result<AdvantageBuffer> {
    let k = groups.num_groups();
    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); k];
    for r in &mut records {
        let g = *groups
            .group_of_policy
            .get(r.policy_index)
            .ok_or_else(|| Error::Internal(format!("policy {} has no group", r.policy_index)))?;
        r.group = g;
        per_group[g].push(r.raw);
    }
    let mut stats = Vec::with_capacity(k);
    for (g, values) in per_group.iter().enumerate() {
        if values.is_empty() {
            return Err(Error::Internal(format!("group {g} has no transitions")));
        }
        let (mu, sigma) = mean_std(values);
        stats.push(GroupStats {
            mean: mu,
            std: sigma,
            count: values.len(),
            max_abs_deviation: values.iter().map(|a| (a - mu).abs()).fold(0.0, f64::max),
            max_abs_normalized: 0.0,
            normalized_mean: 0.0,
            normalized_std: 0.0,
        });
    }
    let mut normalized: Vec<Vec<f64>> = vec![Vec::new(); k];
    for r in &mut records {
        let s = &stats[r.group];
        r.normalized = (r.raw - s.mean) / (s.std + delta);
        normalized[r.group].push(r.normalized);
    }
    for (s, values) in stats.iter_mut().zip(&normalized) {
        let (m, sd) = mean_std(values);
        s.normalized_mean = m;
        s.normalized_std = sd;
        s.max_abs_normalized = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    let all: Vec<f64> = records.iter().map(|r| r.raw).collect();
    let (_, sigma_global) = mean_std(&all);
    Ok(AdvantageBuffer {
        records,
        groups: stats,
        sigma_global,
        delta,
    })
}

/// `ε_g = ε_base · max(1, σ_g/σ_global)`; falls back to `ε_base` when `σ_global < δ`.
pub fn adaptive_clip(eps_base: f64, sigma_g: f64, sigma_global: f64, delta: f64) -> f64 {
    if sigma_global < delta {
        return eps_base;
    }
    eps_base * (sigma_g / sigma_global).max(1.0)
}

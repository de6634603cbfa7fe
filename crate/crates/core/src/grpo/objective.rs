//! Clipped group-normalized surrogate, regularizers and the combined loss.

use super::config::{GrpoConfig, Variant};
use crate::error::{Error, Result};
use crate::numerics::mlp_backward_into;
use crate::numerics::{gaussian_log_prob, log_prob_grad, mlp_forward, GaussianPolicy, GradientSet};

/// `min(r·Â, clip(r, 1−ε, 1+ε)·Â)`
pub fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> Result<f64> {
    if !ratio.is_finite() {
        return Err(Error::Numeric(format!("non-finite probability ratio {ratio}")));
    }
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    Ok((ratio * advantage).min(clipped * advantage))
}

/// Derivative of [`clipped_surrogate`] with respect to the ratio: `Â` while the
/// unclipped term is the minimum, zero once clipping takes over.
pub fn clipped_surrogate_slope(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    if ratio * advantage <= clipped * advantage {
        advantage
    } else {
        0.0
    }
}

/// `λ_s` times the mean L2 distance between consecutive policy outputs.
pub fn smoothness_penalty(mean_outputs: &[Vec<f64>], lambda_s: f64) -> f64 {
    if mean_outputs.len() < 2 || lambda_s == 0.0 {
        return 0.0;
    }
    let total: f64 = mean_outputs
        .windows(2)
        .map(|w| l2_dist(&w[1], &w[0]))
        .sum();
    lambda_s * total / (mean_outputs.len() - 1) as f64
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb))
}

/// `λ_d Σ_{i≠j} max(0, cos(μ_i, μ_j) − τ)` over ordered centroid pairs.
/// Pairs involving a zero-norm centroid contribute nothing.
pub fn diversity_penalty(centroids: &[Vec<f64>], tau: f64, lambda_d: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            if let Some(c) = cosine(&centroids[i], &centroids[j]) {
                total += 2.0 * (c - tau).max(0.0);
            }
        }
    }
    lambda_d * total
}

/// One transition as seen by the update step.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a [f64],
    pub action: &'a [f64],
    /// Log-density at collection time.
    pub old_log_prob: f64,
    /// Group-normalized advantage.
    pub advantage: f64,
    /// Clip width of the policy's group.
    pub clip: f64,
    /// Following state of the same trajectory, if any; feeds the smoothness term.
    pub next_state: Option<&'a [f64]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    /// Negated mean clipped surrogate.
    pub surrogate: f64,
    pub smoothness: f64,
    pub diversity: f64,
    pub total: f64,
}

/// Loss to minimize for one policy on one minibatch, and its gradient.
///
/// `diversity` is the iteration's diversity penalty; each policy carries a
/// `1/N` share. It depends only on k-means centroids, so it shifts the loss
/// value without contributing gradient. The simple variant drops both
/// regularizers.
pub fn total_loss(
    batch: &[Sample<'_>],
    policy: &GaussianPolicy,
    config: &GrpoConfig,
    diversity: f64,
    iteration: usize,
) -> Result<(LossBreakdown, GradientSet)> {
    let mut grads = policy.zero_gradient();
    if batch.is_empty() {
        return Ok((LossBreakdown::default(), grads));
    }
    let diverged = |detail: String| Error::Divergence { iteration, detail };
    let net = policy.mean_net();
    let regularize = config.variant == Variant::Full;
    let lambda_s = if regularize { config.lambda_s } else { 0.0 };
    let b = batch.len() as f64;
    let pairs = if lambda_s > 0.0 {
        batch.iter().filter(|s| s.next_state.is_some()).count()
    } else {
        0
    };

    let mut surrogate_sum = 0.0;
    let mut smooth_sum = 0.0;
    for s in batch {
        let (mean, cache) = mlp_forward(net, s.state)?;
        let log_prob = gaussian_log_prob(&mean, policy.log_std(), s.action)
            .map_err(|e| diverged(e.to_string()))?;
        let ratio = (log_prob - s.old_log_prob).exp();
        let objective = clipped_surrogate(ratio, s.advantage, s.clip).map_err(|e| diverged(e.to_string()))?;
        surrogate_sum += objective;

        // d(−objective/B)/d log π = −slope·r/B
        let coef = -clipped_surrogate_slope(ratio, s.advantage, s.clip) * ratio / b;
        if coef != 0.0 {
            let (d_mean, d_log_std) = log_prob_grad(&mean, policy.log_std(), s.action);
            mlp_backward_into(net, &cache, &d_mean, coef, &mut grads)?;
            for (g, d) in grads.log_std.iter_mut().zip(&d_log_std) {
                *g += coef * d;
            }
        }

        if pairs > 0 {
            if let Some(next) = s.next_state {
                let (next_mean, next_cache) = mlp_forward(net, next)?;
                let diff: Vec<f64> = next_mean.iter().zip(&mean).map(|(a, c)| a - c).collect();
                let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                smooth_sum += norm;
                if norm > 0.0 {
                    let unit: Vec<f64> = diff.iter().map(|v| v / norm).collect();
                    let scale = lambda_s / pairs as f64;
                    mlp_backward_into(net, &next_cache, &unit, scale, &mut grads)?;
                    mlp_backward_into(net, &cache, &unit, -scale, &mut grads)?;
                }
            }
        }
    }

    let surrogate = -surrogate_sum / b;
    let smoothness = if pairs > 0 { lambda_s * smooth_sum / pairs as f64 } else { 0.0 };
    let diversity = if regularize {
        diversity / config.num_policies as f64
    } else {
        0.0
    };
    let total = surrogate + smoothness + diversity;
    if !total.is_finite() {
        return Err(diverged(format!("non-finite loss {total}")));
    }
    if !grads.is_finite() {
        return Err(diverged("non-finite gradient".into()));
    }
    Ok((
        LossBreakdown {
            surrogate,
            smoothness,
            diversity,
            total,
        },
        grads,
    ))
}

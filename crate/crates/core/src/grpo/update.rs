//! Gradient step and reference-policy maintenance.

use crate::error::{Error, Result};
use crate::numerics::{GaussianPolicy, GradientSet};

/// Norms of one applied update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStep {
    /// Gradient norm before clipping.
    pub grad_norm: f64,
    /// Actual parameter displacement `‖θ_after − θ_before‖`, after the
    /// log-std clamp.
    pub param_change: f64,
}

/// `θ ← θ − α·clip(g, G_max)` followed by the log-std clamp.
pub fn update_policy(policy: &mut GaussianPolicy, mut grad: GradientSet, alpha: f64, g_max: f64) -> Result<UpdateStep> {
    if !grad.is_finite() {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    let before = policy.flat_params();
    let grad_norm = grad.clip_norm(g_max);
    policy.apply_step(&grad, alpha)?;
    let param_change = before
        .iter()
        .zip(policy.flat_params())
        .map(|(b, a)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(UpdateStep { grad_norm, param_change })
}

/// Indices of the top `⌈N/2⌉` policies by mean return; ties keep the lower index first.
pub fn top_policies(mean_returns: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mean_returns.len()).collect();
    order.sort_by(|&a, &b| mean_returns[b].total_cmp(&mean_returns[a]).then(a.cmp(&b)));
    order.truncate(mean_returns.len().div_ceil(2));
    order
}

/// Uniform parameter average of the top `⌈N/2⌉` policies.
pub fn update_reference(policies: &[GaussianPolicy], mean_returns: &[f64]) -> Result<GaussianPolicy> {
    if policies.is_empty() || policies.len() != mean_returns.len() {
        return Err(Error::Argument(format!(
            "{} policies with {} returns",
            policies.len(),
            mean_returns.len()
        )));
    }
    let top: Vec<&GaussianPolicy> = top_policies(mean_returns).into_iter().map(|i| &policies[i]).collect();
    GaussianPolicy::average(&top)
}

//! Runtime checks of the convergence assumptions: bounded rewards, bounded
//! normalized advantages, bounded per-step policy drift, a Robbins-Monro step
//! schedule, and a stationarity trend over gradient norms.

mod monitor;

pub use monitor::{ConvergenceReport, Monitor, StepCheck};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grpo::{learning_rate, AdvantageBuffer};

/// Slack added to the advantage bound to absorb rounding.
pub const ADVANTAGE_BOUND_SLACK: f64 = 1e-9;
/// Relative slack of the step bound.
pub const STEP_BOUND_SLACK: f64 = 1e-6;
/// Offset inside the log of [`stationarity_trend`].
pub const TREND_LOG_FLOOR: f64 = 1e-12;

/// `|r| ≤ r_max`, boundary inclusive.
pub fn check_reward_bound(reward: f64, r_max: f64) -> bool {
    reward.abs() <= r_max
}

/// Per group, `max|Â| ≤ max|A − μ_g|/(σ_g + δ)` plus a small slack.
///
/// Recomputed from the records so that a corrupted `Â` is caught even when the
/// cached group statistics are stale.
pub fn check_advantage_bound(buffer: &AdvantageBuffer) -> bool {
    advantage_bound_violations(buffer) == 0
}

/// Number of groups breaching the advantage bound.
pub fn advantage_bound_violations(buffer: &AdvantageBuffer) -> usize {
    let k = buffer.groups.len();
    let mut max_norm = vec![0.0f64; k];
    let mut max_dev = vec![0.0f64; k];
    for r in &buffer.records {
        let Some(stats) = buffer.groups.get(r.group) else {
            return k.max(1);
        };
        max_norm[r.group] = max_norm[r.group].max(r.normalized.abs());
        max_dev[r.group] = max_dev[r.group].max((r.raw - stats.mean).abs());
    }
    buffer
        .groups
        .iter()
        .enumerate()
        .filter(|(g, s)| {
            let bound = max_dev[*g] / (s.std + buffer.delta) + ADVANTAGE_BOUND_SLACK;
            !(max_norm[*g] <= bound)
        })
        .count()
}

/// Largest L2 distance between paired output vectors.
pub fn max_drift(before: &[Vec<f64>], after: &[Vec<f64>]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(b, a)| b.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `max drift ≤ α_k · G_max · L_net · (1 + 1e-6)` over the probe outputs.
pub fn check_step_bound(before: &[Vec<f64>], after: &[Vec<f64>], alpha: f64, g_max: f64, l_net: f64) -> bool {
    max_drift(before, after) <= alpha * g_max * l_net * (1.0 + STEP_BOUND_SLACK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    pub alpha0: f64,
    pub decay: f64,
    pub horizon: usize,
    pub positive: bool,
    pub strictly_decreasing: bool,
    /// `Σ α_k` over the horizon.
    pub sum_alpha: f64,
    /// `Σ α_k²` over the horizon.
    pub sum_alpha_sq: f64,
    /// `Σ α_k` diverges and `Σ α_k²` converges. Analytic for the harmonic
    /// form: holds exactly when the decay is positive.
    pub robbins_monro: bool,
}

/// Checks the harmonic step schedule over `horizon` iterations.
pub fn schedule_check(alpha0: f64, decay: f64, horizon: usize) -> Result<ScheduleReport> {
    if !(alpha0 > 0.0) || !alpha0.is_finite() {
        return Err(Error::Argument(format!("alpha0 must be positive, got {alpha0}")));
    }
    if !(decay >= 0.0) || !decay.is_finite() {
        return Err(Error::Argument(format!("decay must be non-negative, got {decay}")));
    }
    if horizon == 0 {
        return Err(Error::Argument("schedule horizon must be at least 1".into()));
    }
    let mut positive = true;
    let mut decreasing = true;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..horizon {
        let a = learning_rate(alpha0, decay, k);
        positive &= a > 0.0;
        decreasing &= a < prev;
        prev = a;
        sum += a;
        sum_sq += a * a;
    }
    Ok(ScheduleReport {
        alpha0,
        decay,
        horizon,
        positive,
        strictly_decreasing: decreasing,
        sum_alpha: sum,
        sum_alpha_sq: sum_sq,
        robbins_monro: positive && decay > 0.0,
    })
}

/// Least-squares slope of `ln(norm + 1e-12)` against iteration over the
/// trailing `window` entries.
pub fn stationarity_trend(history: &[f64], window: usize) -> Result<f64> {
    if window < 2 {
        return Err(Error::Argument("trend window must be at least 2".into()));
    }
    if window > history.len() {
        return Err(Error::Argument(format!(
            "trend window {window} exceeds history length {}",
            history.len()
        )));
    }
    let tail = &history[history.len() - window..];
    let n = window as f64;
    let x_mean = (n - 1.0) / 2.0;
    let ys: Vec<f64> = tail.iter().map(|g| (g + TREND_LOG_FLOOR).ln()).collect();
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

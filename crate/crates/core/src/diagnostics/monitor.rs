use serde::Serialize;

use super::{advantage_bound_violations, check_reward_bound, max_drift, stationarity_trend, ScheduleReport, STEP_BOUND_SLACK};
use crate::envs::Trajectory;
use crate::grpo::AdvantageBuffer;

/// Outcome of one per-update step-bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub drift: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Accumulates bound checks and per-iteration histories across a run.
///
/// Everything here is part of a checkpoint so that a resumed run reports the
/// same totals as an uninterrupted one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitor {
    /// Largest observed probe-output change per unit parameter change.
    pub l_net: f64,
    /// Mean pre-clip gradient norm of each iteration.
    pub grad_norms: Vec<f64>,
    /// Largest probe drift of a single update in each iteration.
    pub max_drifts: Vec<f64>,
    pub alphas: Vec<f64>,
    pub reward_violations: u64,
    pub advantage_violations: u64,
    pub step_violations: u64,
    pub steps_checked: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub grad_norms: Vec<f64>,
    pub max_drifts: Vec<f64>,
    pub alphas: Vec<f64>,
    pub reward_violations: u64,
    pub advantage_violations: u64,
    pub step_violations: u64,
    pub steps_checked: u64,
    pub l_net: f64,
    pub trend_window: usize,
    /// Slope of log gradient norm over the trailing window; absent with fewer
    /// than two iterations.
    pub trend_slope: Option<f64>,
    pub schedule: ScheduleReport,
}

impl ConvergenceReport {
    pub fn violations(&self) -> u64 {
        self.reward_violations + self.advantage_violations + self.step_violations
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl Monitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts rewards outside `[-r_max, r_max]`.
    pub fn record_rewards(&mut self, trajectories: &[Trajectory], r_max: f64) -> u64 {
        let bad = trajectories
            .iter()
            .flat_map(|t| &t.transitions)
            .filter(|t| !check_reward_bound(t.reward, r_max))
            .count() as u64;
        self.reward_violations += bad;
        bad
    }

    pub fn record_advantages(&mut self, buffer: &AdvantageBuffer) -> u64 {
        let bad = advantage_bound_violations(buffer) as u64;
        self.advantage_violations += bad;
        bad
    }

    /// Updates `L_net` with this step's ratio, then checks the drift bound.
    pub fn record_step(
        &mut self,
        before: &[Vec<f64>],
        after: &[Vec<f64>],
        param_change: f64,
        alpha: f64,
        g_max: f64,
    ) -> StepCheck {
        let drift = max_drift(before, after);
        if param_change > 0.0 {
            self.l_net = self.l_net.max(drift / param_change);
        }
        let bound = alpha * g_max * self.l_net;
        let ok = drift <= bound * (1.0 + STEP_BOUND_SLACK);
        self.steps_checked += 1;
        if !ok {
            self.step_violations += 1;
        }
        StepCheck { drift, bound, ok }
    }

    pub fn finish_iteration(&mut self, grad_norm: f64, max_drift: f64, alpha: f64) {
        self.grad_norms.push(grad_norm);
        self.max_drifts.push(max_drift);
        self.alphas.push(alpha);
    }

    pub fn report(&self, trend_window: usize, schedule: ScheduleReport) -> ConvergenceReport {
        let window = trend_window.min(self.grad_norms.len());
        ConvergenceReport {
            iterations: self.grad_norms.len(),
            grad_norms: self.grad_norms.clone(),
            max_drifts: self.max_drifts.clone(),
            alphas: self.alphas.clone(),
            reward_violations: self.reward_violations,
            advantage_violations: self.advantage_violations,
            step_violations: self.step_violations,
            steps_checked: self.steps_checked,
            l_net: self.l_net,
            trend_window: window,
            trend_slope: stationarity_trend(&self.grad_norms, window).ok(),
            schedule,
        }
    }
}

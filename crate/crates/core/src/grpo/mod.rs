//! Continuous group-relative policy optimization.

mod advantage;
mod config;
mod features;
mod objective;
mod trainer;
mod update;

pub use advantage::{
    adaptive_clip, group_normalize, raw_advantages, return_to_go, state_baselines, AdvantageBuffer, AdvantageRecord,
    GroupStats, StateBaselines,
};
pub use config::{learning_rate, GrpoConfig, Variant};
pub use features::{assign_groups, compute_features, GroupAssignment, TrajectoryFeatures};
pub use objective::{
    clipped_surrogate, clipped_surrogate_slope, diversity_penalty, smoothness_penalty, total_loss, LossBreakdown,
    Sample,
};
pub use trainer::{IterationMetrics, PolicyMetrics, Trainer, PROBE_COUNT};
pub use update::{top_policies, update_policy, update_reference, UpdateStep};

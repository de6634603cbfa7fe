//! Continuous group relative policy optimization.
//!
//! Several diagonal-Gaussian MLP policies are trained together. Each
//! iteration their trajectories are summarized into feature vectors and
//! grouped with k-means; visited states are clustered with DBSCAN to give
//! state-relative baselines; advantages are normalized within each policy
//! group and fed to a clipped surrogate with a group-adaptive clip width,
//! plus a temporal-smoothness and an inter-group diversity regularizer.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`] dense matrices, MLP forward/backward, Gaussian policy math
//! * [`envs`] deterministic point-mass and pendulum tasks, rollouts
//! * [`clustering`] standardization, k-means, DBSCAN
//! * [`grpo`] features, grouping, advantages, objective and the training loop
//! * [`diagnostics`] runtime bound checks and convergence reporting
//! * [`harness`] config files, metrics CSV, checkpoints, SVG plots, runners

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod diagnostics;
pub mod envs;
pub mod error;
pub mod grpo;
pub mod harness;
pub mod numerics;
pub mod rng;

pub use clustering::{dbscan, kmeans, standardize, DbscanResult, KMeansResult};
pub use envs::{EnvKind, EnvSpec, EnvState, Trajectory, Transition};
pub use error::{Error, Result};
pub use grpo::{GrpoConfig, IterationMetrics, Trainer, Variant};
pub use harness::RunConfig;
pub use numerics::{GaussianPolicy, GradientSet, Matrix, MlpParams};

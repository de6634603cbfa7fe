use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{LOG_STD_MAX, LOG_STD_MIN};

/// `full`: reference tracking, smoothness and diversity regularizers,
/// group-adaptive clipping. `simple`: plain clipped updates with a fixed clip
/// width and a frozen reference; clustering still runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    Simple,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Simple => "simple",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "simple" => Ok(Variant::Simple),
            other => Err(Error::Argument(format!("unknown variant '{other}' (expected full or simple)"))),
        }
    }
}

/// Algorithm hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GrpoConfig {
    /// Number of jointly trained policies (N).
    pub num_policies: usize,
    /// Number of k-means policy groups (K).
    pub num_groups: usize,
    pub gamma: f64,
    pub eps_base: f64,
    /// Stabilizer in the group normalization denominator.
    pub delta: f64,
    pub lambda_s: f64,
    pub lambda_d: f64,
    /// Cosine-similarity threshold of the diversity hinge.
    pub tau: f64,
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    /// Learning rate `α_k = alpha0 / (1 + lr_decay·k)`.
    pub alpha0: f64,
    pub lr_decay: f64,
    pub epochs_per_iter: usize,
    pub minibatch_size: usize,
    pub variant: Variant,
    /// Environment steps collected per policy per iteration.
    pub batch_timesteps: usize,
    pub seed: u64,
    pub hidden_sizes: Vec<usize>,
    pub init_log_std: f64,
    /// Global gradient-norm cap `G_max`.
    pub grad_clip: f64,
    pub kmeans_max_iters: usize,
    /// Worker threads for rollouts; results do not depend on it.
    pub rollout_threads: usize,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        GrpoConfig {
            num_policies: 2,
            num_groups: 2,
            gamma: 0.99,
            eps_base: 0.2,
            delta: 1e-8,
            lambda_s: 0.01,
            lambda_d: 0.01,
            tau: 0.9,
            dbscan_eps: 0.5,
            dbscan_min_pts: 5,
            alpha0: 3e-4,
            lr_decay: 1e-3,
            epochs_per_iter: 4,
            minibatch_size: 256,
            variant: Variant::Full,
            batch_timesteps: 2048,
            seed: 0,
            hidden_sizes: vec![64, 64],
            init_log_std: -0.5,
            grad_clip: 10.0,
            kmeans_max_iters: 100,
            rollout_threads: 1,
        }
    }
}

impl GrpoConfig {
    /// Every violated invariant, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                p.push(msg.to_string());
            }
        };
        check(self.num_policies >= 1, "num_policies must be at least 1");
        check(self.num_groups >= 1, "num_groups must be at least 1");
        check(self.num_groups <= self.num_policies, "num_groups must not exceed num_policies");
        check(self.gamma > 0.0 && self.gamma < 1.0, "gamma must lie in (0, 1)");
        check(self.eps_base > 0.0 && self.eps_base < 1.0, "eps_base must lie in (0, 1)");
        check(self.delta > 0.0, "delta must be positive");
        check(self.lambda_s >= 0.0, "lambda_s must be non-negative");
        check(self.lambda_d >= 0.0, "lambda_d must be non-negative");
        check((-1.0..=1.0).contains(&self.tau), "tau must lie in [-1, 1]");
        check(self.dbscan_eps > 0.0, "dbscan_eps must be positive");
        check(self.dbscan_min_pts >= 1, "dbscan_min_pts must be at least 1");
        check(self.alpha0 > 0.0, "alpha0 must be positive");
        check(self.lr_decay >= 0.0, "lr_decay must be non-negative");
        check(self.epochs_per_iter >= 1, "epochs_per_iter must be at least 1");
        check(self.minibatch_size >= 1, "minibatch_size must be at least 1");
        check(self.batch_timesteps >= 1, "batch_timesteps must be at least 1");
        check(
            !self.hidden_sizes.is_empty() && !self.hidden_sizes.contains(&0),
            "hidden_sizes must list at least one positive layer width",
        );
        check(
            (LOG_STD_MIN..=LOG_STD_MAX).contains(&self.init_log_std),
            "init_log_std must lie in [-5, 2]",
        );
        check(self.grad_clip > 0.0, "grad_clip must be positive");
        check(self.kmeans_max_iters >= 1, "kmeans_max_iters must be at least 1");
        check(self.rollout_threads >= 1, "rollout_threads must be at least 1");
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(p))
        }
    }

    /// Harmonic-decay step size for iteration `k` (0-based).
    pub fn alpha(&self, k: usize) -> f64 {
        learning_rate(self.alpha0, self.lr_decay, k)
    }
}

pub fn learning_rate(alpha0: f64, decay: f64, k: usize) -> f64 {
    alpha0 / (1.0 + decay * k as f64)
}

//! Flat `key = value` run configuration.
//!
//! ```text
//! # point-mass comparison run
//! env = point_mass
//! iterations = 200
//! alpha0 = 0.01
//! hidden_sizes = 64,64
//! variant = full
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::grpo::{GrpoConfig, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grpo: GrpoConfig,
    pub env: EnvKind,
    pub iterations: usize,
    pub eval_episodes: usize,
    pub out_dir: PathBuf,
    /// Periodic checkpoint interval in iterations; 0 keeps only the final one.
    pub checkpoint_every: usize,
    /// Write measured wall time into the metrics CSV. Off by default so that
    /// identical runs produce byte-identical files.
    pub record_wall_time: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grpo: GrpoConfig::default(),
            env: EnvKind::PointMass,
            iterations: 500,
            eval_episodes: 100,
            out_dir: PathBuf::from("runs/default"),
            checkpoint_every: 50,
            record_wall_time: false,
        }
    }
}

/// Every accepted key, in serialization order.
pub const CONFIG_KEYS: &[&str] = &[
    "env",
    "iterations",
    "eval_episodes",
    "out_dir",
    "checkpoint_every",
    "record_wall_time",
    "num_policies",
    "num_groups",
    "gamma",
    "eps_base",
    "delta",
    "lambda_s",
    "lambda_d",
    "tau",
    "dbscan_eps",
    "dbscan_min_pts",
    "alpha0",
    "lr_decay",
    "epochs_per_iter",
    "minibatch_size",
    "variant",
    "batch_timesteps",
    "seed",
    "hidden_sizes",
    "init_log_std",
    "grad_clip",
    "kmeans_max_iters",
    "rollout_threads",
];

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str, kind: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{key}: expected {kind}, got '{value}'"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Parse {
            line,
            message: format!("{key}: expected true or false, got '{value}'"),
        }),
    }
}

impl RunConfig {
    /// Applies one `key = value` pair. `line` is only used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let g = &mut self.grpo;
        match key {
            "env" => {
                self.env = value.parse().map_err(|e: Error| Error::Parse {
                    line,
                    message: e.to_string(),
                })?
            }
            "iterations" => self.iterations = parse_value(line, key, value, "an integer")?,
            "eval_episodes" => self.eval_episodes = parse_value(line, key, value, "an integer")?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "checkpoint_every" => self.checkpoint_every = parse_value(line, key, value, "an integer")?,
            "record_wall_time" => self.record_wall_time = parse_bool(line, key, value)?,
            "num_policies" => g.num_policies = parse_value(line, key, value, "an integer")?,
            "num_groups" => g.num_groups = parse_value(line, key, value, "an integer")?,
            "gamma" => g.gamma = parse_value(line, key, value, "a number")?,
            "eps_base" => g.eps_base = parse_value(line, key, value, "a number")?,
            "delta" => g.delta = parse_value(line, key, value, "a number")?,
            "lambda_s" => g.lambda_s = parse_value(line, key, value, "a number")?,
            "lambda_d" => g.lambda_d = parse_value(line, key, value, "a number")?,
            "tau" => g.tau = parse_value(line, key, value, "a number")?,
            "dbscan_eps" => g.dbscan_eps = parse_value(line, key, value, "a number")?,
            "dbscan_min_pts" => g.dbscan_min_pts = parse_value(line, key, value, "an integer")?,
            "alpha0" => g.alpha0 = parse_value(line, key, value, "a number")?,
            "lr_decay" => g.lr_decay = parse_value(line, key, value, "a number")?,
            "epochs_per_iter" => g.epochs_per_iter = parse_value(line, key, value, "an integer")?,
            "minibatch_size" => g.minibatch_size = parse_value(line, key, value, "an integer")?,
            "variant" => {
                g.variant = value.parse().map_err(|e: Error| Error::Parse {
                    line,
                    message: e.to_string(),
                })?
            }
            "batch_timesteps" => g.batch_timesteps = parse_value(line, key, value, "an integer")?,
            "seed" => g.seed = parse_value(line, key, value, "an integer")?,
            "hidden_sizes" => {
                g.hidden_sizes = value
                    .split(',')
                    .map(|v| parse_value(line, key, v.trim(), "a comma-separated list of integers"))
                    .collect::<Result<_>>()?
            }
            "init_log_std" => g.init_log_std = parse_value(line, key, value, "a number")?,
            "grad_clip" => g.grad_clip = parse_value(line, key, value, "a number")?,
            "kmeans_max_iters" => g.kmeans_max_iters = parse_value(line, key, value, "an integer")?,
            "rollout_threads" => g.rollout_threads = parse_value(line, key, value, "an integer")?,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
        Ok(())
    }

    /// Parses config text on top of the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut p = self.grpo.problems();
        if self.iterations < 1 {
            p.push("iterations must be at least 1".into());
        }
        if self.out_dir.as_os_str().is_empty() {
            p.push("out_dir must not be empty".into());
        }
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

    fn value_of(&self, key: &str) -> String {
        let g = &self.grpo;
        match key {
            "env" => self.env.to_string(),
            "iterations" => self.iterations.to_string(),
            "eval_episodes" => self.eval_episodes.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            "record_wall_time" => self.record_wall_time.to_string(),
            "num_policies" => g.num_policies.to_string(),
            "num_groups" => g.num_groups.to_string(),
            "gamma" => format!("{:?}", g.gamma),
            "eps_base" => format!("{:?}", g.eps_base),
            "delta" => format!("{:?}", g.delta),
            "lambda_s" => format!("{:?}", g.lambda_s),
            "lambda_d" => format!("{:?}", g.lambda_d),
            "tau" => format!("{:?}", g.tau),
            "dbscan_eps" => format!("{:?}", g.dbscan_eps),
            "dbscan_min_pts" => g.dbscan_min_pts.to_string(),
            "alpha0" => format!("{:?}", g.alpha0),
            "lr_decay" => format!("{:?}", g.lr_decay),
            "epochs_per_iter" => g.epochs_per_iter.to_string(),
            "minibatch_size" => g.minibatch_size.to_string(),
            "variant" => g.variant.to_string(),
            "batch_timesteps" => g.batch_timesteps.to_string(),
            "seed" => g.seed.to_string(),
            "hidden_sizes" => g
                .hidden_sizes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
            "init_log_std" => format!("{:?}", g.init_log_std),
            "grad_clip" => format!("{:?}", g.grad_clip),
            "kmeans_max_iters" => g.kmeans_max_iters.to_string(),
            "rollout_threads" => g.rollout_threads.to_string(),
            _ => unreachable!("key list and serializer out of sync"),
        }
    }

    /// Config text that parses back to an identical value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key} = {}", self.value_of(key));
        }
        out
    }

    /// Fingerprint of the settings that shape the training trajectory.
    /// Thread count, output location and run length are excluded, so a run
    /// can be resumed with a longer horizon or different parallelism.
    pub fn trajectory_hash(&self) -> String {
        let mut h = Sha256::new();
        for key in CONFIG_KEYS {
            if matches!(
                *key,
                "iterations" | "eval_episodes" | "out_dir" | "checkpoint_every" | "record_wall_time" | "rollout_threads"
            ) {
                continue;
            }
            h.update(format!("{key}={}\n", self.value_of(key)));
        }
        hex::encode(h.finalize())
    }

    /// Returns a copy with the variant switched.
    pub fn with_variant(&self, variant: Variant) -> Self {
        let mut c = self.clone();
        c.grpo.variant = variant;
        c
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::parse(&text)
}

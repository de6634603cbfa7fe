//! Versioned plain-text checkpoints.
//!
//! ```text
//! cgrpo-checkpoint v1
//! config_hash <sha256 hex>
//! env point_mass
//! next_iteration 50
//! layers 4 64 64 2
//! policies 2
//! monitor <l_net> <steps_checked> <reward_v> <advantage_v> <step_v> <history_len>
//! <grad_norm> <max_drift> <alpha>           one line per finished iteration
//! policy 0 <param_count>
//! <value>                                   one line per parameter
//! ...
//! reference <param_count>
//! ...
//! end
//! ```
//!
//! Floats are written with 17 significant digits, which restores every
//! IEEE-754 double exactly. Random streams are keyed by (seed, iteration, ...)
//! and carry no position, so nothing else is needed to resume bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::Monitor;
use crate::envs::{EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::numerics::{GaussianPolicy, Matrix, MlpParams};

const MAGIC: &str = "cgrpo-checkpoint v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub env: EnvKind,
    /// 0-based iteration a resumed run executes next.
    pub next_iteration: usize,
    pub policies: Vec<GaussianPolicy>,
    pub reference: GaussianPolicy,
    pub monitor: Monitor,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_policy(out: &mut String, tag: &str, p: &GaussianPolicy) {
    let flat = p.flat_params();
    let _ = writeln!(out, "{tag} {}", flat.len());
    for v in flat {
        let _ = writeln!(out, "{}", float(v));
    }
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let layers = self.reference.layer_sizes();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "config_hash {}", self.config_hash);
        let _ = writeln!(out, "env {}", self.env);
        let _ = writeln!(out, "next_iteration {}", self.next_iteration);
        let _ = writeln!(
            out,
            "layers {}",
            layers.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        );
        let _ = writeln!(out, "policies {}", self.policies.len());
        let m = &self.monitor;
        let _ = writeln!(
            out,
            "monitor {} {} {} {} {} {}",
            float(m.l_net),
            m.steps_checked,
            m.reward_violations,
            m.advantage_violations,
            m.step_violations,
            m.grad_norms.len()
        );
        for i in 0..m.grad_norms.len() {
            let _ = writeln!(
                out,
                "{} {} {}",
                float(m.grad_norms[i]),
                float(m.max_drifts[i]),
                float(m.alphas[i])
            );
        }
        for (i, p) in self.policies.iter().enumerate() {
            write_policy(&mut out, &format!("policy {i}"), p);
        }
        write_policy(&mut out, "reference", &self.reference);
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        if r.line()? != MAGIC {
            return Err(Error::Checkpoint("not a v1 checkpoint".into()));
        }
        let config_hash = r.field("config_hash")?.to_string();
        let env: EnvKind = r.field("env")?.parse().map_err(|e: Error| Error::Checkpoint(e.to_string()))?;
        let next_iteration = r.field_value("next_iteration")?;
        let layers: Vec<usize> = r
            .field("layers")?
            .split_whitespace()
            .map(|v| r.parse(v))
            .collect::<Result<_>>()?;
        if layers.len() < 3 {
            return Err(Error::Checkpoint("policies need at least one hidden layer".into()));
        }
        let spec = EnvSpec::from_kind(env);
        if layers[0] != spec.state_dim || layers[layers.len() - 1] != spec.action_dim {
            return Err(Error::Checkpoint(format!(
                "layer sizes {layers:?} do not fit environment {env}"
            )));
        }
        let count: usize = r.field_value("policies")?;
        let head: Vec<String> = r.field("monitor")?.split_whitespace().map(str::to_string).collect();
        if head.len() != 6 {
            return Err(Error::Checkpoint("malformed monitor line".into()));
        }
        let mut monitor = Monitor {
            l_net: r.parse(&head[0])?,
            steps_checked: r.parse(&head[1])?,
            reward_violations: r.parse(&head[2])?,
            advantage_violations: r.parse(&head[3])?,
            step_violations: r.parse(&head[4])?,
            ..Monitor::default()
        };
        let history: usize = r.parse(&head[5])?;
        for _ in 0..history {
            let vals: Vec<f64> = r.line()?.split_whitespace().map(|v| r.parse(v)).collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(Error::Checkpoint(format!("line {}: expected 3 values", r.pos)));
            }
            monitor.grad_norms.push(vals[0]);
            monitor.max_drifts.push(vals[1]);
            monitor.alphas.push(vals[2]);
        }
        let mut policies = Vec::with_capacity(count);
        for i in 0..count {
            policies.push(r.policy(&format!("policy {i}"), &layers)?);
        }
        let reference = r.policy("reference", &layers)?;
        if r.line()? != "end" {
            return Err(Error::Checkpoint("missing end marker".into()));
        }
        Ok(Checkpoint {
            config_hash,
            env,
            next_iteration,
            policies,
            reference,
            monitor,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Architecture with the given layer sizes, all parameters zero.
fn zero_policy(layers: &[usize]) -> Result<GaussianPolicy> {
    let weights = layers.windows(2).map(|w| Matrix::zeros(w[1], w[0])).collect();
    let biases = layers[1..].iter().map(|&n| vec![0.0; n]).collect();
    GaussianPolicy::new(MlpParams::new(weights, biases)?, vec![0.0; layers[layers.len() - 1]])
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines(),
            pos: 0,
        }
    }

    fn line(&mut self) -> Result<&'a str> {
        self.pos += 1;
        self.lines
            .next()
            .map(str::trim)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at line {}", self.pos)))
    }

    fn field(&mut self, name: &str) -> Result<&'a str> {
        let line = self.line()?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| Error::Checkpoint(format!("line {}: expected '{name}'", self.pos)))
    }

    fn field_value<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let v = self.field(name)?;
        self.parse(v)
    }

    fn parse<T: std::str::FromStr>(&self, v: &str) -> Result<T> {
        v.trim()
            .parse()
            .map_err(|_| Error::Checkpoint(format!("line {}: bad value '{v}'", self.pos)))
    }

    fn policy(&mut self, tag: &str, layers: &[usize]) -> Result<GaussianPolicy> {
        let mut p = zero_policy(layers)?;
        let n: usize = self.field_value(tag)?;
        if n != p.param_count() {
            return Err(Error::Checkpoint(format!(
                "{tag} has {n} parameters, architecture {layers:?} needs {}",
                p.param_count()
            )));
        }
        let flat = (0..n)
            .map(|_| {
                let l = self.line()?;
                self.parse::<f64>(l)
            })
            .collect::<Result<Vec<_>>>()?;
        p.set_flat_params(&flat)
            .map_err(|e| Error::Checkpoint(format!("{tag}: {e}")))?;
        Ok(p)
    }
}

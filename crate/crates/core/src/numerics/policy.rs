use rand::Rng;

use super::gaussian::{LOG_STD_MAX, LOG_STD_MIN};
use super::mlp::{mlp_output, GradientSet, MlpParams};
use crate::error::{Error, Result};

/// Gaussian actor: an MLP for the action mean and a state-independent log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    mean_net: MlpParams,
    log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new(mean_net: MlpParams, log_std: Vec<f64>) -> Result<Self> {
        if mean_net.num_layers() < 2 {
            return Err(Error::Shape("mean network needs at least one hidden layer".into()));
        }
        if mean_net.output_dim() != log_std.len() {
            return Err(Error::Shape(format!(
                "mean network outputs {} values but log_std has {}",
                mean_net.output_dim(),
                log_std.len()
            )));
        }
        if !mean_net.is_finite() || log_std.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite policy parameter".into()));
        }
        let mut p = GaussianPolicy { mean_net, log_std };
        p.clamp_log_std();
        Ok(p)
    }

    /// Fresh policy; output-layer weights are scaled by 0.01.
    pub fn init<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        init_log_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::Argument("at least one hidden layer is required".into()));
        }
        let sizes: Vec<usize> = std::iter::once(state_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(action_dim))
            .collect();
        let net = MlpParams::init(&sizes, 0.01, rng)?;
        Self::new(net, vec![init_log_std; action_dim])
    }

    pub fn mean_net(&self) -> &MlpParams {
        &self.mean_net
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    pub fn state_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    /// `f_θ(s)`, the action mean before sampling.
    pub fn mean(&self, state: &[f64]) -> Result<Vec<f64>> {
        mlp_output(&self.mean_net, state)
    }

    pub fn param_count(&self) -> usize {
        self.mean_net.param_count() + self.log_std.len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.mean_net.layer_sizes()
    }

    pub fn same_architecture(&self, other: &GaussianPolicy) -> bool {
        self.layer_sizes() == other.layer_sizes()
    }

    /// Network parameters followed by log-std.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = self.mean_net.flat_params();
        v.extend_from_slice(&self.log_std);
        v
    }

    /// Overwrites all parameters from a flat vector. Log-std is stored as given
    /// (no clamping), so finite-difference probes see the exact perturbation.
    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "{} values for {} policy parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let used = self.mean_net.set_flat_params(flat)?;
        self.log_std.copy_from_slice(&flat[used..]);
        Ok(())
    }

    pub fn zero_gradient(&self) -> GradientSet {
        GradientSet::zeros(&self.mean_net, self.log_std.len())
    }

    /// `θ ← θ − step·g`, then re-clamps log-std.
    pub fn apply_step(&mut self, grad: &GradientSet, step: f64) -> Result<()> {
        if grad.weights.len() != self.mean_net.num_layers() || grad.log_std.len() != self.log_std.len() {
            return Err(Error::Shape("gradient does not match policy".into()));
        }
        for (w, g) in self.mean_net.weights_mut().iter_mut().zip(&grad.weights) {
            if w.rows() != g.rows() || w.cols() != g.cols() {
                return Err(Error::Shape("gradient does not match policy".into()));
            }
            for (p, d) in w.data_mut().iter_mut().zip(g.data()) {
                *p -= step * d;
            }
        }
        for (b, g) in self.mean_net.biases_mut().iter_mut().zip(&grad.biases) {
            for (p, d) in b.iter_mut().zip(g) {
                *p -= step * d;
            }
        }
        for (p, d) in self.log_std.iter_mut().zip(&grad.log_std) {
            *p -= step * d;
        }
        self.clamp_log_std();
        Ok(())
    }

    pub fn clamp_log_std(&mut self) {
        for v in &mut self.log_std {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// Element-wise parameter average.
    pub fn average(policies: &[&GaussianPolicy]) -> Result<GaussianPolicy> {
        let first = policies
            .first()
            .ok_or_else(|| Error::Argument("cannot average zero policies".into()))?;
        if policies.iter().any(|p| !p.same_architecture(first)) {
            return Err(Error::Shape("policies differ in architecture".into()));
        }
        if policies.len() == 1 {
            return Ok((*first).clone());
        }
        let n = policies.len() as f64;
        let mut acc = vec![0.0; first.param_count()];
        for p in policies {
            for (a, v) in acc.iter_mut().zip(p.flat_params()) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        let mut out = (*first).clone();
        out.set_flat_params(&acc)?;
        out.clamp_log_std();
        Ok(out)
    }
}

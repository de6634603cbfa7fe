//! Diagonal Gaussian with state-independent log standard deviation.
//!
//! Functions take the mean already evaluated at a state, so they are shared
//! by the acting policy, the reference policy and the loss code.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

fn check_len(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("{what}: length {a} vs {b}")));
    }
    Ok(())
}

/// `Σ_i −½((a_i−μ_i)/σ_i)² − log σ_i − ½ log 2π`
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> Result<f64> {
    check_len("mean/log_std", mean.len(), log_std.len())?;
    check_len("mean/action", mean.len(), action.len())?;
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let mut lp = 0.0;
    for ((&m, &ls), &a) in mean.iter().zip(log_std).zip(action) {
        let z = (a - m) / ls.exp();
        lp += -0.5 * z * z - ls - half_log_2pi;
    }
    if !lp.is_finite() {
        return Err(Error::Numeric("non-finite log-probability".into()));
    }
    Ok(lp)
}

/// Derivatives of the log-density with respect to the mean and the log-std.
pub fn log_prob_grad(mean: &[f64], log_std: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = Vec::with_capacity(mean.len());
    let mut d_log_std = Vec::with_capacity(mean.len());
    for ((&m, &ls), &a) in mean.iter().zip(log_std).zip(action) {
        let inv_var = (-2.0 * ls).exp();
        let diff = a - m;
        d_mean.push(diff * inv_var);
        d_log_std.push(diff * diff * inv_var - 1.0);
    }
    (d_mean, d_log_std)
}

/// Closed-form differential entropy, `Σ_i ½ log(2πe) + log σ_i`.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    let half_log_2pie = 0.5 * (2.0 * PI * E).ln();
    log_std.iter().map(|ls| half_log_2pie + ls).sum()
}

/// `KL(p ‖ q)` between diagonal Gaussians.
///
/// Written as `½(ρ − 1 − ln ρ) + (μ_p−μ_q)²/(2σ_q²)` with `ρ = σ_p²/σ_q²`,
/// evaluated through `expm1` so the result is never negative.
pub fn gaussian_kl(mean_p: &[f64], log_std_p: &[f64], mean_q: &[f64], log_std_q: &[f64]) -> Result<f64> {
    check_len("p mean/log_std", mean_p.len(), log_std_p.len())?;
    check_len("q mean/log_std", mean_q.len(), log_std_q.len())?;
    check_len("p/q", mean_p.len(), mean_q.len())?;
    let mut kl = 0.0;
    for i in 0..mean_p.len() {
        let x = 2.0 * (log_std_p[i] - log_std_q[i]);
        let var_q = (2.0 * log_std_q[i]).exp();
        if var_q == 0.0 {
            return Err(Error::Numeric("zero variance in KL reference".into()));
        }
        let dm = mean_p[i] - mean_q[i];
        kl += 0.5 * (x.exp_m1() - x) + dm * dm / (2.0 * var_q);
    }
    if !kl.is_finite() {
        return Err(Error::Numeric("non-finite KL divergence".into()));
    }
    Ok(kl)
}

/// `μ + σ ⊙ z`, `z ~ N(0, I)` drawn from `rng`.
pub fn gaussian_sample<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: &mut R) -> Vec<f64> {
    mean.iter()
        .zip(log_std)
        .map(|(&m, &ls)| {
            let z: f64 = rng.sample(StandardNormal);
            m + ls.exp() * z
        })
        .collect()
}

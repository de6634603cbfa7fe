//! Central finite-difference gradient checking.
//!
//! Used by the test suite and available at runtime to audit the analytic
//! gradients along a training run.

use super::mlp::{mlp_backward, mlp_forward, MlpParams};
use crate::error::{Error, Result};

/// Denominator floor so that near-zero gradients are compared absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Central differences `(f(x+h·e_i) − f(x−h·e_i)) / 2h` for every coordinate.
pub fn central_differences<F>(x: &[f64], h: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step h = {h} must be positive")));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe)?;
        probe[i] = orig - h;
        let minus = f(&probe)?;
        probe[i] = orig;
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> Result<f64> {
    if analytic.len() != numeric.len() {
        return Err(Error::Shape(format!(
            "{} analytic vs {} numeric entries",
            analytic.len(),
            numeric.len()
        )));
    }
    Ok(analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max))
}

/// Largest relative error between backprop and central differences for
/// `θ ↦ ⟨mlp(θ; input), output_grad⟩` over every weight and bias.
pub fn check_mlp_gradient(params: &MlpParams, input: &[f64], output_grad: &[f64], h: f64) -> Result<f64> {
    let (_, cache) = mlp_forward(params, input)?;
    let grads = mlp_backward(params, &cache, output_grad)?;
    let mut analytic = grads.flat();
    analytic.truncate(params.param_count());

    let mut scratch = params.clone();
    let numeric = central_differences(&params.flat_params(), h, |theta| {
        scratch.set_flat_params(theta)?;
        let (y, _) = mlp_forward(&scratch, input)?;
        Ok(y.iter().zip(output_grad).map(|(a, b)| a * b).sum())
    })?;
    max_relative_error(&analytic, &numeric)
}

use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Fully connected network: tanh on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Per-layer values retained by [`mlp_forward`] for backprop.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    /// Post-activation of each hidden layer (tanh values), reused for the derivative.
    hidden: Vec<Vec<f64>>,
}

impl MlpParams {
    pub fn new(weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Shape(format!(
                "{} weight matrices and {} bias vectors",
                weights.len(),
                biases.len()
            )));
        }
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.rows() != b.len() {
                return Err(Error::Shape(format!(
                    "layer {i}: {} outputs but bias of length {}",
                    w.rows(),
                    b.len()
                )));
            }
            if i > 0 && weights[i - 1].rows() != w.cols() {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs, previous layer gives {}",
                    w.cols(),
                    weights[i - 1].rows()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite bias in layer {i}")));
            }
        }
        Ok(MlpParams { weights, biases })
    }

    /// Glorot-uniform weights, zero biases; the output layer is scaled by
    /// `output_scale` so that initial outputs sit near zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], output_scale: f64, rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Argument(format!("invalid layer sizes {sizes:?}")));
        }
        let n_layers = sizes.len() - 1;
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for (l, pair) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let scale = if l + 1 == n_layers { output_scale } else { 1.0 };
            let data = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit) * scale)
                .collect();
            weights.push(Matrix::from_vec(fan_out, fan_in, data)?);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpParams { weights, biases })
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].rows()
    }

    /// `[input, hidden.., output]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.weights.iter().map(Matrix::rows))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.rows() * w.cols() + w.rows())
            .sum()
    }

    /// Layer by layer: weights row-major, then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }

    /// Inverse of [`flat_params`](Self::flat_params); returns the number of values consumed.
    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<usize> {
        if flat.len() < self.param_count() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let mut off = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let n = w.data().len();
            w.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
            let m = b.len();
            b.copy_from_slice(&flat[off..off + m]);
            off += m;
        }
        Ok(off)
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.data().iter().all(|v| v.is_finite()))
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn mlp_forward(params: &MlpParams, input: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
    if input.len() != params.input_dim() {
        return Err(Error::Shape(format!(
            "input of length {} for a network expecting {}",
            input.len(),
            params.input_dim()
        )));
    }
    let last = params.num_layers() - 1;
    let mut inputs = Vec::with_capacity(params.num_layers());
    let mut hidden = Vec::with_capacity(last);
    let mut x = input.to_vec();
    for (l, (w, b)) in params.weights.iter().zip(&params.biases).enumerate() {
        let mut z = w.matvec(&x)?;
        for (zi, bi) in z.iter_mut().zip(b) {
            *zi += bi;
        }
        inputs.push(std::mem::take(&mut x));
        if l < last {
            z.iter_mut().for_each(|v| *v = v.tanh());
            hidden.push(z.clone());
        }
        x = z;
    }
    Ok((x, MlpCache { inputs, hidden }))
}

/// Output only, skipping the cache.
pub(crate) fn mlp_output(params: &MlpParams, input: &[f64]) -> Result<Vec<f64>> {
    mlp_forward(params, input).map(|(y, _)| y)
}

/// Gradient of `⟨output, output_grad⟩` with respect to every weight and bias.
/// The returned `log_std` part is zero (length = output dim).
pub fn mlp_backward(params: &MlpParams, cache: &MlpCache, output_grad: &[f64]) -> Result<GradientSet> {
    let mut grads = GradientSet::zeros(params, params.output_dim());
    mlp_backward_into(params, cache, output_grad, 1.0, &mut grads)?;
    Ok(grads)
}

/// Accumulates `scale ·` the gradient of `⟨output, output_grad⟩` into `grads`.
pub(crate) fn mlp_backward_into(
    params: &MlpParams,
    cache: &MlpCache,
    output_grad: &[f64],
    scale: f64,
    grads: &mut GradientSet,
) -> Result<()> {
    let n = params.num_layers();
    if cache.inputs.len() != n || cache.hidden.len() + 1 != n {
        return Err(Error::Shape("cache does not match network depth".into()));
    }
    if output_grad.len() != params.output_dim() {
        return Err(Error::Shape(format!(
            "output gradient of length {} for {} outputs",
            output_grad.len(),
            params.output_dim()
        )));
    }
    if grads.weights.len() != n {
        return Err(Error::Shape("gradient set does not match network depth".into()));
    }
    let mut delta = output_grad.to_vec();
    for l in (0..n).rev() {
        let x = &cache.inputs[l];
        if x.len() != params.weights[l].cols() {
            return Err(Error::Shape(format!("cached input for layer {l} has wrong length")));
        }
        grads.weights[l].add_outer(&delta, x, scale);
        for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
            *g += scale * d;
        }
        if l > 0 {
            let mut prev = params.weights[l].matvec_transposed(&delta)?;
            for (p, h) in prev.iter_mut().zip(&cache.hidden[l - 1]) {
                *p *= 1.0 - h * h;
            }
            delta = prev;
        }
    }
    Ok(())
}

/// Gradient with respect to a Gaussian policy: MLP weights and biases plus log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub log_std: Vec<f64>,
}

impl GradientSet {
    pub fn zeros(params: &MlpParams, log_std_len: usize) -> Self {
        GradientSet {
            weights: params
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            log_std: vec![0.0; log_std_len],
        }
    }

    /// Same ordering as [`GaussianPolicy::flat_params`](super::GaussianPolicy::flat_params).
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out.extend_from_slice(&self.log_std);
        out
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .flat_map(|w| w.data().iter())
            .chain(self.biases.iter().flatten())
            .chain(self.log_std.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .flat_map(|w| w.data_mut().iter_mut())
            .chain(self.biases.iter_mut().flatten())
            .chain(self.log_std.iter_mut())
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, s: f64) {
        self.values_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &GradientSet) -> Result<()> {
        if self.flat().len() != other.flat().len() {
            return Err(Error::Shape("gradient sets of different shapes".into()));
        }
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += b;
        }
        Ok(())
    }

    /// Rescales in place so the global norm is at most `max_norm`; returns the norm before clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self.scale(max_norm / n);
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_net() -> MlpParams {
        let w1 = Matrix::from_rows(&[
            vec![0.1, -0.2, 0.3],
            vec![0.4, 0.5, -0.6],
            vec![-0.7, 0.8, 0.9],
            vec![0.05, -0.15, 0.25],
        ])
        .unwrap();
        let b1 = vec![0.01, -0.02, 0.03, -0.04];
        let w2 = Matrix::from_rows(&[vec![0.3, -0.1, 0.2, 0.5], vec![-0.4, 0.6, -0.2, 0.1]]).unwrap();
        let b2 = vec![0.05, -0.05];
        MlpParams::new(vec![w1, w2], vec![b1, b2]).unwrap()
    }

    #[test]
    fn zero_network_gives_zero_output() {
        let p = MlpParams::new(
            vec![Matrix::zeros(5, 3), Matrix::zeros(2, 5)],
            vec![vec![0.0; 5], vec![0.0; 2]],
        )
        .unwrap();
        let (y, _) = mlp_forward(&p, &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn single_affine_layer() {
        let p = MlpParams::new(vec![Matrix::from_rows(&[vec![2.0]]).unwrap()], vec![vec![1.0]]).unwrap();
        let (y, cache) = mlp_forward(&p, &[3.0]).unwrap();
        assert_eq!(y, vec![7.0]);

        let g = mlp_backward(&p, &cache, &[0.5]).unwrap();
        assert_eq!(g.weights[0].data(), &[1.5]);
        assert_eq!(g.biases[0], vec![0.5]);
    }

    #[test]
    fn affine_gradient_is_outer_product() {
        let w = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let p = MlpParams::new(vec![w], vec![vec![0.0; 3]]).unwrap();
        let x = [0.5, -2.0];
        let g = [1.0, -1.0, 2.0];
        let (_, cache) = mlp_forward(&p, &x).unwrap();
        let grads = mlp_backward(&p, &cache, &g).unwrap();
        assert_eq!(grads.weights[0].data(), &[0.5, -2.0, -0.5, 2.0, 1.0, -4.0]);
        assert_eq!(grads.biases[0], g.to_vec());
    }

    #[test]
    fn two_layer_matches_hand_evaluation() {
        // Reference values evaluated layer by layer with numpy.
        let (y, _) = mlp_forward(&fixed_net(), &[0.5, -1.0, 2.0]).unwrap();
        assert!((y[0] - 0.748_793_694_647_607_3).abs() < 1e-14);
        assert!((y[1] - -0.935_876_993_637_277_7).abs() < 1e-14);
    }

    #[test]
    fn zero_cotangent_gives_zero_gradient() {
        let p = fixed_net();
        let (_, cache) = mlp_forward(&p, &[0.5, -1.0, 2.0]).unwrap();
        let g = mlp_backward(&p, &cache, &[0.0, 0.0]).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn shape_errors() {
        let p = fixed_net();
        assert!(matches!(mlp_forward(&p, &[1.0]), Err(Error::Shape(_))));
        let (_, cache) = mlp_forward(&p, &[0.5, -1.0, 2.0]).unwrap();
        assert!(matches!(mlp_backward(&p, &cache, &[1.0]), Err(Error::Shape(_))));
        assert!(MlpParams::new(vec![Matrix::zeros(2, 3), Matrix::zeros(1, 4)], vec![vec![0.0; 2], vec![0.0]]).is_err());
    }

    #[test]
    fn flat_roundtrip() {
        let p = fixed_net();
        let flat = p.flat_params();
        assert_eq!(flat.len(), p.param_count());
        let mut q = MlpParams::new(
            vec![Matrix::zeros(4, 3), Matrix::zeros(2, 4)],
            vec![vec![0.0; 4], vec![0.0; 2]],
        )
        .unwrap();
        assert_eq!(q.set_flat_params(&flat).unwrap(), flat.len());
        assert_eq!(p, q);
    }

    #[test]
    fn clip_norm_caps_global_norm() {
        let p = fixed_net();
        let mut g = GradientSet::zeros(&p, 2);
        g.log_std = vec![30.0, 40.0];
        let before = g.clip_norm(10.0);
        assert_eq!(before, 50.0);
        assert!((g.norm() - 10.0).abs() < 1e-12);
        assert!((g.log_std[0] - 6.0).abs() < 1e-12);
    }
}

//! Dense linear algebra, MLP passes and diagonal-Gaussian policy math.

mod gaussian;
pub mod gradcheck;
mod matrix;
mod mlp;
mod policy;

pub use gaussian::{
    gaussian_entropy, gaussian_kl, gaussian_log_prob, gaussian_sample, log_prob_grad,
    LOG_STD_MAX, LOG_STD_MIN,
};
pub use matrix::Matrix;
pub use mlp::{mlp_backward, mlp_forward, GradientSet, MlpCache, MlpParams};
pub(crate) use mlp::mlp_backward_into;
pub use policy::GaussianPolicy;

//! Per-policy trajectory features and k-means policy grouping.

use crate::clustering::{kmeans, standardize};
use crate::envs::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::{gaussian_entropy, gaussian_kl, GaussianPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryFeatures {
    /// Average per-step reward.
    pub mean_return: f64,
    pub entropy: f64,
    /// Mean over visited states of the summed per-dimension action variance.
    pub action_variance: f64,
    /// Mean over visited states of `KL(π ‖ π_ref)`.
    pub kl_to_ref: f64,
}

impl TrajectoryFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.mean_return, self.entropy, self.action_variance, self.kl_to_ref]
    }
}

/// Features of one policy from its trajectories of the current iteration.
///
/// Log-std is state-independent, so entropy and action variance are exact
/// closed forms; the KL term averages over the visited states using the
/// stored acting means and the reference mean at the same states.
pub fn compute_features(
    trajectories: &[Trajectory],
    policy: &GaussianPolicy,
    reference: &GaussianPolicy,
) -> Result<TrajectoryFeatures> {
    let steps = trajectories.iter().map(Trajectory::len).sum::<usize>();
    if steps == 0 {
        return Err(Error::Argument("cannot featurize an empty trajectory".into()));
    }
    let mut reward_sum = 0.0;
    let mut kl_sum = 0.0;
    for t in trajectories.iter().flat_map(|t| &t.transitions) {
        reward_sum += t.reward;
        let ref_mean = reference.mean(&t.state)?;
        kl_sum += gaussian_kl(&t.mean_output, policy.log_std(), &ref_mean, reference.log_std())?;
    }
    let n = steps as f64;
    Ok(TrajectoryFeatures {
        mean_return: reward_sum / n,
        entropy: gaussian_entropy(policy.log_std()),
        action_variance: policy.log_std().iter().map(|ls| (2.0 * ls).exp()).sum(),
        kl_to_ref: kl_sum / n,
    })
}

/// Partition of policies into groups plus the feature-space centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    pub group_of_policy: Vec<usize>,
    pub group_members: Vec<Vec<usize>>,
    /// Centroids in standardized feature space.
    pub centroids: Vec<Vec<f64>>,
}

impl GroupAssignment {
    pub fn num_groups(&self) -> usize {
        self.group_members.len()
    }

    /// Every policy in a single group; centroid at the standardized origin.
    pub fn single(num_policies: usize, dim: usize) -> Self {
        GroupAssignment {
            group_of_policy: vec![0; num_policies],
            group_members: vec![(0..num_policies).collect()],
            centroids: vec![vec![0.0; dim]],
        }
    }
}

/// Standardizes the feature vectors and clusters them with k-means.
pub fn assign_groups(
    features: &[TrajectoryFeatures],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<GroupAssignment> {
    if k > features.len() {
        return Err(Error::Argument(format!(
            "{k} groups requested for {} policies",
            features.len()
        )));
    }
    let raw: Vec<Vec<f64>> = features.iter().map(TrajectoryFeatures::to_vec).collect();
    let z = standardize(&raw)?;
    let km = kmeans(&z.points, k, seed, max_iters)?;
    let group_members = (0..k).map(|g| km.members(g)).collect();
    Ok(GroupAssignment {
        group_of_policy: km.assignments,
        group_members,
        centroids: km.centroids,
    })
}

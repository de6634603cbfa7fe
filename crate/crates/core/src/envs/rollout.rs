use rand::Rng;

use super::spec::{env_reset, env_step, EnvSpec};
use crate::error::{Error, Result};
use crate::numerics::{gaussian_log_prob, gaussian_sample, GaussianPolicy};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Observation the action was chosen from.
    pub state: Vec<f64>,
    /// Pre-clamp action sample.
    pub action: Vec<f64>,
    pub reward: f64,
    /// Log-density of `action` under the acting policy.
    pub log_prob: f64,
    /// `f_θ(state)` of the acting policy.
    pub mean_output: Vec<f64>,
    pub next_state: Vec<f64>,
}

/// One fixed-horizon episode of a single policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub policy_index: usize,
    pub transitions: Vec<Transition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    /// Undiscounted sum of rewards.
    pub fn episode_return(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

fn run_episode<R: Rng + ?Sized>(
    policy: &GaussianPolicy,
    spec: &EnvSpec,
    policy_index: usize,
    rng: &mut R,
    sample: bool,
) -> Result<Trajectory> {
    if policy.action_dim() != spec.action_dim || policy.state_dim() != spec.state_dim {
        return Err(Error::Shape(format!(
            "policy {}→{} does not fit environment {} ({}→{})",
            policy.state_dim(),
            policy.action_dim(),
            spec.kind,
            spec.state_dim,
            spec.action_dim
        )));
    }
    let mut state = env_reset(spec, rng);
    let mut obs = spec.observe(&state);
    let mut transitions = Vec::with_capacity(spec.horizon);
    loop {
        let mean = policy.mean(&obs)?;
        let action = if sample {
            gaussian_sample(&mean, policy.log_std(), rng)
        } else {
            mean.clone()
        };
        let log_prob = gaussian_log_prob(&mean, policy.log_std(), &action)?;
        let (next, reward, done) = env_step(spec, &state, &action)?;
        let next_obs = spec.observe(&next);
        transitions.push(Transition {
            state: std::mem::replace(&mut obs, next_obs.clone()),
            action,
            reward,
            log_prob,
            mean_output: mean,
            next_state: next_obs,
        });
        state = next;
        if done {
            break;
        }
    }
    Ok(Trajectory {
        policy_index,
        transitions,
    })
}

/// Resets the environment and runs the full horizon, sampling actions from `policy`.
pub fn rollout<R: Rng + ?Sized>(
    policy: &GaussianPolicy,
    spec: &EnvSpec,
    policy_index: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    run_episode(policy, spec, policy_index, rng, true)
}

pub fn rollout_seeded(policy: &GaussianPolicy, spec: &EnvSpec, seed: u64) -> Result<Trajectory> {
    rollout(policy, spec, 0, &mut stream(seed, Purpose::Rollout, &[]))
}

/// Deterministic evaluation episode: actions are the policy mean.
/// `rng` only drives the reset.
pub fn rollout_mean<R: Rng + ?Sized>(
    policy: &GaussianPolicy,
    spec: &EnvSpec,
    policy_index: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    run_episode(policy, spec, policy_index, rng, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, MlpParams, LOG_STD_MIN};

    fn zero_policy(sd: usize, ad: usize, log_std: f64) -> GaussianPolicy {
        let net = MlpParams::new(
            vec![Matrix::zeros(8, sd), Matrix::zeros(ad, 8)],
            vec![vec![0.0; 8], vec![0.0; ad]],
        )
        .unwrap();
        GaussianPolicy::new(net, vec![log_std; ad]).unwrap()
    }

    #[test]
    fn fixed_horizon_and_reproducible() {
        for spec in [EnvSpec::point_mass(), EnvSpec::pendulum()] {
            let p = GaussianPolicy::init(
                spec.state_dim,
                spec.action_dim,
                &[16, 16],
                -0.5,
                &mut stream(1, Purpose::Init, &[]),
            )
            .unwrap();
            let a = rollout_seeded(&p, &spec, 17).unwrap();
            let b = rollout_seeded(&p, &spec, 17).unwrap();
            assert_eq!(a.len(), spec.horizon);
            assert_eq!(a, b);
            let c = rollout_seeded(&p, &spec, 18).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn stored_log_probs_recompute() {
        let spec = EnvSpec::point_mass();
        let p = GaussianPolicy::init(4, 2, &[16, 16], -0.5, &mut stream(2, Purpose::Init, &[])).unwrap();
        let traj = rollout_seeded(&p, &spec, 3).unwrap();
        for t in &traj.transitions {
            let mean = p.mean(&t.state).unwrap();
            assert_eq!(mean, t.mean_output);
            let lp = gaussian_log_prob(&mean, p.log_std(), &t.action).unwrap();
            assert!((lp - t.log_prob).abs() < 1e-12);
        }
        for w in traj.transitions.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
        }
    }

    #[test]
    fn near_deterministic_zero_policy_stays_put() {
        let spec = EnvSpec::point_mass();
        let p = zero_policy(4, 2, LOG_STD_MIN);
        let traj = rollout_seeded(&p, &spec, 4).unwrap();
        let start = &traj.transitions[0].state;
        let end = &traj.transitions.last().unwrap().next_state;
        // Accelerations of ~0.007 for 5 s move the mass well under 0.1.
        assert!((start[0] - end[0]).abs() < 0.1 && (start[1] - end[1]).abs() < 0.1);
        assert_eq!(traj, rollout_seeded(&p, &spec, 4).unwrap());
    }

    #[test]
    fn mean_rollout_of_zero_policy_is_constant_penalty() {
        let spec = EnvSpec::point_mass();
        let p = zero_policy(4, 2, 0.0);
        let traj = rollout_mean(&p, &spec, 0, &mut stream(5, Purpose::Eval, &[])).unwrap();
        let s0 = &traj.transitions[0].state;
        let d2 = (s0[0] - 0.5).powi(2) + (s0[1] - 0.5).powi(2);
        assert!((traj.episode_return() - -(spec.horizon as f64) * d2).abs() < 1e-9);
    }

    #[test]
    fn mismatched_policy_is_rejected() {
        let p = zero_policy(3, 1, 0.0);
        assert!(matches!(rollout_seeded(&p, &EnvSpec::point_mass(), 0), Err(Error::Shape(_))));
    }
}

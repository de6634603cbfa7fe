//! One full training iteration over the policy population.

use std::time::Instant;

use rand::seq::SliceRandom;

use super::advantage::{
    adaptive_clip, group_normalize, raw_advantages, return_to_go, state_baselines, AdvantageBuffer, AdvantageRecord,
    GroupStats,
};
use super::config::{GrpoConfig, Variant};
use super::features::{assign_groups, compute_features};
use super::objective::{diversity_penalty, total_loss, Sample};
use super::update::{update_policy, update_reference};
use crate::diagnostics::Monitor;
use crate::envs::{env_reset, rollout, EnvSpec, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::GaussianPolicy;
use crate::rng::{stream, stream_key, Purpose};

/// Number of fixed probe states used for the step-bound check.
pub const PROBE_COUNT: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMetrics {
    pub policy_index: usize,
    /// Mean undiscounted episode return over this iteration's rollouts.
    pub mean_return: f64,
    /// Population std of the episode returns.
    pub std_return: f64,
    /// Loss components averaged over the iteration's minibatch updates.
    pub surrogate_loss: f64,
    pub smooth_loss: f64,
    pub diversity_loss: f64,
    pub group_index: usize,
    pub mu_g: f64,
    pub sigma_g: f64,
    pub eps_g: f64,
    /// Mean pre-clip gradient norm over the iteration's updates.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    /// 1-based.
    pub iteration: usize,
    pub policies: Vec<PolicyMetrics>,
    pub groups: Vec<GroupStats>,
    pub sigma_global: f64,
    /// Clip width per group.
    pub eps: Vec<f64>,
    pub diversity: f64,
    pub state_clusters: usize,
    pub noise_frac: f64,
    pub alpha_k: f64,
    pub max_drift: f64,
    pub reward_violations: u64,
    pub advantage_violations: u64,
    pub step_violations: u64,
    pub wall_ms: u64,
}

/// Policies, reference, probe states and monitor of a run in progress.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: GrpoConfig,
    env: EnvSpec,
    policies: Vec<GaussianPolicy>,
    reference: GaussianPolicy,
    next_iteration: usize,
    probes: Vec<Vec<f64>>,
    monitor: Monitor,
}

fn probe_states(env: &EnvSpec, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, Purpose::Probes, &[]);
    (0..PROBE_COUNT).map(|_| env.observe(&env_reset(env, &mut rng))).collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

impl Trainer {
    /// Fresh run: policies initialized from the run seed, reference taken as
    /// the top-half average with all returns tied (the lowest indices).
    pub fn new(config: GrpoConfig, env: EnvSpec) -> Result<Self> {
        config.validate()?;
        env.validate()?;
        let policies = (0..config.num_policies)
            .map(|i| {
                GaussianPolicy::init(
                    env.state_dim,
                    env.action_dim,
                    &config.hidden_sizes,
                    config.init_log_std,
                    &mut stream(config.seed, Purpose::Init, &[i as u64]),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = update_reference(&policies, &vec![0.0; policies.len()])?;
        Self::restore(config, env, policies, reference, 0, Monitor::new())
    }

    /// Rebuilds a run from saved state; `next_iteration` is 0-based.
    pub fn restore(
        config: GrpoConfig,
        env: EnvSpec,
        policies: Vec<GaussianPolicy>,
        reference: GaussianPolicy,
        next_iteration: usize,
        monitor: Monitor,
    ) -> Result<Self> {
        config.validate()?;
        env.validate()?;
        if policies.len() != config.num_policies {
            return Err(Error::Checkpoint(format!(
                "{} policies stored, configuration expects {}",
                policies.len(),
                config.num_policies
            )));
        }
        for p in policies.iter().chain(std::iter::once(&reference)) {
            if !p.same_architecture(&policies[0])
                || p.state_dim() != env.state_dim
                || p.action_dim() != env.action_dim
                || p.layer_sizes()[1..p.layer_sizes().len() - 1] != config.hidden_sizes[..]
            {
                return Err(Error::Checkpoint("policy architecture does not match configuration".into()));
            }
        }
        let probes = probe_states(&env, config.seed);
        Ok(Trainer {
            config,
            env,
            policies,
            reference,
            next_iteration,
            probes,
            monitor,
        })
    }

    pub fn config(&self) -> &GrpoConfig {
        &self.config
    }

    pub fn env(&self) -> &EnvSpec {
        &self.env
    }

    pub fn policies(&self) -> &[GaussianPolicy] {
        &self.policies
    }

    pub fn reference(&self) -> &GaussianPolicy {
        &self.reference
    }

    /// 0-based index of the iteration [`Trainer::train_iteration`] runs next.
    pub fn next_iteration(&self) -> usize {
        self.next_iteration
    }

    pub fn monitor(&self) -> &Monitor {
        &self.monitor
    }

    pub fn probes(&self) -> &[Vec<f64>] {
        &self.probes
    }

    pub fn episodes_per_policy(&self) -> usize {
        self.config.batch_timesteps.div_ceil(self.env.horizon)
    }

    /// Rollouts for every policy; each episode draws from its own stream, so
    /// the result is independent of the thread count.
    fn collect(&self, k: usize) -> Result<Vec<Vec<Trajectory>>> {
        let episodes = self.episodes_per_policy();
        let jobs: Vec<(usize, usize)> = (0..self.policies.len())
            .flat_map(|i| (0..episodes).map(move |e| (i, e)))
            .collect();
        let run = |&(i, e): &(usize, usize)| {
            let mut rng = stream(self.config.seed, Purpose::Rollout, &[i as u64, k as u64, e as u64]);
            rollout(&self.policies[i], &self.env, i, &mut rng)
        };
        let threads = self.config.rollout_threads.min(jobs.len()).max(1);
        let flat: Vec<Trajectory> = if threads == 1 {
            jobs.iter().map(run).collect::<Result<_>>()?
        } else {
            let chunk = jobs.len().div_ceil(threads);
            std::thread::scope(|s| {
                let handles: Vec<_> = jobs
                    .chunks(chunk)
                    .map(|c| s.spawn(move || c.iter().map(run).collect::<Result<Vec<_>>>()))
                    .collect();
                let mut out = Vec::with_capacity(jobs.len());
                for h in handles {
                    out.extend(h.join().map_err(|_| Error::Internal("rollout worker panicked".into()))??);
                }
                Ok::<_, Error>(out)
            })?
        };
        let mut per_policy: Vec<Vec<Trajectory>> = vec![Vec::with_capacity(episodes); self.policies.len()];
        for t in flat {
            per_policy[t.policy_index].push(t);
        }
        Ok(per_policy)
    }

    /// Runs one iteration: rollouts, grouping, advantages, updates and the
    /// reference refresh. Numeric failures surface as [`Error::Divergence`].
    pub fn train_iteration(&mut self) -> Result<IterationMetrics> {
        let k = self.next_iteration;
        let number = k + 1;
        let started = Instant::now();
        let diverged = |e: Error| match e {
            Error::Numeric(detail) | Error::Shape(detail) => Error::Divergence { iteration: number, detail },
            other => other,
        };
        let cfg = self.config.clone();
        let n = self.policies.len();

        let trajectories = self.collect(k).map_err(diverged)?;
        let all: Vec<Trajectory> = trajectories.iter().flatten().cloned().collect();
        let reward_violations = self.monitor.record_rewards(&all, self.env.reward_bound());

        let features = (0..n)
            .map(|i| compute_features(&trajectories[i], &self.policies[i], &self.reference))
            .collect::<Result<Vec<_>>>()
            .map_err(diverged)?;
        let cluster_seed = stream_key(cfg.seed, Purpose::PolicyClusters, &[k as u64]);
        let groups = assign_groups(&features, cfg.num_groups, cluster_seed, cfg.kmeans_max_iters)?;

        let mut states = Vec::new();
        let mut returns = Vec::new();
        let mut records = Vec::new();
        for traj in &all {
            let rtg = return_to_go(&traj.rewards(), cfg.gamma);
            for (t, (tr, g)) in traj.transitions.iter().zip(&rtg).enumerate() {
                states.push(tr.state.clone());
                returns.push(*g);
                let mut r = AdvantageRecord::new(traj.policy_index, 0.0);
                r.step = t;
                r.return_to_go = *g;
                records.push(r);
            }
        }
        let baselines = state_baselines(&states, &returns, cfg.dbscan_eps, cfg.dbscan_min_pts)?;
        let raw = raw_advantages(&returns, &baselines.labels, &baselines)?;
        for ((r, a), l) in records.iter_mut().zip(raw).zip(&baselines.labels) {
            r.raw = a;
            r.state_cluster = *l;
        }
        let buffer = group_normalize(records, &groups, cfg.delta)?;
        let advantage_violations = self.monitor.record_advantages(&buffer);

        let eps: Vec<f64> = buffer
            .groups
            .iter()
            .map(|g| match cfg.variant {
                Variant::Full => adaptive_clip(cfg.eps_base, g.std, buffer.sigma_global, cfg.delta),
                Variant::Simple => cfg.eps_base,
            })
            .collect();
        let diversity = match cfg.variant {
            Variant::Full => diversity_penalty(&groups.centroids, cfg.tau, cfg.lambda_d),
            Variant::Simple => 0.0,
        };

        let alpha = cfg.alpha(k);
        let steps_before = self.monitor.step_violations;
        let mut policy_metrics = Vec::with_capacity(n);
        let mut iteration_norms = Vec::new();
        let mut iteration_drift = 0.0f64;
        let mut offset = 0;
        for i in 0..n {
            let g = groups.group_of_policy[i];
            let samples = self.samples(&trajectories[i], &buffer, offset, eps[g]);
            offset += samples.len();
            let mut sums = [0.0; 3];
            let mut norms = Vec::new();
            let mut probe_out = self.probe_outputs(i)?;
            for epoch in 0..cfg.epochs_per_iter {
                let mut order: Vec<usize> = (0..samples.len()).collect();
                order.shuffle(&mut stream(cfg.seed, Purpose::Shuffle, &[k as u64, i as u64, epoch as u64]));
                for chunk in order.chunks(cfg.minibatch_size) {
                    let batch: Vec<Sample<'_>> = chunk.iter().map(|&j| samples[j]).collect();
                    let (loss, grad) = total_loss(&batch, &self.policies[i], &cfg, diversity, number)?;
                    let step = update_policy(&mut self.policies[i], grad, alpha, cfg.grad_clip).map_err(diverged)?;
                    let after = self.probe_outputs(i)?;
                    if !self.policies[i].mean_net().is_finite() || after.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(Error::Divergence {
                            iteration: number,
                            detail: format!("policy {i} became non-finite after an update"),
                        });
                    }
                    let check = self
                        .monitor
                        .record_step(&probe_out, &after, step.param_change, alpha, cfg.grad_clip);
                    if !check.ok {
                        log::warn!(
                            "iteration {number}: policy {i} drift {:.3e} exceeds bound {:.3e}",
                            check.drift,
                            check.bound
                        );
                    }
                    iteration_drift = iteration_drift.max(check.drift);
                    probe_out = after;
                    sums[0] += loss.surrogate;
                    sums[1] += loss.smoothness;
                    sums[2] += loss.diversity;
                    norms.push(step.grad_norm);
                }
            }
            let updates = norms.len().max(1) as f64;
            let episode_returns: Vec<f64> = trajectories[i].iter().map(Trajectory::episode_return).collect();
            let (mean_return, std_return) = mean_std(&episode_returns);
            let stats = &buffer.groups[g];
            policy_metrics.push(PolicyMetrics {
                policy_index: i,
                mean_return,
                std_return,
                surrogate_loss: sums[0] / updates,
                smooth_loss: sums[1] / updates,
                diversity_loss: sums[2] / updates,
                group_index: g,
                mu_g: stats.mean,
                sigma_g: stats.std,
                eps_g: eps[g],
                grad_norm: norms.iter().sum::<f64>() / updates,
            });
            iteration_norms.extend(norms);
        }

        if cfg.variant == Variant::Full {
            let returns: Vec<f64> = policy_metrics.iter().map(|m| m.mean_return).collect();
            self.reference = update_reference(&self.policies, &returns)?;
        }

        let mean_norm = iteration_norms.iter().sum::<f64>() / iteration_norms.len().max(1) as f64;
        self.monitor.finish_iteration(mean_norm, iteration_drift, alpha);
        self.next_iteration += 1;
        Ok(IterationMetrics {
            iteration: number,
            policies: policy_metrics,
            groups: buffer.groups.clone(),
            sigma_global: buffer.sigma_global,
            eps,
            diversity,
            state_clusters: baselines.cluster_count(),
            noise_frac: baselines.noise_fraction(),
            alpha_k: alpha,
            max_drift: iteration_drift,
            reward_violations,
            advantage_violations,
            step_violations: self.monitor.step_violations - steps_before,
            wall_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn probe_outputs(&self, policy: usize) -> Result<Vec<Vec<f64>>> {
        self.probes.iter().map(|s| self.policies[policy].mean(s)).collect()
    }

    /// Training samples of one policy; `offset` locates its records in the buffer.
    fn samples<'a>(
        &self,
        trajectories: &'a [Trajectory],
        buffer: &AdvantageBuffer,
        offset: usize,
        clip: f64,
    ) -> Vec<Sample<'a>> {
        let mut out = Vec::new();
        let mut idx = offset;
        for traj in trajectories {
            let last = traj.len() - 1;
            for (t, tr) in traj.transitions.iter().enumerate() {
                out.push(Sample {
                    state: &tr.state,
                    action: &tr.action,
                    old_log_prob: tr.log_prob,
                    advantage: buffer.records[idx].normalized,
                    clip,
                    next_state: (t < last).then_some(tr.next_state.as_slice()),
                });
                idx += 1;
            }
        }
        out
    }
}

mod common;

use cgrpo_core::clustering::{dbscan, NOISE};
use cgrpo_core::diagnostics::Monitor;
use cgrpo_core::envs::{env_reset, env_step, EnvKind, EnvSpec, EnvState};
use cgrpo_core::grpo::{
    adaptive_clip, clipped_surrogate, group_normalize, learning_rate, return_to_go, update_reference,
    AdvantageRecord, GroupAssignment, GrpoConfig, Variant,
};
use cgrpo_core::harness::{Checkpoint, RunConfig};
use cgrpo_core::numerics::{gaussian_kl, GaussianPolicy};
use cgrpo_core::rng::{stream, Purpose};
use proptest::prelude::*;

fn vec_of(len: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, len)
}

fn policy(seed: u64, log_std: f64) -> GaussianPolicy {
    GaussianPolicy::init(4, 2, &[4], log_std, &mut stream(seed, Purpose::Init, &[])).unwrap()
}

proptest! {
    #[test]
    fn kl_is_nonnegative_and_zero_on_self(
        (mp, lp, mq, lq) in (1usize..5).prop_flat_map(|d| (vec_of(d, -3.0, 3.0), vec_of(d, -2.0, 1.0), vec_of(d, -3.0, 3.0), vec_of(d, -2.0, 1.0)))
    ) {
        prop_assert!(gaussian_kl(&mp, &lp, &mq, &lq).unwrap() >= -1e-12);
        prop_assert!(gaussian_kl(&mp, &lp, &mp, &lp).unwrap().abs() < 1e-12);
    }

    #[test]
    fn surrogate_is_flat_outside_trust_region(r in 0.0f64..3.0, adv in -5.0f64..5.0, eps in 0.05f64..0.5, bump in 0.0f64..1.0) {
        let v = clipped_surrogate(r, adv, eps).unwrap();
        prop_assert!(v <= r * adv + 1e-12);
        if adv > 0.0 && r >= 1.0 + eps {
            prop_assert_eq!(clipped_surrogate(r + bump, adv, eps).unwrap(), v);
        }
        if adv < 0.0 && r <= 1.0 - eps {
            prop_assert_eq!(clipped_surrogate((r - bump).max(0.0), adv, eps).unwrap(), v);
        }
    }

    #[test]
    fn group_normalization_standardizes(
        raw in prop::collection::vec((0usize..4, -100.0f64..100.0), 4..60),
        split in 1usize..3,
    ) {
        // Policies 0..split form group 0, the rest group 1; ensure both groups are populated.
        let mut raw = raw;
        raw.extend((0..4).map(|p| (p, p as f64)));
        let group_of_policy: Vec<usize> = (0..4).map(|p| usize::from(p >= split)).collect();
        let group_members = vec![(0..split).collect(), (split..4).collect()];
        let groups = GroupAssignment { group_of_policy, group_members, centroids: vec![vec![0.0], vec![1.0]] };
        let delta = 1e-8;
        let recs: Vec<AdvantageRecord> = raw.iter().map(|&(p, a)| AdvantageRecord::new(p, a)).collect();
        let buf = group_normalize(recs, &groups, delta).unwrap();
        for s in &buf.groups {
            prop_assert!(s.normalized_mean.abs() < 1e-6);
            if s.std > 10.0 * delta {
                prop_assert!((s.normalized_std - 1.0).abs() < 1e-3);
            }
            prop_assert!(s.max_abs_normalized <= s.max_abs_deviation / (s.std + delta) + 1e-9);
            let eps = adaptive_clip(0.2, s.std, buf.sigma_global, delta);
            prop_assert!(eps >= 0.2);
        }
    }

    #[test]
    fn return_to_go_satisfies_recurrence(rewards in prop::collection::vec(-10.0f64..10.0, 1..50), gamma in 0.0f64..1.0) {
        let g = return_to_go(&rewards, gamma);
        let n = rewards.len();
        prop_assert_eq!(g[n - 1], rewards[n - 1]);
        for t in 0..n - 1 {
            prop_assert!((g[t] - (rewards[t] + gamma * g[t + 1])).abs() < 1e-9);
        }
    }

    #[test]
    fn learning_rate_is_positive_and_nonincreasing(alpha0 in 1e-6f64..1.0, decay in 0.0f64..1.0, k in 0usize..10_000) {
        let a = learning_rate(alpha0, decay, k);
        prop_assert!(a > 0.0 && a <= alpha0);
        prop_assert!(learning_rate(alpha0, decay, k + 1) <= a);
    }

    #[test]
    fn reference_ignores_positive_affine_rescaling(
        returns in prop::collection::vec(-50i32..50, 2..6),
        scale in 1i32..5,
        shift in -100i32..100,
    ) {
        let policies: Vec<GaussianPolicy> = (0..returns.len() as u64).map(|s| policy(s, -0.5)).collect();
        let base: Vec<f64> = returns.iter().map(|&r| r as f64).collect();
        let moved: Vec<f64> = returns.iter().map(|&r| (scale * r + shift) as f64).collect();
        prop_assert_eq!(update_reference(&policies, &base).unwrap(), update_reference(&policies, &moved).unwrap());
    }

    #[test]
    fn rewards_stay_within_bound(seed in 0u64..1000, actions in prop::collection::vec(-5.0f64..5.0, 40)) {
        for spec in [EnvSpec::point_mass(), EnvSpec::pendulum()] {
            let mut s: EnvState = env_reset(&spec, &mut stream(seed, Purpose::Eval, &[]));
            for chunk in actions.chunks(spec.action_dim) {
                let (next, r, _) = env_step(&spec, &s, chunk).unwrap();
                prop_assert!(r.abs() <= spec.reward_bound());
                prop_assert!(next.x.iter().all(|v| v.is_finite()));
                s = next;
            }
        }
    }

    #[test]
    fn dbscan_core_and_noise_survive_permutation(seed in 0u64..500, n in 1usize..30, eps in 0.1f64..1.0, min_pts in 1usize..5) {
        let pts = common::uniform_points(seed, n, 2);
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left(seed as usize % n);
        order.reverse();
        let permuted: Vec<Vec<f64>> = order.iter().map(|&i| pts[i].clone()).collect();
        let a = dbscan(&pts, eps, min_pts);
        let b = dbscan(&permuted, eps, min_pts);
        let oracle = common::dbscan_oracle(&pts, eps, min_pts);
        prop_assert_eq!(a.cluster_count, b.cluster_count);
        for (j, &i) in order.iter().enumerate() {
            if oracle.core[i] {
                prop_assert!(a.labels[i] != NOISE && b.labels[j] != NOISE);
            }
            prop_assert_eq!(a.labels[i] == NOISE, b.labels[j] == NOISE);
        }
    }

    #[test]
    fn config_text_round_trips(
        n in 1usize..6,
        alpha0 in 1e-6f64..1.0,
        gamma in 0.5f64..1.0,
        seed in any::<u64>(),
        simple in any::<bool>(),
        hidden in prop::collection::vec(1usize..80, 1..4),
    ) {
        let cfg = RunConfig {
            grpo: GrpoConfig {
                num_policies: n,
                num_groups: 1,
                alpha0,
                gamma,
                seed,
                variant: if simple { Variant::Simple } else { Variant::Full },
                hidden_sizes: hidden,
                ..GrpoConfig::default()
            },
            env: EnvKind::Pendulum,
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.trajectory_hash(), cfg.trajectory_hash());
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn checkpoint_text_round_trips(seeds in prop::collection::vec(any::<u64>(), 1..4), log_std in -3.0f64..1.0, next in 0usize..1000) {
        let policies: Vec<GaussianPolicy> = seeds.iter().map(|&s| policy(s, log_std)).collect();
        let mut monitor = Monitor::new();
        monitor.l_net = log_std.exp();
        let ckpt = Checkpoint {
            config_hash: "abc".into(),
            env: EnvKind::PointMass,
            next_iteration: next,
            reference: policies[0].clone(),
            policies,
            monitor,
        };
        let text = ckpt.to_text();
        let back = Checkpoint::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, ckpt);
    }
}

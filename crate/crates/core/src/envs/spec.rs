use rand::Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    PointMass,
    Pendulum,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::PointMass => "point_mass",
            EnvKind::Pendulum => "pendulum",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point_mass" => Ok(EnvKind::PointMass),
            "pendulum" => Ok(EnvKind::Pendulum),
            other => Err(Error::Argument(format!(
                "unknown environment '{other}' (expected point_mass or pendulum)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    PointMass {
        goal: [f64; 2],
        control_cost: f64,
    },
    Pendulum {
        gravity: f64,
        mass: f64,
        length: f64,
        max_speed: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub dt: f64,
    pub horizon: usize,
    pub dynamics: Dynamics,
}

impl EnvSpec {
    pub fn point_mass() -> Self {
        EnvSpec {
            kind: EnvKind::PointMass,
            state_dim: 4,
            action_dim: 2,
            action_low: vec![-1.0; 2],
            action_high: vec![1.0; 2],
            dt: 0.05,
            horizon: 100,
            dynamics: Dynamics::PointMass {
                goal: [0.5, 0.5],
                control_cost: 0.01,
            },
        }
    }

    pub fn pendulum() -> Self {
        EnvSpec {
            kind: EnvKind::Pendulum,
            state_dim: 3,
            action_dim: 1,
            action_low: vec![-2.0],
            action_high: vec![2.0],
            dt: 0.05,
            horizon: 200,
            dynamics: Dynamics::Pendulum {
                gravity: 10.0,
                mass: 1.0,
                length: 1.0,
                max_speed: 8.0,
            },
        }
    }

    pub fn from_kind(kind: EnvKind) -> Self {
        match kind {
            EnvKind::PointMass => Self::point_mass(),
            EnvKind::Pendulum => Self::pendulum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.horizon == 0 {
            problems.push("horizon must be at least 1".to_string());
        }
        if !(self.dt > 0.0) {
            problems.push("dt must be positive".to_string());
        }
        if self.action_low.len() != self.action_dim || self.action_high.len() != self.action_dim {
            problems.push("action bounds do not match action_dim".to_string());
        }
        if self.action_low.iter().zip(&self.action_high).any(|(l, h)| !(l < h)) {
            problems.push("action_low must be below action_high".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Largest possible `|r|` for a single step.
    pub fn reward_bound(&self) -> f64 {
        match self.dynamics {
            Dynamics::PointMass { control_cost, .. } => {
                let diameter_sq = 8.0; // (2√2)² for the box [−1, 1]²
                let max_action_sq: f64 = self
                    .action_low
                    .iter()
                    .zip(&self.action_high)
                    .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                    .sum();
                diameter_sq + control_cost * max_action_sq
            }
            Dynamics::Pendulum { max_speed, .. } => {
                let max_torque = self.action_high[0].abs().max(self.action_low[0].abs());
                PI * PI + 0.1 * max_speed * max_speed + 0.001 * max_torque * max_torque
            }
        }
    }

    /// Maps the internal state to the observation the policy sees.
    pub fn observe(&self, state: &EnvState) -> Vec<f64> {
        match self.kind {
            EnvKind::PointMass => state.x.clone(),
            EnvKind::Pendulum => {
                let (theta, omega) = (state.x[0], state.x[1]);
                vec![theta.cos(), theta.sin(), omega]
            }
        }
    }

    pub fn clamp_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.action_low.iter().zip(&self.action_high))
            .map(|(&a, (&lo, &hi))| a.clamp(lo, hi))
            .collect()
    }
}

/// Internal physical state plus step counter.
///
/// `point_mass`: `[px, py, vx, vy]`; `pendulum`: `[θ, θ̇]` with θ = 0 upright.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub x: Vec<f64>,
    pub step: usize,
}

pub fn env_reset<R: Rng + ?Sized>(spec: &EnvSpec, rng: &mut R) -> EnvState {
    let x = match spec.kind {
        EnvKind::PointMass => vec![
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            0.0,
            0.0,
        ],
        EnvKind::Pendulum => vec![rng.random_range(-PI..=PI), rng.random_range(-1.0..=1.0)],
    };
    EnvState { x, step: 0 }
}

fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    (theta + PI).rem_euclid(two_pi) - PI
}

/// Advances one step; the action is clamped to the bounds before integration.
/// Returns the next state, the reward and whether the horizon was reached.
pub fn env_step(spec: &EnvSpec, state: &EnvState, action: &[f64]) -> Result<(EnvState, f64, bool)> {
    if action.len() != spec.action_dim {
        return Err(Error::Shape(format!(
            "action of length {} for action_dim {}",
            action.len(),
            spec.action_dim
        )));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numeric("non-finite action".into()));
    }
    if state.step >= spec.horizon {
        return Err(Error::Argument("episode already reached its horizon".into()));
    }
    let u = spec.clamp_action(action);
    let dt = spec.dt;
    let (x, reward) = match spec.dynamics {
        Dynamics::PointMass { goal, control_cost } => {
            let mut next = state.x.clone();
            for d in 0..2 {
                let vel = state.x[2 + d] + dt * u[d];
                let pos = state.x[d] + dt * vel;
                let clamped = pos.clamp(-1.0, 1.0);
                next[d] = clamped;
                next[2 + d] = if clamped != pos { 0.0 } else { vel };
            }
            let dist_sq = (next[0] - goal[0]).powi(2) + (next[1] - goal[1]).powi(2);
            let effort: f64 = u.iter().map(|a| a * a).sum();
            (next, -dist_sq - control_cost * effort)
        }
        Dynamics::Pendulum {
            gravity,
            mass,
            length,
            max_speed,
        } => {
            let (theta, omega) = (state.x[0], state.x[1]);
            let torque = u[0];
            let reward = -(wrap_angle(theta).powi(2) + 0.1 * omega * omega + 0.001 * torque * torque);
            let accel = 3.0 * gravity / (2.0 * length) * theta.sin() + 3.0 * torque / (mass * length * length);
            let omega_next = (omega + dt * accel).clamp(-max_speed, max_speed);
            let theta_next = theta + dt * omega_next;
            (vec![theta_next, omega_next], reward)
        }
    };
    if x.iter().any(|v| !v.is_finite()) || !reward.is_finite() {
        return Err(Error::Numeric("environment produced a non-finite state".into()));
    }
    let step = state.step + 1;
    Ok((EnvState { x, step }, reward, step == spec.horizon))
}

//! Deterministic continuous-control tasks and trajectory collection.
//!
//! Two small environments with fixed horizons and no early termination:
//!
//! * `point_mass`: a double integrator in the box `[−1, 1]²` steering toward
//!   the fixed goal `(0.5, 0.5)`. Walls are inelastic, which keeps the
//!   per-step reward within `(2√2)² + 0.01·2`.
//! * `pendulum`: the classic torque-limited swing-up, observed as
//!   `(cos θ, sin θ, θ̇)`.

mod rollout;
mod spec;

pub use rollout::{rollout, rollout_mean, rollout_seeded, Trajectory, Transition};
pub use spec::{env_reset, env_step, Dynamics, EnvKind, EnvSpec, EnvState};

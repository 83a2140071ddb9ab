//! Risk-neutral and exponential-utility REINFORCE from first principles.
//!
//! - [`policy`]: softmax MLP policy with exact score gradients.
//! - [`env`]: CartPole, holonomic navigation and a compact grid navigation task.
//! - [`reinforce`]: rollouts, rewards-to-go, gradient estimators and Adam.
//! - [`complexity`]: smoothness constants, step sizes and iteration bounds.
//! - [`harness`]: seeded experiments, metrics, aggregation, charts and checkpoints.

pub mod complexity;
pub mod env;
pub mod error;
pub mod harness;
pub mod policy;
pub mod reinforce;

pub use env::{EnvName, EnvSpec, Environment, StepResult};
pub use error::{Error, Result};
pub use policy::{ActionDistribution, PolicyParams};
pub use reinforce::{RiskObjective, Trajectory};

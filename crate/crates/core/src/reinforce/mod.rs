//! Monte Carlo policy gradient: rollouts, rewards-to-go, risk-neutral and
//! exponential-utility estimators, and the Adam ascent step.

mod adam;
mod estimator;
mod objective;
mod trajectory;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use estimator::{
    estimate_gradient, estimate_gradient_cached, estimate_gradient_with, grad_norm,
    GradientEstimate, SaturationPolicy,
};
pub use objective::{utility_weight, RiskObjective, UtilityWeight, EXPONENT_CLAMP};
pub use trajectory::{rewards_to_go, sample_trajectory, ActivationCache, Rollout, Trajectory};

use super::objective::{utility_weight, RiskObjective};
use super::trajectory::{rewards_to_go, ActivationCache, Trajectory};
use crate::error::{Error, Result};
use crate::policy::{Activations, PolicyParams, ScoreScratch};

/// What to do when the exponential utility overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SaturationPolicy {
    /// Fail with [`Error::Saturation`].
    #[default]
    Abort,
    /// Keep the clamped weight and count it.
    Clamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub grad: Vec<f64>,
    /// Number of `(trajectory, t)` terms whose utility was clamped.
    pub saturated: usize,
}

/// `(1/N) sum_i sum_t grad log pi(a_t^i | s_t^i) * w(R^i(t))`, failing on any
/// saturated utility term.
pub fn estimate_gradient(
    params: &PolicyParams,
    trajectories: &[Trajectory],
    gamma: f64,
    objective: RiskObjective,
) -> Result<Vec<f64>> {
    estimate_gradient_with(
        params,
        trajectories,
        gamma,
        objective,
        SaturationPolicy::Abort,
    )
    .map(|e| e.grad)
}

pub fn estimate_gradient_with(
    params: &PolicyParams,
    trajectories: &[Trajectory],
    gamma: f64,
    objective: RiskObjective,
    on_saturation: SaturationPolicy,
) -> Result<GradientEstimate> {
    accumulate(params, trajectories, None, gamma, objective, on_saturation)
}

/// [`estimate_gradient_with`] reusing activations recorded by
/// [`Rollout::sample_cached`](super::Rollout::sample_cached). The cache must
/// come from the same `params`; the result is bit-identical to recomputing.
pub fn estimate_gradient_cached(
    params: &PolicyParams,
    trajectories: &[Trajectory],
    cache: &ActivationCache,
    gamma: f64,
    objective: RiskObjective,
    on_saturation: SaturationPolicy,
) -> Result<GradientEstimate> {
    if cache.len() != trajectories.len() {
        return Err(Error::DimensionMismatch {
            what: "cached trajectories",
            expected: trajectories.len(),
            got: cache.len(),
        });
    }
    for (k, traj) in trajectories.iter().enumerate() {
        if cache.trajectory(k).len() != traj.len() {
            return Err(Error::DimensionMismatch {
                what: "cached steps",
                expected: traj.len(),
                got: cache.trajectory(k).len(),
            });
        }
    }
    accumulate(
        params,
        trajectories,
        Some(cache),
        gamma,
        objective,
        on_saturation,
    )
}

fn accumulate(
    params: &PolicyParams,
    trajectories: &[Trajectory],
    cache: Option<&ActivationCache>,
    gamma: f64,
    objective: RiskObjective,
    on_saturation: SaturationPolicy,
) -> Result<GradientEstimate> {
    if trajectories.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let inv_n = 1.0 / trajectories.len() as f64;
    let mut grad = vec![0.0; params.param_count()];
    let mut fresh = Activations::new(params);
    let mut scratch = ScoreScratch::default();
    let mut saturated = 0;

    // fixed summation order: trajectory by trajectory, t ascending
    for (k, traj) in trajectories.iter().enumerate() {
        let rtg = rewards_to_go(traj.rewards(), gamma);
        for (t, ((state, action, _), r)) in traj.steps().zip(rtg).enumerate() {
            let w = utility_weight(r, objective)?;
            saturated += usize::from(w.saturated);
            if w.value == 0.0 {
                continue;
            }
            let acts = match cache {
                Some(c) => &c.trajectory(k)[t],
                None => {
                    params.forward_into(state, &mut fresh)?;
                    &fresh
                }
            };
            params.accumulate_score(acts, action, w.value * inv_n, &mut grad, &mut scratch)?;
        }
    }

    if saturated > 0 && on_saturation == SaturationPolicy::Abort {
        return Err(Error::Saturation {
            count: saturated,
            beta: objective.beta(),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient estimate"));
    }
    Ok(GradientEstimate { grad, saturated })
}

/// Euclidean norm.
pub fn grad_norm(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

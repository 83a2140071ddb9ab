use rand::Rng;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::policy::{sample_index, Activations, PolicyParams};

/// One rollout: observations, actions and rewards in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    obs_dim: usize,
    states: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    terminated: bool,
}

impl Trajectory {
    pub fn new(obs_dim: usize) -> Self {
        Self {
            obs_dim,
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            terminated: false,
        }
    }

    pub fn push(&mut self, state: &[f64], action: usize, reward: f64) -> Result<()> {
        if state.len() != self.obs_dim {
            return Err(Error::DimensionMismatch {
                what: "trajectory state",
                expected: self.obs_dim,
                got: state.len(),
            });
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        self.states.extend_from_slice(state);
        self.actions.push(action);
        self.rewards.push(reward);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Whether the environment signalled `done` (as opposed to truncation at H).
    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.obs_dim..(t + 1) * self.obs_dim]
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn steps(&self) -> impl Iterator<Item = (&[f64], usize, f64)> + '_ {
        self.states
            .chunks_exact(self.obs_dim.max(1))
            .zip(&self.actions)
            .zip(&self.rewards)
            .map(|((s, &a), &r)| (s, a, r))
    }

    /// Sum of rewards.
    pub fn undiscounted_return(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// `sum_t gamma^t r_t`.
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        let mut discount = 1.0;
        let mut total = 0.0;
        for r in &self.rewards {
            total += discount * r;
            discount *= gamma;
        }
        total
    }
}

/// Discounted rewards-to-go with absolute-time discounting:
/// `R[t] = sum_{t' >= t} gamma^{t'} r_{t'}`, so `R[0]` is the full discounted
/// return.
pub fn rewards_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut discounts = Vec::with_capacity(rewards.len());
    let mut g = 1.0;
    for _ in rewards {
        discounts.push(g);
        g *= gamma;
    }
    let mut out = vec![0.0; rewards.len()];
    let mut tail = 0.0;
    for t in (0..rewards.len()).rev() {
        tail += discounts[t] * rewards[t];
        out[t] = tail;
    }
    out
}

/// Reusable buffers for repeated rollouts.
#[derive(Debug, Default)]
pub struct Rollout {
    obs: Vec<f64>,
    acts: Activations,
}

impl Rollout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs the policy from `env.reset` until `done` or `horizon` steps.
    pub fn sample<E, R>(
        &mut self,
        params: &PolicyParams,
        env: &E,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Trajectory>
    where
        E: Environment,
        R: Rng + ?Sized,
    {
        self.run(params, env, horizon, rng, None)
    }

    /// Like [`Rollout::sample`], also appending every step's activations to
    /// `cache` as a new trajectory entry.
    pub fn sample_cached<E, R>(
        &mut self,
        params: &PolicyParams,
        env: &E,
        horizon: usize,
        rng: &mut R,
        cache: &mut ActivationCache,
    ) -> Result<Trajectory>
    where
        E: Environment,
        R: Rng + ?Sized,
    {
        cache.start_trajectory();
        self.run(params, env, horizon, rng, Some(cache))
    }

    fn run<E, R>(
        &mut self,
        params: &PolicyParams,
        env: &E,
        horizon: usize,
        rng: &mut R,
        mut cache: Option<&mut ActivationCache>,
    ) -> Result<Trajectory>
    where
        E: Environment,
        R: Rng + ?Sized,
    {
        let spec = env.spec();
        if spec.obs_dim != params.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "policy input vs observation",
                expected: spec.obs_dim,
                got: params.input_dim(),
            });
        }
        if spec.action_count != params.action_count() {
            return Err(Error::DimensionMismatch {
                what: "policy outputs vs actions",
                expected: spec.action_count,
                got: params.action_count(),
            });
        }
        let mut traj = Trajectory::new(spec.obs_dim);
        let mut state = env.reset(rng);
        for _ in 0..horizon {
            env.observe(&state, &mut self.obs);
            params.forward_into(&self.obs, &mut self.acts)?;
            if let Some(cache) = cache.as_deref_mut() {
                cache.push(&self.acts);
            }
            let action = sample_index(self.acts.probs(), rng);
            let step = env.step(&state, action)?;
            traj.push(&self.obs, action, step.reward)?;
            if step.done {
                traj.terminated = true;
                break;
            }
            state = step.next_state;
        }
        Ok(traj)
    }
}

/// Forward-pass activations recorded during rollouts, one entry per step of
/// each trajectory, so the estimator need not recompute them. Slots are
/// reused across [`ActivationCache::clear`].
#[derive(Debug, Default)]
pub struct ActivationCache {
    slots: Vec<Vec<Activations>>,
    lens: Vec<usize>,
}

impl ActivationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.lens.clear();
    }

    /// Number of recorded trajectories.
    pub fn len(&self) -> usize {
        self.lens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lens.is_empty()
    }

    pub fn trajectory(&self, k: usize) -> &[Activations] {
        &self.slots[k][..self.lens[k]]
    }

    fn start_trajectory(&mut self) {
        if self.slots.len() == self.lens.len() {
            self.slots.push(Vec::new());
        }
        self.lens.push(0);
    }

    fn push(&mut self, acts: &Activations) {
        let k = self.lens.len() - 1;
        let t = self.lens[k];
        let steps = &mut self.slots[k];
        if t < steps.len() {
            steps[t].clone_from(acts);
        } else {
            steps.push(acts.clone());
        }
        self.lens[k] += 1;
    }
}

/// One-off [`Rollout::sample`] with fresh buffers.
pub fn sample_trajectory<E, R>(
    params: &PolicyParams,
    env: &E,
    horizon: usize,
    rng: &mut R,
) -> Result<Trajectory>
where
    E: Environment,
    R: Rng + ?Sized,
{
    Rollout::new().sample(params, env, horizon, rng)
}

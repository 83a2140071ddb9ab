//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls the library's forward pass, backprop or estimator: the
//! MLP is re-evaluated from the documented flat weight layout and scores come
//! from central differences.

#![allow(dead_code)]

use rand::Rng;
use riskgrad::{EnvSpec, Environment, Error, StepResult};

/// Two states, two actions. The start state is 0 with probability `P_START0`;
/// action `a` moves `s -> (s + a) % 2` and pays `REWARD[s][a]`.
pub struct TwoStateMdp {
    spec: EnvSpec,
}

pub const P_START0: f64 = 0.6;
pub const REWARD: [[f64; 2]; 2] = [[0.0, 1.0], [0.25, 1.5]];
pub const HORIZON: usize = 2;

impl TwoStateMdp {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "two-state",
                obs_dim: 2,
                action_count: 2,
                max_horizon: HORIZON,
                gamma: 0.9,
                r_max: 1.5,
            },
        }
    }
}

impl Environment for TwoStateMdp {
    type State = usize;

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        usize::from(rng.gen::<f64>() >= P_START0)
    }

    fn step(&self, state: &usize, action: usize) -> riskgrad::Result<StepResult<usize>> {
        if action >= 2 {
            return Err(Error::InvalidAction { action, count: 2 });
        }
        Ok(StepResult {
            next_state: (state + action) % 2,
            reward: REWARD[*state][action],
            done: false,
        })
    }

    fn observe(&self, state: &usize, obs: &mut Vec<f64>) {
        obs.clear();
        obs.extend([f64::from(*state == 0), f64::from(*state == 1)]);
    }
}

pub fn one_hot(state: usize) -> [f64; 2] {
    [f64::from(state == 0), f64::from(state == 1)]
}

/// Softmax policy of a tanh MLP, read straight off the flat layout: per layer,
/// a row-major `out x in` weight block followed by `out` biases.
pub fn ref_probs(sizes: &[usize], weights: &[f64], input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    let mut offset = 0;
    let layers = sizes.len() - 1;
    for l in 0..layers {
        let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
        let w = &weights[offset..offset + fan_in * fan_out];
        let b = &weights[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        offset += fan_in * fan_out + fan_out;
        x = (0..fan_out)
            .map(|j| {
                let z: f64 = b[j] + (0..fan_in).map(|i| w[j * fan_in + i] * x[i]).sum::<f64>();
                if l + 1 == layers {
                    z
                } else {
                    z.tanh()
                }
            })
            .collect();
    }
    assert_eq!(offset, weights.len(), "layout covers every weight");
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

pub fn ref_log_prob(sizes: &[usize], weights: &[f64], input: &[f64], action: usize) -> f64 {
    ref_probs(sizes, weights, input)[action].ln()
}

/// Central-difference gradient of `f` at `weights`.
pub fn central_diff(weights: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut w = weights.to_vec();
    (0..w.len())
        .map(|i| {
            let orig = w[i];
            w[i] = orig + h;
            let up = f(&w);
            w[i] = orig - h;
            let down = f(&w);
            w[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    l2(&diff) / l2(want)
}

/// Every length-`HORIZON` path `(s0, a0, s1, a1)` with its probability under
/// the policy and its per-step rewards.
pub struct Path {
    pub states: [usize; HORIZON],
    pub actions: [usize; HORIZON],
    pub rewards: [f64; HORIZON],
    pub prob: f64,
}

pub fn enumerate_paths(sizes: &[usize], weights: &[f64]) -> Vec<Path> {
    let mut out = Vec::new();
    for (s0, p0) in [(0, P_START0), (1, 1.0 - P_START0)] {
        let pi0 = ref_probs(sizes, weights, &one_hot(s0));
        for a0 in 0..2 {
            let s1 = (s0 + a0) % 2;
            let pi1 = ref_probs(sizes, weights, &one_hot(s1));
            for a1 in 0..2 {
                out.push(Path {
                    states: [s0, s1],
                    actions: [a0, a1],
                    rewards: [REWARD[s0][a0], REWARD[s1][a1]],
                    prob: p0 * pi0[a0] * pi1[a1],
                });
            }
        }
    }
    out
}

/// `sum_tau p(tau) sum_t score(a_t | s_t) * weight(R_t)` with
/// `R_t = sum_{t' >= t} gamma^{t'} r_{t'}`, by exhaustive enumeration.
pub fn enumerated_gradient(
    sizes: &[usize],
    weights: &[f64],
    gamma: f64,
    weight: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let scores: Vec<[Vec<f64>; 2]> = (0..2)
        .map(|s| {
            let obs = one_hot(s);
            [0, 1].map(|a| central_diff(weights, 1e-6, |w| ref_log_prob(sizes, w, &obs, a)))
        })
        .collect();
    let mut grad = vec![0.0; weights.len()];
    for path in enumerate_paths(sizes, weights) {
        for t in 0..HORIZON {
            let rtg: f64 = (t..HORIZON)
                .map(|k| gamma.powi(k as i32) * path.rewards[k])
                .sum();
            let scale = path.prob * weight(rtg);
            for (g, s) in grad
                .iter_mut()
                .zip(&scores[path.states[t]][path.actions[t]])
            {
                *g += scale * s;
            }
        }
    }
    grad
}

/// `J(theta) = E[sum_t gamma^t r_t]` by enumeration.
pub fn enumerated_objective(sizes: &[usize], weights: &[f64], gamma: f64) -> f64 {
    enumerate_paths(sizes, weights)
        .iter()
        .map(|p| {
            p.prob
                * (0..HORIZON)
                    .map(|t| gamma.powi(t as i32) * p.rewards[t])
                    .sum::<f64>()
        })
        .sum()
}

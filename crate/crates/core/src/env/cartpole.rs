use rand::Rng;

use super::{check_action, EnvSpec, Environment, StepResult};
use crate::error::{Error, Result};

const GRAVITY: f64 = 9.8;
const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const HALF_LENGTH: f64 = 0.5;
const FORCE: f64 = 10.0;
const DT: f64 = 0.02;
const X_LIMIT: f64 = 2.4;
const ANGLE_LIMIT: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Classic cart-pole with Euler integration. State is `[x, x_dot, theta, theta_dot]`;
/// action 0 pushes left, 1 pushes right. Every step pays +1.
#[derive(Debug, Clone)]
pub struct CartPole {
    spec: EnvSpec,
}

impl CartPole {
    pub fn with_horizon(max_horizon: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: "cartpole",
                obs_dim: 4,
                action_count: 2,
                max_horizon,
                gamma: 0.99,
                r_max: 1.0,
            },
        }
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::with_horizon(200)
    }
}

impl Environment for CartPole {
    type State = [f64; 4];

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 4] {
        std::array::from_fn(|_| rng.gen_range(-0.05..=0.05))
    }

    fn step(&self, state: &[f64; 4], action: usize) -> Result<StepResult<[f64; 4]>> {
        check_action(action, 2)?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cartpole state"));
        }
        let [x, x_dot, theta, theta_dot] = *state;
        let force = if action == 1 { FORCE } else { -FORCE };
        let total_mass = CART_MASS + POLE_MASS;
        let pole_mass_length = POLE_MASS * HALF_LENGTH;
        let (sin, cos) = theta.sin_cos();

        let temp = (force + pole_mass_length * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total_mass));
        let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;

        let next = [
            x + DT * x_dot,
            x_dot + DT * x_acc,
            theta + DT * theta_dot,
            theta_dot + DT * theta_acc,
        ];
        let done = next[0].abs() > X_LIMIT || next[2].abs() > ANGLE_LIMIT;
        Ok(StepResult {
            next_state: next,
            reward: 1.0,
            done,
        })
    }

    fn observe(&self, state: &[f64; 4], obs: &mut Vec<f64>) {
        obs.clear();
        obs.extend_from_slice(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reset_is_seeded_and_in_range() {
        let env = CartPole::default();
        let a = env.reset(&mut ChaCha8Rng::seed_from_u64(0));
        let b = env.reset(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert!(env.reset(&mut rng).iter().all(|v| v.abs() <= 0.05));
        }
    }

    #[test]
    fn reset_mean_is_centred() {
        let env = CartPole::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut sums = [0.0; 4];
        for _ in 0..n {
            for (s, v) in sums.iter_mut().zip(env.reset(&mut rng)) {
                *s += v;
            }
        }
        // uniform on [-0.05, 0.05]: sd = 0.1 / sqrt(12)
        let se = 0.1 / 12f64.sqrt() / (n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() < 3.0 * se);
        }
    }

    #[test]
    fn one_euler_step_from_rest() {
        // Hand-evaluated: temp = 10/1.1, denominator = 0.5 * (4/3 - 0.1/1.1)
        let temp: f64 = 10.0 / 1.1;
        let theta_acc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
        let x_acc = temp - 0.05 * theta_acc / 1.1;
        let out = CartPole::default().step(&[0.0; 4], 1).unwrap();
        assert_eq!(out.reward, 1.0);
        assert!(!out.done);
        assert_eq!(out.next_state[0], 0.0);
        assert!((out.next_state[1] - 0.02 * x_acc).abs() < 1e-15);
        assert_eq!(out.next_state[2], 0.0);
        assert!((out.next_state[3] - 0.02 * theta_acc).abs() < 1e-15);
        assert!((out.next_state[1] - 0.195_121_951_219_512_2).abs() < 1e-12);
        assert!((out.next_state[3] + 0.292_682_926_829_268_3).abs() < 1e-12);
    }

    #[test]
    fn out_of_bounds_terminates() {
        let env = CartPole::default();
        for a in 0..2 {
            assert!(env.step(&[2.5, 0.0, 0.0, 0.0], a).unwrap().done);
        }
        assert!(matches!(
            env.step(&[0.0; 4], 2),
            Err(Error::InvalidAction { .. })
        ));
    }
}

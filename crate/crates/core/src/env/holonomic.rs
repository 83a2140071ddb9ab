use rand::Rng;

use super::{check_action, EnvSpec, Environment, StepResult};
use crate::error::{Error, Result};

const DV: f64 = 0.1;
const MAX_SPEED: f64 = 1.0;
const DISTANCE_FLOOR: f64 = 0.1;
const REWARD_SCALE: f64 = 1e-4;

/// Scene geometry for the holonomic navigation task.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomicLayout {
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub obstacle: [f64; 2],
    pub obstacle_radius: f64,
    /// Square workspace `[0, size]^2`.
    pub size: f64,
    pub goal_tolerance: f64,
}

impl Default for HolonomicLayout {
    fn default() -> Self {
        Self {
            start: [5.0, 5.0],
            goal: [45.0, 45.0],
            obstacle: [25.0, 25.0],
            obstacle_radius: 5.0,
            size: 50.0,
            goal_tolerance: 1.0,
        }
    }
}

/// Point robot with direct velocity control on a 3x3 grid of increments.
///
/// State is `[x, y, vx, vy, o1, o2, r_o]`. Reward is `(50/d - d) * 1e-4` with
/// `d` the distance to the goal after the move, floored at 0.1.
#[derive(Debug, Clone)]
pub struct Holonomic {
    spec: EnvSpec,
    layout: HolonomicLayout,
}

impl Holonomic {
    pub fn new(layout: HolonomicLayout, max_horizon: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: "holonomic",
                obs_dim: 7,
                action_count: 9,
                max_horizon,
                gamma: 0.99,
                r_max: (50.0 / DISTANCE_FLOOR) * REWARD_SCALE,
            },
            layout,
        }
    }

    pub fn layout(&self) -> &HolonomicLayout {
        &self.layout
    }

    pub fn distance_to_goal(&self, state: &[f64; 7]) -> f64 {
        let [gx, gy] = self.layout.goal;
        (state[0] - gx).hypot(state[1] - gy)
    }

    /// `(dvx, dvy)` for an action index, row-major over `{-0.1, 0, 0.1}^2`.
    pub fn velocity_increment(action: usize) -> (f64, f64) {
        let dvx = (action / 3) as f64 - 1.0;
        let dvy = (action % 3) as f64 - 1.0;
        (dvx * DV, dvy * DV)
    }

    pub fn reward_at_distance(d: f64) -> f64 {
        let d = d.max(DISTANCE_FLOOR);
        (50.0 / d - d) * REWARD_SCALE
    }
}

impl Default for Holonomic {
    fn default() -> Self {
        Self::new(HolonomicLayout::default(), 500)
    }
}

impl Environment for Holonomic {
    type State = [f64; 7];

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, _rng: &mut R) -> [f64; 7] {
        let l = &self.layout;
        [
            l.start[0],
            l.start[1],
            0.0,
            0.0,
            l.obstacle[0],
            l.obstacle[1],
            l.obstacle_radius,
        ]
    }

    fn step(&self, state: &[f64; 7], action: usize) -> Result<StepResult<[f64; 7]>> {
        check_action(action, 9)?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("holonomic state"));
        }
        let (dvx, dvy) = Self::velocity_increment(action);
        let vx = (state[2] + dvx).clamp(-MAX_SPEED, MAX_SPEED);
        let vy = (state[3] + dvy).clamp(-MAX_SPEED, MAX_SPEED);
        let x = (state[0] + vx).clamp(0.0, self.layout.size);
        let y = (state[1] + vy).clamp(0.0, self.layout.size);
        let next = [x, y, vx, vy, state[4], state[5], state[6]];

        let d = self.distance_to_goal(&next);
        let collided = (x - state[4]).hypot(y - state[5]) <= state[6];
        Ok(StepResult {
            next_state: next,
            reward: Self::reward_at_distance(d),
            done: d < self.layout.goal_tolerance || collided,
        })
    }

    fn observe(&self, state: &[f64; 7], obs: &mut Vec<f64>) {
        obs.clear();
        obs.extend_from_slice(state);
    }
}

use rand::Rng;

use super::{check_action, EnvSpec, Environment, StepResult};
use crate::error::Result;

/// Interior cells have coordinates `1..=INTERIOR`; 0 and `INTERIOR + 1` are walls.
const INTERIOR: i32 = 4;
const GOAL: (i32, i32) = (INTERIOR, INTERIOR);

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const FORWARD: usize = 2;

/// Facing direction; `y` grows downward so `South` is `+y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    East,
    South,
    West,
    North,
}

impl Heading {
    const ALL: [Heading; 4] = [Heading::East, Heading::South, Heading::West, Heading::North];

    fn index(self) -> usize {
        self as usize
    }

    fn turn_right(self) -> Self {
        Self::ALL[(self.index() + 1) % 4]
    }

    fn turn_left(self) -> Self {
        Self::ALL[(self.index() + 3) % 4]
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
            Heading::North => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridState {
    pub x: i32,
    pub y: i32,
    pub heading: Heading,
    pub steps: usize,
}

/// 6x6 walled room with the goal in the bottom-right interior cell and a
/// random start. Sparse reward `1 - 0.9 * steps / H` on reaching the goal.
///
/// Observation (8 values): position scaled to `[0, 1]`, heading one-hot, and
/// goal offset scaled by the interior span.
#[derive(Debug, Clone)]
pub struct GridNav {
    spec: EnvSpec,
}

impl GridNav {
    pub fn with_horizon(max_horizon: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: "gridnav",
                obs_dim: 8,
                action_count: 3,
                max_horizon: max_horizon.max(1),
                gamma: 0.99,
                r_max: 1.0,
            },
        }
    }

    pub fn goal() -> (i32, i32) {
        GOAL
    }

    fn is_interior(x: i32, y: i32) -> bool {
        (1..=INTERIOR).contains(&x) && (1..=INTERIOR).contains(&y)
    }
}

impl Default for GridNav {
    fn default() -> Self {
        Self::with_horizon(200)
    }
}

impl Environment for GridNav {
    type State = GridState;

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> GridState {
        let cells = (INTERIOR * INTERIOR - 1) as usize;
        // cell indices 0..cells skip the goal, which is the last interior cell
        let cell = rng.gen_range(0..cells) as i32;
        let heading = Heading::ALL[rng.gen_range(0..4)];
        GridState {
            x: 1 + cell % INTERIOR,
            y: 1 + cell / INTERIOR,
            heading,
            steps: 0,
        }
    }

    fn step(&self, state: &GridState, action: usize) -> Result<StepResult<GridState>> {
        check_action(action, 3)?;
        let mut next = *state;
        next.steps += 1;
        match action {
            LEFT => next.heading = state.heading.turn_left(),
            RIGHT => next.heading = state.heading.turn_right(),
            FORWARD => {
                let (dx, dy) = state.heading.delta();
                if Self::is_interior(state.x + dx, state.y + dy) {
                    next.x += dx;
                    next.y += dy;
                }
            }
            _ => unreachable!("action checked above"),
        }
        let horizon = self.spec.max_horizon;
        let (reward, done) = if (next.x, next.y) == GOAL {
            (1.0 - 0.9 * (next.steps as f64 / horizon as f64), true)
        } else {
            (0.0, next.steps >= horizon)
        };
        Ok(StepResult {
            next_state: next,
            reward,
            done,
        })
    }

    fn observe(&self, state: &GridState, obs: &mut Vec<f64>) {
        let span = f64::from(INTERIOR - 1);
        obs.clear();
        obs.push(f64::from(state.x - 1) / span);
        obs.push(f64::from(state.y - 1) / span);
        obs.extend((0..4).map(|i| if i == state.heading.index() { 1.0 } else { 0.0 }));
        obs.push(f64::from(GOAL.0 - state.x) / span);
        obs.push(f64::from(GOAL.1 - state.y) / span);
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reset_covers_all_non_goal_cells() {
        let env = GridNav::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let s = env.reset(&mut rng);
            assert_ne!((s.x, s.y), GOAL);
            assert!(GridNav::is_interior(s.x, s.y));
            seen.insert((s.x, s.y));
        }
        assert_eq!(seen.len(), 15);
        let a = env.reset(&mut ChaCha8Rng::seed_from_u64(9));
        let b = env.reset(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn forward_into_wall_is_a_no_op() {
        let env = GridNav::default();
        let s = GridState {
            x: 1,
            y: 1,
            heading: Heading::North,
            steps: 0,
        };
        let out = env.step(&s, FORWARD).unwrap();
        assert_eq!((out.next_state.x, out.next_state.y), (1, 1));
        assert_eq!(out.reward, 0.0);
        assert!(!out.done);
    }

    #[test]
    fn four_right_turns_restore_heading() {
        let env = GridNav::default();
        let start = GridState {
            x: 2,
            y: 3,
            heading: Heading::West,
            steps: 0,
        };
        let mut s = start;
        for _ in 0..4 {
            s = env.step(&s, RIGHT).unwrap().next_state;
        }
        assert_eq!(s.heading, start.heading);
        for _ in 0..4 {
            s = env.step(&s, LEFT).unwrap().next_state;
        }
        assert_eq!(s.heading, start.heading);
    }

    #[test]
    fn goal_reward_discounts_elapsed_steps() {
        let env = GridNav::with_horizon(200);
        let s = GridState {
            x: 3,
            y: 4,
            heading: Heading::East,
            steps: 9,
        };
        let out = env.step(&s, FORWARD).unwrap();
        assert!(out.done);
        assert!((out.reward - 0.955).abs() < 1e-12);
    }

    #[test]
    fn horizon_ends_episode_without_reward() {
        let env = GridNav::with_horizon(5);
        let s = GridState {
            x: 1,
            y: 1,
            heading: Heading::North,
            steps: 4,
        };
        let out = env.step(&s, LEFT).unwrap();
        assert!(out.done);
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn observation_layout() {
        let env = GridNav::default();
        let mut obs = Vec::new();
        env.observe(
            &GridState {
                x: 1,
                y: 4,
                heading: Heading::South,
                steps: 0,
            },
            &mut obs,
        );
        assert_eq!(obs, vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(env
            .step(
                &GridState {
                    x: 1,
                    y: 1,
                    heading: Heading::East,
                    steps: 0
                },
                3
            )
            .is_err());
    }
}

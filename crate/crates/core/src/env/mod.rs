//! Seeded, deterministic environments behind one interface.
//!
//! Randomness enters only through `reset`; `step` is a pure function of the
//! current state and the action.

mod cartpole;
mod gridnav;
mod holonomic;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

pub use cartpole::CartPole;
pub use gridnav::{GridNav, GridState, Heading};
pub use holonomic::{Holonomic, HolonomicLayout};

/// Static description of a task.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub obs_dim: usize,
    pub action_count: usize,
    pub max_horizon: usize,
    pub gamma: f64,
    /// Declared bound on `|reward|`.
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S> {
    pub next_state: S,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment {
    type State: Clone + fmt::Debug;

    fn spec(&self) -> &EnvSpec;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn step(&self, state: &Self::State, action: usize) -> Result<StepResult<Self::State>>;

    /// Writes the policy-facing observation of `state` into `obs`.
    fn observe(&self, state: &Self::State, obs: &mut Vec<f64>);
}

pub(crate) fn check_action(action: usize, count: usize) -> Result<()> {
    if action >= count {
        return Err(Error::InvalidAction { action, count });
    }
    Ok(())
}

/// Registry of the built-in tasks, addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvName {
    CartPole,
    Holonomic,
    GridNav,
}

impl EnvName {
    pub const ALL: [EnvName; 3] = [EnvName::CartPole, EnvName::Holonomic, EnvName::GridNav];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvName::CartPole => "cartpole",
            EnvName::Holonomic => "holonomic",
            EnvName::GridNav => "gridnav",
        }
    }

    /// Spec of the default instance.
    pub fn spec(self) -> EnvSpec {
        match self {
            EnvName::CartPole => CartPole::default().spec().clone(),
            EnvName::Holonomic => Holonomic::default().spec().clone(),
            EnvName::GridNav => GridNav::default().spec().clone(),
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvName::ALL
            .into_iter()
            .find(|e| e.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown environment {s:?}")))
    }
}

/// Writes one rollout as CSV: `t, s0..s{d-1}, action, reward, done`.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    obs_dim: usize,
    rows: impl IntoIterator<Item = (Vec<f64>, usize, f64, bool)>,
) -> Result<()> {
    write!(out, "t")?;
    for i in 0..obs_dim {
        write!(out, ",s{i}")?;
    }
    writeln!(out, ",action,reward,done")?;
    for (t, (state, action, reward, done)) in rows.into_iter().enumerate() {
        write!(out, "{t}")?;
        for x in &state {
            write!(out, ",{x}")?;
        }
        writeln!(out, ",{action},{reward},{}", u8::from(done))?;
    }
    Ok(())
}

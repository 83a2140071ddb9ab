use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::env::EnvName;
use crate::error::{Error, Result};
use crate::policy::{DEFAULT_HIDDEN, HIDDEN_LAYERS};
use crate::reinforce::{RiskObjective, SaturationPolicy};

/// Settings for one training configuration (one objective, many seeds).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvName,
    pub objective: RiskObjective,
    pub iterations: usize,
    pub trajectories: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub lr: f64,
    pub hidden: [usize; HIDDEN_LAYERS],
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    /// Write wall-clock milliseconds into the metrics CSV. Off by default so
    /// that replays are byte-identical.
    pub record_timing: bool,
    pub saturation: SaturationPolicy,
    /// Dump every sampled trajectory as CSV (debug; large).
    pub dump_trajectories: bool,
}

impl ExperimentConfig {
    pub fn new(env: EnvName) -> Self {
        let spec = env.spec();
        Self {
            env,
            objective: RiskObjective::Neutral,
            iterations: 2000,
            trajectories: 10,
            horizon: spec.max_horizon,
            gamma: spec.gamma,
            lr: 1e-3,
            hidden: DEFAULT_HIDDEN,
            seeds: (0..10).collect(),
            out_dir: None,
            record_timing: false,
            saturation: SaturationPolicy::Abort,
            dump_trajectories: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.trajectories == 0 || self.horizon == 0 {
            return Err(Error::Config(
                "iterations, trajectories and horizon must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if let RiskObjective::Sensitive { beta } = self.objective {
            RiskObjective::sensitive(beta)?;
        }
        Ok(())
    }

    /// Directory for this configuration's outputs: `<out>/<env>_<objective>`.
    pub fn run_dir(&self) -> Option<PathBuf> {
        self.out_dir
            .as_ref()
            .map(|d| d.join(format!("{}_{}", self.env, self.objective.label())))
    }

    /// Same settings minus seeds and output location.
    pub fn same_experiment(&self, other: &Self) -> bool {
        self.env == other.env
            && self.objective == other.objective
            && self.iterations == other.iterations
            && self.trajectories == other.trajectories
            && self.horizon == other.horizon
            && self.gamma == other.gamma
            && self.lr == other.lr
            && self.hidden == other.hidden
    }

    /// Key-value rendering, loadable with [`ExperimentPlan::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "env = {}", self.env);
        let _ = writeln!(s, "beta = {}", self.objective.beta());
        let _ = writeln!(s, "iters = {}", self.iterations);
        let _ = writeln!(s, "traj = {}", self.trajectories);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "lr = {}", self.lr);
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "hidden = {}", hidden.join(","));
        let seeds: Vec<String> = self.seeds.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "seeds = {}", seeds.join(","));
        s
    }
}

/// A base configuration swept over several objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: ExperimentConfig,
    pub objectives: Vec<RiskObjective>,
}

impl ExperimentPlan {
    pub fn single(config: ExperimentConfig) -> Self {
        let objective = config.objective;
        Self {
            base: config,
            objectives: vec![objective],
        }
    }

    /// Named presets matching the published experiment settings.
    pub fn preset(name: &str) -> Result<Self> {
        let (env, iterations, horizon, betas): (EnvName, usize, usize, &[f64]) = match name {
            "cartpole-paper" => (
                EnvName::CartPole,
                2000,
                200,
                &[0.0, -0.01, -0.1, -1.0, -10.0],
            ),
            "cartpole-reduced" => (EnvName::CartPole, 600, 200, &[0.0, -0.1]),
            "holonomic-paper" => (EnvName::Holonomic, 10_000, 500, &[0.0, -0.5, -1.0, -5.0]),
            "gridnav-paper" => (EnvName::GridNav, 8000, 200, &[0.0, -0.1, -0.5, -10.0]),
            other => return Err(Error::Config(format!("unknown preset {other:?}"))),
        };
        let mut base = ExperimentConfig::new(env);
        base.iterations = iterations;
        base.horizon = horizon;
        base.trajectories = 10;
        base.gamma = 0.99;
        base.lr = 1e-3;
        if env == EnvName::GridNav {
            base.seeds = (0..5).collect();
        }
        let objectives = betas
            .iter()
            .map(|&b| RiskObjective::from_beta(b))
            .collect::<Result<_>>()?;
        Ok(Self { base, objectives })
    }

    pub const PRESETS: [&'static str; 4] = [
        "cartpole-paper",
        "cartpole-reduced",
        "holonomic-paper",
        "gridnav-paper",
    ];

    /// One config per objective.
    pub fn configs(&self) -> Vec<ExperimentConfig> {
        self.objectives
            .iter()
            .map(|&objective| ExperimentConfig {
                objective,
                ..self.base.clone()
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines (`#` comments). A `preset` key, if present,
    /// must come first and supplies the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan: Option<Self> = None;
        let mut explicit_objectives: Option<Vec<RiskObjective>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "preset" {
                if plan.is_some() {
                    return Err(Error::Config("`preset` must be the first key".into()));
                }
                plan = Some(Self::preset(value)?);
                continue;
            }
            if key == "env" {
                let env: EnvName = value.parse()?;
                match plan.as_mut() {
                    Some(p) if p.base.env != env => {
                        return Err(Error::Config("`env` conflicts with preset".into()))
                    }
                    Some(_) => {}
                    None => plan = Some(Self::single(ExperimentConfig::new(env))),
                }
                continue;
            }
            let p = plan.as_mut().ok_or_else(|| {
                Error::Config("`env` or `preset` must come before other keys".into())
            })?;
            match key {
                "beta" => explicit_objectives = Some(vec![parse_objective(value)?]),
                "betas" => explicit_objectives = Some(parse_betas(value)?),
                other => p.base.set(other, value)?,
            }
        }
        let mut plan =
            plan.ok_or_else(|| Error::Config("config names no `env` or `preset`".into()))?;
        if let Some(objectives) = explicit_objectives {
            plan.set_objectives(objectives)?;
        }
        plan.base.validate()?;
        Ok(plan)
    }

    pub fn set_objectives(&mut self, objectives: Vec<RiskObjective>) -> Result<()> {
        if objectives.is_empty() {
            return Err(Error::Config("empty beta list".into()));
        }
        self.base.objective = objectives[0];
        self.objectives = objectives;
        Ok(())
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting (also used for CLI overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{key} = {value:?}: {e}"));
        match key {
            "iters" | "iterations" => self.iterations = value.parse().map_err(|e| bad(&e))?,
            "traj" | "trajectories" => self.trajectories = value.parse().map_err(|e| bad(&e))?,
            "horizon" => self.horizon = value.parse().map_err(|e| bad(&e))?,
            "gamma" => self.gamma = value.parse().map_err(|e| bad(&e))?,
            "lr" => self.lr = value.parse().map_err(|e| bad(&e))?,
            "hidden" => self.hidden = parse_hidden(value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "timing" => self.record_timing = parse_bool(value).map_err(|e| bad(&e))?,
            "dump_trajectories" => {
                self.dump_trajectories = parse_bool(value).map_err(|e| bad(&e))?
            }
            "saturation" => {
                self.saturation = match value {
                    "abort" => SaturationPolicy::Abort,
                    "clamp" => SaturationPolicy::Clamp,
                    _ => return Err(bad(&"expected abort or clamp")),
                }
            }
            "beta" => self.objective = parse_objective(value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn parse_bool(value: &str) -> std::result::Result<bool, &'static str> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err("expected true or false"),
    }
}

/// `neutral`, `0`, or a nonzero float.
pub fn parse_objective(value: &str) -> Result<RiskObjective> {
    if value == "neutral" {
        return Ok(RiskObjective::Neutral);
    }
    let beta: f64 = value
        .parse()
        .map_err(|e| Error::Config(format!("beta {value:?}: {e}")))?;
    RiskObjective::from_beta(beta)
}

pub fn parse_betas(value: &str) -> Result<Vec<RiskObjective>> {
    value
        .split(',')
        .map(|v| parse_objective(v.trim()))
        .collect()
}

/// `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let bad = |e: &dyn std::fmt::Display| Error::Config(format!("seeds {value:?}: {e}"));
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|e| bad(&e))?;
        let hi: u64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|e| bad(&e))?;
        if hi < lo {
            return Err(bad(&"empty range"));
        }
        return Ok((lo..=hi).collect());
    }
    value
        .split(',')
        .map(|s| s.trim().parse().map_err(|e| bad(&e)))
        .collect()
}

fn parse_hidden(value: &str) -> Result<[usize; HIDDEN_LAYERS]> {
    let widths = value
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Config(format!("hidden {value:?}: {e}")))?;
    match widths.as_slice() {
        [w] => Ok([*w; HIDDEN_LAYERS]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Config(format!(
            "hidden {value:?}: expected 1 or {HIDDEN_LAYERS} widths"
        ))),
    }
}

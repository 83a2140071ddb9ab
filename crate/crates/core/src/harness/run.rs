use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::env::{write_trajectory_csv, CartPole, EnvName, Environment, GridNav, Holonomic};
use crate::error::{Error, Result};
use crate::policy::{layer_sizes, PolicyParams};
use crate::reinforce::{
    adam_update, estimate_gradient_cached, grad_norm, ActivationCache, AdamState, Rollout,
    Trajectory,
};

pub const METRICS_HEADER: &str = "iter,mean_return,mean_disc_return,grad_norm,saturations,ms";

/// Metrics for one policy-update iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub iter: usize,
    /// Mean undiscounted return over the iteration's trajectories.
    pub mean_return: f64,
    pub mean_disc_return: f64,
    pub grad_norm: f64,
    pub saturations: usize,
    pub ms: u64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub final_params: PolicyParams,
    pub checkpoint: Option<PathBuf>,
}

impl RunRecord {
    pub fn metrics_csv(&self) -> String {
        metrics_to_csv(&self.rows)
    }

    /// Mean of `mean_return` over the last `window` iterations.
    pub fn final_mean_return(&self, window: usize) -> f64 {
        let tail = &self.rows[self.rows.len().saturating_sub(window)..];
        tail.iter().map(|r| r.mean_return).sum::<f64>() / tail.len().max(1) as f64
    }

    /// First iteration whose mean return reaches `threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<usize> {
        self.rows.iter().position(|r| r.mean_return >= threshold)
    }

    pub fn grad_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.grad_norm).collect()
    }
}

pub fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 64 + 64);
    s.push_str(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.iter, r.mean_return, r.mean_disc_return, r.grad_norm, r.saturations, r.ms
        );
    }
    s
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == METRICS_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "metrics header mismatch: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Config(format!("metrics row {i}: expected 6 fields")));
        }
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("metrics row {i}: {e}"));
        rows.push(MetricsRow {
            iter: f[0].parse().map_err(|e| bad(&e))?,
            mean_return: f[1].parse().map_err(|e| bad(&e))?,
            mean_disc_return: f[2].parse().map_err(|e| bad(&e))?,
            grad_norm: f[3].parse().map_err(|e| bad(&e))?,
            saturations: f[4].parse().map_err(|e| bad(&e))?,
            ms: f[5].parse().map_err(|e| bad(&e))?,
        });
    }
    Ok(rows)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    parse_metrics_csv(&fs::read_to_string(path)?)
}

/// Trains one seed. Writes `seed_<s>.csv` and `seed_<s>.policy` under the
/// config's run directory when `out_dir` is set.
pub fn run_experiment(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let mut record = match config.env {
        EnvName::CartPole => train(config, seed, &CartPole::with_horizon(config.horizon)),
        EnvName::Holonomic => train(
            config,
            seed,
            &Holonomic::new(Default::default(), config.horizon),
        ),
        EnvName::GridNav => train(config, seed, &GridNav::with_horizon(config.horizon)),
    }?;
    if let Some(dir) = config.run_dir() {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("seed_{seed}.csv")), record.metrics_csv())?;
        let ckpt = dir.join(format!("seed_{seed}.policy"));
        super::save_checkpoint(&record.final_params, &ckpt)?;
        record.checkpoint = Some(ckpt);
    }
    Ok(record)
}

/// Runs every seed of `config`, fanned out over the rayon pool. Records come
/// back in seed order.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    config
        .seeds
        .par_iter()
        .map(|&seed| run_experiment(config, seed))
        .collect()
}

fn train<E: Environment>(config: &ExperimentConfig, seed: u64, env: &E) -> Result<RunRecord> {
    let spec = env.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = layer_sizes(spec.obs_dim, config.hidden, spec.action_count);
    let mut params = PolicyParams::init(&sizes, &mut rng)?;
    let mut adam = AdamState::with_lr(params.param_count(), config.lr)?;
    let mut rollout = Rollout::new();
    let mut cache = ActivationCache::new();
    let mut rows = Vec::with_capacity(config.iterations);
    let mut batch: Vec<Trajectory> = Vec::with_capacity(config.trajectories);
    let dump_dir = match (config.dump_trajectories, config.run_dir()) {
        (true, Some(dir)) => {
            let d = dir.join("traj");
            fs::create_dir_all(&d)?;
            Some(d)
        }
        _ => None,
    };

    for iter in 0..config.iterations {
        let started = Instant::now();
        batch.clear();
        cache.clear();
        for _ in 0..config.trajectories {
            batch.push(rollout.sample_cached(
                &params,
                env,
                config.horizon,
                &mut rng,
                &mut cache,
            )?);
        }
        let estimate = estimate_gradient_cached(
            &params,
            &batch,
            &cache,
            config.gamma,
            config.objective,
            config.saturation,
        )?;
        let n = batch.len() as f64;
        let mean_return = batch
            .iter()
            .map(Trajectory::undiscounted_return)
            .sum::<f64>()
            / n;
        let mean_disc_return = batch
            .iter()
            .map(|t| t.discounted_return(config.gamma))
            .sum::<f64>()
            / n;
        let norm = grad_norm(&estimate.grad);
        adam_update(&mut params, &estimate.grad, &mut adam)?;

        if let Some(dir) = &dump_dir {
            for (k, traj) in batch.iter().enumerate() {
                let path = dir.join(format!("seed_{seed}_iter_{iter}_traj_{k}.csv"));
                dump_trajectory(traj, &path)?;
            }
        }
        rows.push(MetricsRow {
            iter,
            mean_return,
            mean_disc_return,
            grad_norm: norm,
            saturations: estimate.saturated,
            ms: if config.record_timing {
                started.elapsed().as_millis() as u64
            } else {
                0
            },
        });
    }

    Ok(RunRecord {
        config: config.clone(),
        seed,
        rows,
        final_params: params,
        checkpoint: None,
    })
}

fn dump_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = BufWriter::new(fs::File::create(path)?);
    let len = traj.len();
    let rows = traj
        .steps()
        .enumerate()
        .map(|(t, (s, a, r))| (s.to_vec(), a, r, t + 1 == len && traj.terminated()));
    write_trajectory_csv(file, traj.obs_dim(), rows)
}

/// Reads the `reward` column of a trajectory dump.
pub fn read_trajectory_rewards(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "reward")
        .ok_or_else(|| Error::Config(format!("{}: no reward column", path.display())))?;
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .nth(col)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad row {l:?}", path.display())))
        })
        .collect()
}

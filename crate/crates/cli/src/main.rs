//! `riskgrad`: train, analyze and plot.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use riskgrad::complexity::ComplexityInputs;
use riskgrad::harness::{
    aggregate_metrics, aggregate_runs, analysis_csv, analyze, emit_chart, parse_betas,
    read_metrics_csv, run_seeds, ExperimentConfig, ExperimentPlan,
};
use riskgrad::{EnvName, Error};

#[derive(Parser)]
#[command(
    name = "riskgrad",
    version,
    about = "Risk-sensitive REINFORCE experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train policies for every (beta, seed) pair and write metrics.
    Train(TrainArgs),
    /// Sweep beta through the iteration-complexity formulas.
    Analyze(AnalyzeArgs),
    /// Aggregate seed CSVs in a run directory and draw a chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Key = value config file, or a preset name (cartpole-paper, cartpole-reduced,
    /// holonomic-paper, gridnav-paper).
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    env: Option<String>,
    /// Single beta or comma list; 0 means risk-neutral.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// `0..9` (inclusive) or comma list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    /// One width or three comma-separated widths.
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock milliseconds in the metrics CSV.
    #[arg(long)]
    timing: bool,
    /// Clamp and count saturated utilities instead of aborting.
    #[arg(long)]
    allow_saturation: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    rmax: f64,
    #[arg(long)]
    f1: f64,
    #[arg(long)]
    f2: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    delta0: f64,
    #[arg(long)]
    eps: f64,
    /// Comma-separated nonzero betas.
    #[arg(long, allow_hyphen_values = true)]
    betas: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding `seed_*.csv` files.
    #[arg(long = "in")]
    input: PathBuf,
    /// `return` or `gradnorm`.
    #[arg(long)]
    metric: String,
    /// SVG path; the plotted CSV is written next to it.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => train(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Plot(args) => plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_config() => 2,
        Some(e) if e.is_numerical() => 3,
        _ => 1,
    }
}

fn build_plan(args: &TrainArgs) -> Result<ExperimentPlan, Error> {
    let mut plan = match (&args.config, &args.env) {
        (Some(c), _) if ExperimentPlan::PRESETS.contains(&c.as_str()) => ExperimentPlan::preset(c)?,
        (Some(c), _) => ExperimentPlan::load(Path::new(c))?,
        (None, Some(env)) => ExperimentPlan::single(ExperimentConfig::new(env.parse()?)),
        (None, None) => return Err(Error::Config("pass --config or --env".into())),
    };
    if let (Some(_), Some(env)) = (&args.config, &args.env) {
        let env: EnvName = env.parse()?;
        if env != plan.base.env {
            return Err(Error::Config(format!("--env {env} conflicts with config")));
        }
    }
    let base = &mut plan.base;
    let overrides: [(&str, Option<String>); 7] = [
        ("seeds", args.seeds.clone()),
        ("iters", args.iters.map(|v| v.to_string())),
        ("traj", args.traj.map(|v| v.to_string())),
        ("horizon", args.horizon.map(|v| v.to_string())),
        ("gamma", args.gamma.map(|v| v.to_string())),
        ("lr", args.lr.map(|v| v.to_string())),
        ("hidden", args.hidden.clone()),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            base.set(key, &v)?;
        }
    }
    if let Some(out) = &args.out {
        base.out_dir = Some(out.clone());
    }
    if base.out_dir.is_none() {
        base.out_dir = Some(PathBuf::from("runs"));
    }
    base.record_timing |= args.timing;
    if args.allow_saturation {
        base.set("saturation", "clamp")?;
    }
    if let Some(b) = &args.beta {
        plan.set_objectives(parse_betas(b)?)?;
    }
    plan.base.validate()?;
    Ok(plan)
}

fn train(args: TrainArgs) -> Result<()> {
    let plan = build_plan(&args)?;
    for config in plan.configs() {
        let dir = config.run_dir().expect("out dir set");
        eprintln!(
            "training {} {} ({} seeds, T={}, N={}, H={})",
            config.env,
            config.objective,
            config.seeds.len(),
            config.iterations,
            config.trajectories,
            config.horizon
        );
        let records = run_seeds(&config)?;
        for r in &records {
            eprintln!(
                "  seed {:>3}: final-100 mean return {:.3}",
                r.seed,
                r.final_mean_return(100)
            );
        }
        let table = aggregate_runs(&records)?;
        std::fs::write(dir.join("config.txt"), config.to_kv())
            .with_context(|| format!("writing {}", dir.display()))?;
        std::fs::write(dir.join("aggregate.csv"), table.to_csv())?;
        emit_chart(&table, "return", &dir.join("return.svg"))?;
        emit_chart(&table, "gradnorm", &dir.join("gradnorm.svg"))?;
        println!("{}", dir.display());
    }
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let inputs = ComplexityInputs {
        gamma: args.gamma,
        r_max: args.rmax,
        f1: args.f1,
        f2: args.f2,
        a: args.a,
        b: args.b,
        c: args.c,
        delta0: args.delta0,
        epsilon: args.eps,
    };
    let betas = args
        .betas
        .split(',')
        .map(|b| {
            b.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("beta {b:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let csv = analysis_csv(&analyze(&inputs, &betas)?);
    match args.out {
        Some(path) => {
            std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("seed_"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(
            Error::Config(format!("no seed_*.csv files in {}", args.input.display())).into(),
        );
    }
    let series = files
        .iter()
        .map(|p| read_metrics_csv(p))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&[_]> = series.iter().map(Vec::as_slice).collect();
    let table = aggregate_metrics(&refs)?;
    let out = emit_chart(&table, &args.metric, &args.out)?;
    println!("{}\n{}", out.svg.display(), out.csv.display());
    Ok(())
}

use std::fmt::Write as _;
use std::str::FromStr;

use super::run::{MetricsRow, RunRecord};
use crate::error::{Error, Result};

/// Per-iteration series that can be aggregated and plotted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Return,
    DiscountedReturn,
    GradNorm,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Return, Metric::DiscountedReturn, Metric::GradNorm];

    pub fn column(self) -> &'static str {
        match self {
            Metric::Return => "mean_return",
            Metric::DiscountedReturn => "mean_disc_return",
            Metric::GradNorm => "grad_norm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Return => "Average Return",
            Metric::DiscountedReturn => "Average Discounted Return",
            Metric::GradNorm => "Gradient Norm",
        }
    }

    fn value(self, row: &MetricsRow) -> f64 {
        match self {
            Metric::Return => row.mean_return,
            Metric::DiscountedReturn => row.mean_disc_return,
            Metric::GradNorm => row.grad_norm,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "" => Err(Error::Config("empty metric name".into())),
            "return" | "mean_return" => Ok(Metric::Return),
            "disc_return" | "mean_disc_return" => Ok(Metric::DiscountedReturn),
            "gradnorm" | "grad_norm" => Ok(Metric::GradNorm),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single run.
    pub std: f64,
}

/// Mean and sample standard deviation of every metric across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub runs: usize,
    rows: Vec<[MeanStd; 3]>,
}

impl AggregateTable {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, iter: usize, metric: Metric) -> MeanStd {
        self.rows[iter][metric as usize]
    }

    pub fn series(&self, metric: Metric) -> Vec<MeanStd> {
        self.rows.iter().map(|r| r[metric as usize]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter");
        for m in Metric::ALL {
            let _ = write!(s, ",{0}_mean,{0}_std", m.column());
        }
        s.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{i}");
            for v in row {
                let _ = write!(s, ",{},{}", v.mean, v.std);
            }
            s.push('\n');
        }
        s
    }
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MeanStd { mean, std }
}

/// Aggregates runs of one configuration (seeds may differ).
pub fn aggregate_runs(records: &[RunRecord]) -> Result<AggregateTable> {
    let first = records
        .first()
        .ok_or_else(|| Error::MismatchedRecords("no records".into()))?;
    for r in &records[1..] {
        if !r.config.same_experiment(&first.config) {
            return Err(Error::MismatchedRecords(format!(
                "seed {} differs from seed {} in configuration",
                r.seed, first.seed
            )));
        }
    }
    let series: Vec<&[MetricsRow]> = records.iter().map(|r| r.rows.as_slice()).collect();
    aggregate_metrics(&series)
}

/// Aggregates bare metric series, e.g. read back from CSV.
pub fn aggregate_metrics(series: &[&[MetricsRow]]) -> Result<AggregateTable> {
    let len = series
        .first()
        .ok_or_else(|| Error::MismatchedRecords("no records".into()))?
        .len();
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::MismatchedRecords(
            "runs have different iteration counts".into(),
        ));
    }
    let mut column = Vec::with_capacity(series.len());
    let rows = (0..len)
        .map(|i| {
            Metric::ALL.map(|m| {
                column.clear();
                column.extend(series.iter().map(|s| m.value(&s[i])));
                mean_std(&column)
            })
        })
        .collect();
    Ok(AggregateTable {
        runs: series.len(),
        rows,
    })
}

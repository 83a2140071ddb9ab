use std::fmt::Write as _;

use crate::complexity::{alpha_min, beta_admissible_range, lipschitz_sensitive, ComplexityInputs};
use crate::error::Result;

pub const ANALYSIS_HEADER: &str = "beta,alpha_min,L,L_beta,n,n_beta,ratio,in_range";

/// One row of a beta sweep. `L_beta` uses `alpha = alpha_min(beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisRow {
    pub beta: f64,
    pub alpha_min: f64,
    pub lipschitz: f64,
    pub lipschitz_beta: f64,
    pub n: f64,
    pub n_beta: f64,
    pub ratio: f64,
    pub in_range: bool,
}

pub fn analyze(inputs: &ComplexityInputs, betas: &[f64]) -> Result<Vec<AnalysisRow>> {
    inputs.validate()?;
    let range = beta_admissible_range(inputs.gamma, inputs.r_max)?;
    let lipschitz = inputs.lipschitz_neutral()?;
    let n = inputs.iterations(lipschitz)?;
    betas
        .iter()
        .map(|&beta| {
            let alpha = alpha_min(beta)?;
            let lipschitz_beta = lipschitz_sensitive(lipschitz, alpha)?;
            let n_beta = inputs.iterations(lipschitz_beta)?;
            Ok(AnalysisRow {
                beta,
                alpha_min: alpha,
                lipschitz,
                lipschitz_beta,
                n,
                n_beta,
                ratio: n_beta / n,
                in_range: range.contains(beta),
            })
        })
        .collect()
}

pub fn analysis_csv(rows: &[AnalysisRow]) -> String {
    let mut s = String::from(ANALYSIS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.beta, r.alpha_min, r.lipschitz, r.lipschitz_beta, r.n, r.n_beta, r.ratio, r.in_range
        );
    }
    s
}

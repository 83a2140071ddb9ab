use std::fmt;

use crate::error::{Error, Result};

/// Largest exponent passed to `exp` before the utility is reported as
/// saturated.
pub const EXPONENT_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskObjective {
    Neutral,
    /// Exponential utility `(1/beta) e^{beta R}`; `beta < 0` is risk-averse.
    Sensitive {
        beta: f64,
    },
}

impl RiskObjective {
    pub fn sensitive(beta: f64) -> Result<Self> {
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(RiskObjective::Sensitive { beta })
    }

    /// `0` maps to the risk-neutral objective, anything else to `sensitive(beta)`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta == 0.0 {
            Ok(RiskObjective::Neutral)
        } else {
            Self::sensitive(beta)
        }
    }

    /// The beta value, with 0 standing for risk-neutral.
    pub fn beta(&self) -> f64 {
        match *self {
            RiskObjective::Neutral => 0.0,
            RiskObjective::Sensitive { beta } => beta,
        }
    }

    /// Short label for file names (`neutral`, `beta-0.1`).
    pub fn label(&self) -> String {
        match *self {
            RiskObjective::Neutral => "neutral".to_string(),
            RiskObjective::Sensitive { beta } => format!("beta{beta}"),
        }
    }
}

impl fmt::Display for RiskObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RiskObjective::Neutral => f.write_str("neutral"),
            RiskObjective::Sensitive { beta } => write!(f, "beta={beta}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityWeight {
    pub value: f64,
    /// Set when `beta * R` exceeded [`EXPONENT_CLAMP`] and was clamped.
    pub saturated: bool,
}

/// Per-step weight multiplying the score: `R` when neutral,
/// `(1/beta) exp(beta R)` when risk-sensitive.
pub fn utility_weight(reward_to_go: f64, objective: RiskObjective) -> Result<UtilityWeight> {
    if !reward_to_go.is_finite() {
        return Err(Error::NonFinite("reward-to-go"));
    }
    match objective {
        RiskObjective::Neutral => Ok(UtilityWeight {
            value: reward_to_go,
            saturated: false,
        }),
        RiskObjective::Sensitive { beta } => {
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::InvalidBeta(beta));
            }
            let exponent = beta * reward_to_go;
            let saturated = exponent > EXPONENT_CLAMP;
            Ok(UtilityWeight {
                value: exponent.min(EXPONENT_CLAMP).exp() / beta,
                saturated,
            })
        }
    }
}

use crate::error::{Error, Result};
use crate::policy::PolicyParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for bias-corrected Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, config: AdamConfig) -> Result<Self> {
        if !(config.lr > 0.0 && config.lr.is_finite()) {
            return Err(Error::InvalidInput(format!("learning rate {}", config.lr)));
        }
        Ok(Self {
            config,
            step_count: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
        })
    }

    pub fn with_lr(param_count: usize, lr: f64) -> Result<Self> {
        Self::new(
            param_count,
            AdamConfig {
                lr,
                ..AdamConfig::default()
            },
        )
    }
}

/// One Adam step in the ascent direction: `theta += lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_update(params: &mut PolicyParams, grad: &[f64], state: &mut AdamState) -> Result<()> {
    let n = params.param_count();
    if grad.len() != n || state.first_moment.len() != n || state.second_moment.len() != n {
        return Err(Error::DimensionMismatch {
            what: "adam gradient",
            expected: n,
            got: if grad.len() != n {
                grad.len()
            } else {
                state.first_moment.len()
            },
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.config;
    state.step_count += 1;
    let t = state.step_count as i32;
    let correct1 = 1.0 - beta1.powi(t);
    let correct2 = 1.0 - beta2.powi(t);

    let moments = state
        .first_moment
        .iter_mut()
        .zip(state.second_moment.iter_mut());
    for ((theta, &g), (m, v)) in params.weights_mut().iter_mut().zip(grad).zip(moments) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / correct1;
        let v_hat = *v / correct2;
        *theta += lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

//! Closed-form smoothness constants, risk-ratio analysis, step sizes and
//! iteration bounds for risk-neutral vs. exponential-utility REINFORCE.
//!
//! The assumption constants (`F1`, `F2`, `A`, `B`, `C`) and the initial
//! suboptimality `delta0` are inputs; nothing here estimates them.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// Parameter bundle for the iteration-complexity formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityInputs {
    pub gamma: f64,
    pub r_max: f64,
    /// Bound on `E ||grad log pi||^2` is `f1^2`.
    pub f1: f64,
    /// Bound on `E ||hess log pi||`.
    pub f2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `J* - J(theta_0)`.
    pub delta0: f64,
    pub epsilon: f64,
}

impl ComplexityInputs {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gamma,
            self.r_max,
            self.f1,
            self.f2,
            self.a,
            self.b,
            self.c,
            self.delta0,
            self.epsilon,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "complexity inputs must be finite".into(),
            ));
        }
        check_gamma(self.gamma)?;
        if self.r_max <= 0.0 || self.f1 <= 0.0 || self.f2 <= 0.0 {
            return Err(Error::InvalidInput(
                "r_max, F1 and F2 must be positive".into(),
            ));
        }
        if self.a < 0.0 || self.b < 0.0 || self.c < 0.0 || self.delta0 < 0.0 {
            return Err(Error::InvalidInput(
                "A, B, C and delta0 must be nonnegative".into(),
            ));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        Ok(())
    }

    pub fn lipschitz_neutral(&self) -> Result<f64> {
        lipschitz_neutral(self.gamma, self.r_max, self.f1, self.f2)
    }

    pub fn iterations(&self, lipschitz: f64) -> Result<f64> {
        iterations_lower_bound(self.delta0, lipschitz, self.a, self.b, self.c, self.epsilon)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidInput(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// `L = r_max / (1 - gamma)^2 * (F1^2 + F2)`.
pub fn lipschitz_neutral(gamma: f64, r_max: f64, f1: f64, f2: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let one_minus = 1.0 - gamma;
    Ok(r_max / (one_minus * one_minus) * (f1 * f1 + f2))
}

/// `L_beta = alpha * L`.
pub fn lipschitz_sensitive(lipschitz: f64, alpha: f64) -> Result<f64> {
    if !(lipschitz > 0.0 && alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "L and alpha must be positive (got L = {lipschitz}, alpha = {alpha})"
        )));
    }
    Ok(alpha * lipschitz)
}

/// How the risk ratio `alpha(x)` is normalized. All three share the factor
/// `e^{|beta| x} / x` and hence the minimizer `x* = 1/|beta|`; they differ by a
/// power of `|beta|`, which fixes the minimum value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    /// `e^{|beta| x} / (|beta| x)`: the displayed ratio; minimum `e`.
    Ratio,
    /// `(1/|beta|) e^{|beta| x} / x`: the form that is differentiated; minimum `e`.
    InverseBeta,
    /// `|beta| e^{|beta| x} / x`: the normalization whose minimum is
    /// `beta^2 e`, matching [`alpha_min`] and the admissible beta range.
    #[default]
    MinimumMatching,
}

/// `alpha = e^{|beta| x} / (|beta| x)`.
pub fn alpha_ratio(beta: f64, x: f64) -> Result<f64> {
    alpha_ratio_with(beta, x, AlphaConvention::Ratio)
}

pub fn alpha_ratio_with(beta: f64, x: f64, convention: AlphaConvention) -> Result<f64> {
    check_beta(beta)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha needs x > 0, got {x}")));
    }
    let b = beta.abs();
    let core = (b * x).exp() / x;
    Ok(match convention {
        AlphaConvention::Ratio | AlphaConvention::InverseBeta => core / b,
        AlphaConvention::MinimumMatching => core * b,
    })
}

/// Minimizer of `alpha(x)`: `x* = 1/|beta|`.
pub fn alpha_argmin(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(1.0 / beta.abs())
}

/// `alpha_min = beta^2 e`.
pub fn alpha_min(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(beta * beta * E)
}

/// Open interval of `|beta|` values for which `n_beta < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRange {
    pub lower: f64,
    pub upper: f64,
    pub nonempty: bool,
}

impl BetaRange {
    /// `lower < |beta| < upper`.
    pub fn contains(&self, beta: f64) -> bool {
        let b = beta.abs();
        self.lower < b && b < self.upper
    }
}

/// `(1 - gamma) / r_max < |beta| < e^{-1/2}`.
pub fn beta_admissible_range(gamma: f64, r_max: f64) -> Result<BetaRange> {
    check_gamma(gamma)?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    let lower = (1.0 - gamma) / r_max;
    let upper = (-0.5f64).exp();
    Ok(BetaRange {
        lower,
        upper,
        nonempty: lower < upper,
    })
}

/// `(12 delta0 L / eps^2) * max{B, 12 delta0 A / eps^2, 2 C / eps^2}`: the
/// iteration count after which an eps-approximate stationary point is
/// guaranteed. Pass `L` for the risk-neutral count, `L_beta` for the
/// risk-sensitive one.
pub fn iterations_lower_bound(
    delta0: f64,
    lipschitz: f64,
    a: f64,
    b: f64,
    c: f64,
    epsilon: f64,
) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    if !(delta0 > 0.0 && lipschitz > 0.0) {
        return Err(Error::InvalidInput("delta0 and L must be positive".into()));
    }
    if a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::InvalidInput("A, B, C must be nonnegative".into()));
    }
    let eps2 = epsilon * epsilon;
    let dominant = b.max(12.0 * delta0 * a / eps2).max(2.0 * c / eps2);
    if dominant == 0.0 {
        return Err(Error::Degenerate("A = B = C = 0"));
    }
    Ok(12.0 * delta0 * lipschitz / eps2 * dominant)
}

/// Step size `min{1/sqrt(L A T), 1/(L B), eps^2/(2 L C)}`; a term whose
/// constant is zero imposes no constraint.
///
/// The last term uses `eps^2`, which is what makes the variance term of
/// [`corollary1_bound`] at most `eps^2 / 2` and pairs with the `2C/eps^2`
/// factor (an overall `eps^{-4}`) in [`iterations_lower_bound`].
pub fn stepsize_corollary2(
    lipschitz: f64,
    a: f64,
    b: f64,
    c: f64,
    iterations: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(lipschitz > 0.0 && iterations > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidInput(
            "L, T and epsilon must be positive".into(),
        ));
    }
    if a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::InvalidInput("A, B, C must be nonnegative".into()));
    }
    let candidate = |constant: f64, value: f64| if constant > 0.0 { value } else { f64::INFINITY };
    let eta = candidate(a, 1.0 / (lipschitz * a * iterations).sqrt())
        .min(candidate(b, 1.0 / (lipschitz * b)))
        .min(candidate(c, epsilon * epsilon / (2.0 * lipschitz * c)));
    if eta.is_infinite() {
        return Err(Error::Degenerate(
            "A = B = C = 0 leaves the step size unconstrained",
        ));
    }
    Ok(eta)
}

/// Right-hand side of the expected-smoothness convergence bound on
/// `min_t E ||grad J_beta(theta_t)||^2`:
/// `2 delta0 (1 + L eta^2 A)^T / (eta T (2 - L B eta)) + L C eta / (2 - L B eta)`.
pub fn corollary1_bound(
    delta0: f64,
    lipschitz: f64,
    a: f64,
    b: f64,
    c: f64,
    eta: f64,
    iterations: f64,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) || iterations.is_nan() || iterations <= 0.0 {
        return Err(Error::InvalidInput("eta and T must be positive".into()));
    }
    if lipschitz.is_nan() || lipschitz <= 0.0 || delta0 < 0.0 || a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::InvalidInput(
            "L must be positive; delta0, A, B, C nonnegative".into(),
        ));
    }
    let slack = 2.0 - lipschitz * b * eta;
    if slack <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "step size {eta} outside (0, 2/(L B)) = (0, {})",
            2.0 / (lipschitz * b)
        )));
    }
    let growth = (iterations * (lipschitz * eta * eta * a).ln_1p()).exp();
    Ok(2.0 * delta0 * growth / (eta * iterations * slack) + lipschitz * c * eta / slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_neutral(0.0, 1.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(close(
            lipschitz_neutral(0.99, 1.0, 1.0, 1.0).unwrap(),
            20000.0,
            1e-12
        ));
        let l1 = lipschitz_neutral(0.9, 1.5, 0.7, 2.0).unwrap();
        let l2 = lipschitz_neutral(0.9, 3.0, 0.7, 2.0).unwrap();
        assert!(close(l2, 2.0 * l1, 1e-15));
        assert!(lipschitz_neutral(1.0, 1.0, 1.0, 1.0).is_err());
        assert_eq!(lipschitz_sensitive(20000.0, 1.0).unwrap(), 20000.0);
        assert_eq!(lipschitz_sensitive(20000.0, 0.5).unwrap(), 10000.0);
        assert!(lipschitz_sensitive(20000.0, 0.3).unwrap() < 20000.0);
        assert!(lipschitz_sensitive(0.0, 0.5).is_err());
    }

    #[test]
    fn alpha_ratio_examples() {
        assert!(close(alpha_ratio(1.0, 1.0).unwrap(), E, 1e-15));
        assert!(close(alpha_ratio(-0.5, 2.0).unwrap(), E, 1e-15));
        let beta = 0.8;
        let at = |x: f64| alpha_ratio(beta, x / beta).unwrap();
        assert!(at(0.5) > E && at(2.0) > E);
        assert!(close(at(1.0), E, 1e-15));
        assert!(alpha_ratio(0.0, 1.0).is_err());
        assert!(alpha_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn conventions_differ_by_powers_of_beta() {
        let (beta, x) = (-0.5, 2.0);
        let ratio = alpha_ratio_with(beta, x, AlphaConvention::Ratio).unwrap();
        let inverse = alpha_ratio_with(beta, x, AlphaConvention::InverseBeta).unwrap();
        let matching = alpha_ratio_with(beta, x, AlphaConvention::MinimumMatching).unwrap();
        assert!(close(ratio, inverse, 1e-15));
        assert!(close(matching, 0.25 * E, 1e-15));
        assert!(close(matching, alpha_min(beta).unwrap(), 1e-15));
    }

    #[test]
    fn alpha_min_examples() {
        let b = (-0.5f64).exp();
        assert!((alpha_min(b).unwrap() - 1.0).abs() < 1e-12);
        assert!((alpha_min(-b).unwrap() - 1.0).abs() < 1e-12);
        assert!(close(
            alpha_min(-0.5).unwrap(),
            0.679_570_457_114_761,
            1e-12
        ));
        assert_eq!(alpha_min(0.3).unwrap(), alpha_min(-0.3).unwrap());
        assert!(alpha_min(0.0).is_err());
    }

    #[test]
    fn alpha_is_convex_with_minimizer_at_inverse_beta() {
        for convention in [
            AlphaConvention::Ratio,
            AlphaConvention::InverseBeta,
            AlphaConvention::MinimumMatching,
        ] {
            for beta in [-2.0f64, -0.5, 0.1, 1.3] {
                let xs: Vec<f64> = (1..2000).map(|i| i as f64 * 0.005 / beta.abs()).collect();
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|&x| alpha_ratio_with(beta, x, convention).unwrap())
                    .collect();
                for w in ys.windows(3) {
                    assert!(w[0] + w[2] - 2.0 * w[1] > 0.0);
                }
                let (imin, _) = ys
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap();
                assert!((xs[imin] - alpha_argmin(beta).unwrap()).abs() <= 0.005 / beta.abs());
            }
        }
    }

    #[test]
    fn beta_range_examples() {
        let r = beta_admissible_range(0.99, 1.0).unwrap();
        assert!((r.lower - 0.01).abs() < 1e-15);
        assert!((r.upper - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(r.nonempty);
        let r0 = beta_admissible_range(0.0, 1.0).unwrap();
        assert_eq!(r0.lower, 1.0);
        assert!(!r0.nonempty);
        assert_eq!(r0.upper, beta_admissible_range(0.5, 7.0).unwrap().upper);
        assert!(r.contains(-0.1) && !r.contains(-0.01) && !r.contains(-1.0));
    }

    #[test]
    fn iteration_bound_examples() {
        assert!(close(
            iterations_lower_bound(1.0, 1.0, 0.0, 1.0, 0.0, 0.1).unwrap(),
            1200.0,
            1e-12
        ));
        // B-dominant: eps^-2; A-dominant: eps^-4
        let b_ratio = iterations_lower_bound(1.0, 1.0, 0.0, 1.0, 0.0, 0.05).unwrap()
            / iterations_lower_bound(1.0, 1.0, 0.0, 1.0, 0.0, 0.1).unwrap();
        assert!(close(b_ratio, 4.0, 1e-12));
        let a_ratio = iterations_lower_bound(1.0, 1.0, 1.0, 0.0, 0.0, 0.05).unwrap()
            / iterations_lower_bound(1.0, 1.0, 1.0, 0.0, 0.0, 0.1).unwrap();
        assert!(close(a_ratio, 16.0, 1e-12));
        assert!(matches!(
            iterations_lower_bound(1.0, 1.0, 0.0, 0.0, 0.0, 0.1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn stepsize_examples() {
        assert_eq!(
            stepsize_corollary2(1.0, 0.0, 2.0, 0.0, 10.0, 0.1).unwrap(),
            0.5
        );
        assert!(close(
            stepsize_corollary2(1.0, 1.0, 0.0, 0.0, 100.0, 0.1).unwrap(),
            0.1,
            1e-15
        ));
        let mut last = f64::INFINITY;
        for t in [10.0, 100.0, 1e3, 1e4] {
            let eta = stepsize_corollary2(2.0, 1.0, 0.0, 0.0, t, 0.1).unwrap();
            assert!(eta <= last);
            last = eta;
        }
        assert!(stepsize_corollary2(1.0, 0.0, 0.0, 0.0, 10.0, 0.1).is_err());
        assert!(close(
            stepsize_corollary2(1.0, 0.0, 0.0, 2.0, 10.0, 0.1).unwrap(),
            0.0025,
            1e-12
        ));
    }

    #[test]
    fn corollary1_examples() {
        let v = corollary1_bound(2.0, 3.0, 0.0, 0.0, 0.0, 0.1, 50.0).unwrap();
        assert!(close(v, 2.0 / (0.1 * 50.0), 1e-15));
        let v = corollary1_bound(1.0, 1.0, 0.0, 1.0, 1.0, 0.5, 100.0).unwrap();
        assert!(close(v, 2.0 / 75.0 + 1.0 / 3.0, 1e-14));
        assert!((v - 0.36).abs() < 1e-12);
        let lo = corollary1_bound(1.0, 1.0, 0.1, 1.0, 0.5, 0.2, 100.0).unwrap();
        let hi = corollary1_bound(1.0, 1.0, 0.1, 1.0, 0.6, 0.2, 100.0).unwrap();
        assert!(hi > lo);
        assert!(corollary1_bound(1.0, 1.0, 0.0, 1.0, 0.0, 2.0, 10.0).is_err());
        // log-space growth stays finite where powi would not matter either way
        let big = corollary1_bound(1.0, 1.0, 1e-9, 0.0, 0.0, 1e-2, 1e8).unwrap();
        assert!(big.is_finite());
    }

    #[test]
    fn linear_eps_variance_stepsize_breaks_the_guarantee() {
        // eps / (2 L C) instead of eps^2 / (2 L C): the variance term alone is eps/4 > eps^2.
        let (delta0, l, a, b, c, eps) = (1.0, 1.0, 0.0, 0.0, 1.0, 0.1);
        let t = iterations_lower_bound(delta0, l, a, b, c, eps)
            .unwrap()
            .ceil();
        let linear_eta = eps / (2.0 * l * c);
        let linear = corollary1_bound(delta0, l, a, b, c, linear_eta, t).unwrap();
        assert!(linear > eps * eps);
        let eta = stepsize_corollary2(l, a, b, c, t, eps).unwrap();
        assert!(corollary1_bound(delta0, l, a, b, c, eta, t).unwrap() <= eps * eps);
    }

    #[test]
    fn inputs_validation() {
        let ok = ComplexityInputs {
            gamma: 0.99,
            r_max: 1.0,
            f1: 1.0,
            f2: 1.0,
            a: 0.0,
            b: 1.0,
            c: 0.0,
            delta0: 1.0,
            epsilon: 0.1,
        };
        ok.validate().unwrap();
        assert!(ComplexityInputs { gamma: 1.0, ..ok }.validate().is_err());
        assert!(ComplexityInputs { epsilon: 0.0, ..ok }.validate().is_err());
        assert!(ComplexityInputs { a: -1.0, ..ok }.validate().is_err());
        assert!(ComplexityInputs { f2: f64::NAN, ..ok }.validate().is_err());
        assert!(close(ok.lipschitz_neutral().unwrap(), 20000.0, 1e-12));
    }
}

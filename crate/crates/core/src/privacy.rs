//! Gaussian privacy mechanism.
//!
//! The tail function `Q`, its inverse, the noise-level calibration for an
//! `(ε, δ)` budget at sensitivity `Δ`, and the noise CDF used by the estimator.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{category, Error, Result, Violation};
use crate::rng::RandomStream;

/// Upper tail of the standard normal, `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal CDF `Φ(x) = Q(−x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    q_function(-x)
}

const Q_INV_BRACKET: f64 = 40.0;
const Q_INV_TOL: f64 = 1e-12;

/// `Q⁻¹(p)` by bisection on `[−40, 40]`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inverse needs p in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Q is strictly decreasing
    let (mut lo, mut hi) = (-Q_INV_BRACKET, Q_INV_BRACKET);
    while hi - lo > Q_INV_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(ε, δ)` budget together with the adjacency sensitivity `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64, sensitivity: f64) -> Result<Self> {
        let b = Self {
            epsilon,
            delta,
            sensitivity,
        };
        let v = b.validate();
        if v.is_empty() {
            Ok(b)
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            out.push(Violation::new(category::PRIVACY_BUDGET, "epsilon must be > 0"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            out.push(Violation::new(
                category::PRIVACY_BUDGET,
                "delta must lie in (0, 0.5)",
            ));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            out.push(Violation::new(
                category::PRIVACY_BUDGET,
                "sensitivity must be > 0",
            ));
        }
        out
    }
}

/// Zero-mean Gaussian privacy noise `N(0, σ²)`.
///
/// `σ = 0` is the noiseless degenerate case; its CDF is the unit step with
/// `F(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("noise sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0 }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.sigma == 0.0 {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        std_normal_cdf(x / self.sigma)
    }

    /// `F(0)`.
    pub fn cdf_at_zero(&self) -> f64 {
        self.cdf(0.0)
    }

    /// Density `f(x)`; zero everywhere for the noiseless model.
    pub fn density(&self, x: f64) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let z = x / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    /// `inf_{|x| ≤ radius} f(x)`.
    pub fn density_lower_bound(&self, radius: f64) -> f64 {
        self.density(radius.abs())
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.sigma * rng.standard_normal()
    }
}

/// Gaussian noise level for the budget:
/// `σ = Δ/(2ε) · (Q⁻¹(δ) + √(Q⁻¹(δ)² + 2ε))`.
pub fn calibrate_sigma(budget: &PrivacyBudget) -> Result<NoiseModel> {
    let v = budget.validate();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let k = q_inverse(budget.delta)?;
    let sigma = budget.sensitivity / (2.0 * budget.epsilon) * (k + (k * k + 2.0 * budget.epsilon).sqrt());
    NoiseModel::gaussian(sigma)
}

/// `sample_noise` on a model.
pub fn sample_noise(model: &NoiseModel, rng: &mut RandomStream) -> f64 {
    model.sample(rng)
}

/// Privacy loss excess on the half-line `R = (t, ∞)` for adjacent outputs
/// `y = Δ`, `y′ = 0`: `P(y + ω > t) − e^ε P(ω > t)`.
pub fn dp_excess_at(budget: &PrivacyBudget, sigma: f64, t: f64) -> f64 {
    q_function((t - budget.sensitivity) / sigma) - budget.epsilon.exp() * q_function(t / sigma)
}

/// Slack `δ − sup_R [P(M(y) ∈ R) − e^ε P(M(y′) ∈ R)]` of the Gaussian mechanism
/// with noise level `sigma`. Half-lines are the worst case for the scalar
/// Gaussian mechanism; the supremum over `t` is attained at the unique
/// stationary point `t* = εσ²/Δ + Δ/2`.
pub fn verify_dp_condition(budget: &PrivacyBudget, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let t_star = budget.epsilon * sigma * sigma / budget.sensitivity + 0.5 * budget.sensitivity;
    let worst = dp_excess_at(budget, sigma, t_star).max(0.0);
    Ok(budget.delta - worst)
}

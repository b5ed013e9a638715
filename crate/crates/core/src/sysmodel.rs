//! The true linear system, its regressor stream, and the constraint set.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{category, Error, Result, Violation};
use crate::rng::RandomStream;

/// Parameter vector (true parameter or estimate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `‖self − other‖²`
    pub fn dist_sq(&self, other: &ParamVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Regressor `φ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Regressor(pub Vec<f64>);

impl Regressor {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// `φᵀx` without a dimension check; callers validate dimensions once up front.
    pub fn dot(&self, x: &ParamVector) -> f64 {
        self.0.iter().zip(&x.0).map(|(a, b)| a * b).sum()
    }
}

impl From<Vec<f64>> for Regressor {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `y = φᵀθ`.
pub fn system_output(phi: &Regressor, theta: &ParamVector) -> Result<f64> {
    if phi.dim() != theta.dim() {
        return Err(Error::Dimension {
            expected: theta.dim(),
            got: phi.dim(),
        });
    }
    Ok(phi.dot(theta))
}

/// Convex compact constraint set Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    /// Closed origin-centred box `|x_i| ≤ half_widths[i]`.
    Box { half_widths: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl ConstraintSet {
    pub fn symmetric_box(half_widths: Vec<f64>) -> Self {
        ConstraintSet::Box { half_widths }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        ConstraintSet::Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box { half_widths } => half_widths.len(),
            ConstraintSet::Ball { center, .. } => center.len(),
        }
    }

    /// `η = sup_{w∈Ω} ‖w‖`.
    pub fn eta(&self) -> f64 {
        match self {
            ConstraintSet::Box { half_widths } => norm(half_widths),
            ConstraintSet::Ball { center, radius } => norm(center) + radius,
        }
    }

    pub fn is_origin_symmetric(&self) -> bool {
        match self {
            ConstraintSet::Box { .. } => true,
            ConstraintSet::Ball { center, .. } => center.iter().all(|c| *c == 0.0),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.dim() == 0 {
            out.push(Violation::new(
                category::CONSTRAINT_SET,
                "constraint set must have dimension >= 1",
            ));
        }
        match self {
            ConstraintSet::Box { half_widths } => {
                if half_widths.iter().any(|h| !h.is_finite() || *h < 0.0) {
                    out.push(Violation::new(
                        category::CONSTRAINT_SET,
                        "box half-widths must be finite and nonnegative (compact, nonempty set)",
                    ));
                }
            }
            ConstraintSet::Ball { center, radius } => {
                if !radius.is_finite() || *radius < 0.0 || center.iter().any(|c| !c.is_finite()) {
                    out.push(Violation::new(
                        category::CONSTRAINT_SET,
                        "ball center must be finite and radius finite and nonnegative",
                    ));
                }
            }
        }
        out
    }

    /// Membership with an absolute tolerance.
    pub fn contains(&self, x: &ParamVector, tol: f64) -> bool {
        match self {
            ConstraintSet::Box { half_widths } => x
                .0
                .iter()
                .zip(half_widths)
                .all(|(v, h)| v.abs() <= h + tol),
            ConstraintSet::Ball { center, radius } => {
                let d: f64 = x
                    .0
                    .iter()
                    .zip(center)
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum::<f64>()
                    .sqrt();
                d <= radius + tol
            }
        }
    }

    /// Euclidean projection `Π_Ω(x)`.
    pub fn project(&self, x: &ParamVector) -> ParamVector {
        let mut out = x.clone();
        self.project_in_place(&mut out.0);
        out
    }

    pub fn project_in_place(&self, x: &mut [f64]) {
        match self {
            ConstraintSet::Box { half_widths } => {
                for (v, h) in x.iter_mut().zip(half_widths) {
                    *v = v.clamp(-h, *h);
                }
            }
            ConstraintSet::Ball { center, radius } => {
                let d = x
                    .iter()
                    .zip(center)
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum::<f64>()
                    .sqrt();
                if d > *radius {
                    let scale = radius / d;
                    for (v, c) in x.iter_mut().zip(center) {
                        *v = c + (*v - c) * scale;
                    }
                }
            }
        }
    }
}

/// Distribution of the scalar input `u_k` that feeds the shift register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorMode {
    /// `u_k ~ N(0, variance)`.
    Gaussian { variance: f64 },
    /// `u_k ~ U[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Replays the listed regressors, cycling when exhausted.
    Fixed { sequence: Vec<Vec<f64>> },
}

impl RegressorMode {
    pub fn validate(&self, dim: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            RegressorMode::Gaussian { variance } => {
                if !variance.is_finite() || *variance < 0.0 {
                    out.push(Violation::new(
                        category::REGRESSOR,
                        "regressor input variance must be finite and >= 0",
                    ));
                }
            }
            RegressorMode::Uniform { half_width } => {
                if !half_width.is_finite() || *half_width < 0.0 {
                    out.push(Violation::new(
                        category::REGRESSOR,
                        "uniform input half-width must be finite and >= 0",
                    ));
                }
            }
            RegressorMode::Fixed { sequence } => {
                if sequence.is_empty() {
                    out.push(Violation::new(
                        category::REGRESSOR,
                        "fixed regressor sequence is empty",
                    ));
                }
                if sequence.iter().any(|r| r.len() != dim) {
                    out.push(Violation::new(
                        category::DIMENSION,
                        format!("every fixed regressor must have dimension {dim}"),
                    ));
                }
            }
        }
        out
    }

    /// A sure bound on `‖φ_k‖` when one exists.
    pub fn norm_bound(&self, dim: usize) -> Option<f64> {
        match self {
            RegressorMode::Gaussian { variance } if *variance == 0.0 => Some(0.0),
            RegressorMode::Gaussian { .. } => None,
            RegressorMode::Uniform { half_width } => Some(half_width * (dim as f64).sqrt()),
            RegressorMode::Fixed { sequence } => {
                Some(sequence.iter().map(|r| norm(r)).fold(0.0, f64::max))
            }
        }
    }
}

/// Stateful regressor source; one per trial (per agent), never shared.
#[derive(Debug, Clone)]
pub struct RegressorGenerator {
    mode: RegressorMode,
    dim: usize,
    // u_k, u_{k-1}, ..., newest first
    register: VecDeque<f64>,
    cursor: usize,
}

impl RegressorGenerator {
    /// Builds a generator and performs the `d − 1` warm-up draws for the
    /// shift-register modes.
    pub fn new(mode: RegressorMode, dim: usize, rng: &mut RandomStream) -> Self {
        let mut g = Self {
            mode,
            dim,
            register: VecDeque::with_capacity(dim),
            cursor: 0,
        };
        if !matches!(g.mode, RegressorMode::Fixed { .. }) {
            for _ in 1..dim {
                let u = g.draw_scalar(rng);
                g.register.push_front(u);
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> &RegressorMode {
        &self.mode
    }

    fn draw_scalar(&self, rng: &mut RandomStream) -> f64 {
        match &self.mode {
            RegressorMode::Gaussian { variance } => variance.sqrt() * rng.standard_normal(),
            RegressorMode::Uniform { half_width } => rng.uniform_in(-half_width, *half_width),
            RegressorMode::Fixed { .. } => unreachable!("fixed mode draws no scalars"),
        }
    }

    /// Next regressor `φ_k = (u_k, u_{k−1}, …, u_{k−d+1})`; consumes exactly one
    /// scalar draw in the shift-register modes and none in fixed mode.
    pub fn next_regressor(&mut self, rng: &mut RandomStream) -> Regressor {
        if let RegressorMode::Fixed { sequence } = &self.mode {
            let r = sequence[self.cursor % sequence.len()].clone();
            self.cursor += 1;
            return Regressor(r);
        }
        let u = self.draw_scalar(rng);
        self.register.push_front(u);
        self.register.truncate(self.dim);
        Regressor(self.register.iter().copied().collect())
    }
}

//! Single-center recursive identifier.
//!
//! Each step draws a regressor, perturbs the true output with privacy noise,
//! quantizes it against the predicted output `φᵀθ̂`, passes the bit through the
//! tamper channel, forms the bias-corrected innovation and takes a projected
//! step.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::{binary_quantize, tamper, Bit, ChannelParams};
use crate::config::{Experiment, ExperimentConfig, LogMode};
use crate::error::{category, Result, Violation};
use crate::harness::TrialTrajectory;
use crate::privacy::NoiseModel;
use crate::rng::{agent_seed, RandomStream};
use crate::sysmodel::{ConstraintSet, ParamVector, Regressor, RegressorGenerator, RegressorMode};

/// Power-law step sizes `b_k = c / k^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub scale: f64,
    pub exponent: f64,
}

impl StepSchedule {
    pub fn harmonic() -> Self {
        Self {
            scale: 1.0,
            exponent: 1.0,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            out.push(Violation::new(category::STEP_SCHEDULE, "step scale c must be > 0"));
        }
        if !(self.exponent > 0.0 && self.exponent <= 1.0) {
            out.push(Violation::new(
                category::STEP_SCHEDULE,
                "step exponent must lie in (0, 1] so that the steps sum to infinity",
            ));
        }
        out
    }

    pub fn step_size(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        self.scale / (k as f64).powf(self.exponent)
    }

    /// `Σ b_k² < ∞`, needed for the almost-sure statement.
    pub fn square_summable(&self) -> bool {
        self.exponent > 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// Noisy observations, innovation centred with `F(0)`.
    Private,
    /// Noise-free observations.
    Plain,
}

impl GainMode {
    pub fn tag(self) -> &'static str {
        match self {
            GainMode::Private => "private",
            GainMode::Plain => "plain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainConfig {
    pub beta: f64,
    pub mode: GainMode,
}

impl GainConfig {
    pub fn validate(&self) -> Vec<Violation> {
        if self.beta > 0.0 && self.beta.is_finite() {
            Vec::new()
        } else {
            vec![Violation::new(category::GAIN, "gain beta must be > 0")]
        }
    }
}

/// `s̃ = β(1−(p+q))((1−(p+q))F(0) + q − s)`.
pub fn innovation_private(s: Bit, gain: &GainConfig, params: &ChannelParams, f0: f64) -> f64 {
    let a = params.attenuation();
    gain.beta * a * (a * f0 + params.q - s.as_f64())
}

/// `s̃ = β(1−(p+q))(q − s)`.
pub fn innovation_plain(s: Bit, gain: &GainConfig, params: &ChannelParams) -> f64 {
    gain.beta * params.attenuation() * (params.q - s.as_f64())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub theta_hat: ParamVector,
    pub k: u64,
}

impl EstimatorState {
    pub fn new(theta_hat: ParamVector) -> Self {
        Self { theta_hat, k: 1 }
    }
}

/// `θ̂_{k+1} = Π_Ω(θ̂_k + b_k s̃_k φ_k)`.
pub fn update(
    state: &EstimatorState,
    phi: &Regressor,
    s_tilde: f64,
    b_k: f64,
    omega: &ConstraintSet,
) -> EstimatorState {
    let gain = b_k * s_tilde;
    let mut next: Vec<f64> = state
        .theta_hat
        .0
        .iter()
        .zip(&phi.0)
        .map(|(t, f)| t + gain * f)
        .collect();
    omega.project_in_place(&mut next);
    EstimatorState {
        theta_hat: ParamVector(next),
        k: state.k + 1,
    }
}

/// Analysis constants for the gain thresholds. These are supplied by the user;
/// nothing in the run computes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConditions {
    /// Lower bound on the noise density over the reachable gap range.
    /// Needed in private mode only.
    pub f_lower: Option<f64>,
    /// Excitation lower bound.
    pub delta_phi: f64,
    /// Excitation horizon.
    pub h: usize,
    /// Regressor norm bound `M`.
    pub regressor_bound: f64,
    /// `sup_{w∈Ω} ‖w‖`.
    pub eta: f64,
}

impl RateConditions {
    pub fn validate(&self, dim: usize, mode: GainMode) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |msg: &str| out.push(Violation::new(category::RATE_CONDITIONS, msg));
        if !(self.delta_phi > 0.0) {
            bad("delta_phi must be > 0");
        }
        if self.h < dim.max(1) {
            bad("excitation horizon h must be >= dimension");
        }
        if !(self.regressor_bound > 0.0) {
            bad("regressor bound M must be > 0");
        }
        if !(self.eta > 0.0) {
            bad("eta must be > 0");
        }
        match (mode, self.f_lower) {
            (GainMode::Private, None) => bad("f_lower is required in private mode"),
            // 0 is allowed: a computed bound that underflowed, giving an infinite threshold
            (_, Some(f)) if !(f >= 0.0) => bad("f_lower must be >= 0"),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub mode: GainMode,
    pub beta: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Gain needed for the `O(1/k)` mean-square rate.
///
/// Private: `β > 1/(2(1−p−q)² f̲ δ_φ)`. Plain: `β > ηM/(2δ_φ(1−p−q)²)`.
/// The comparison is strict.
pub fn check_gain_condition(
    gain: &GainConfig,
    params: &ChannelParams,
    rc: &RateConditions,
) -> GainReport {
    let a2 = params.attenuation().powi(2);
    let threshold = match gain.mode {
        GainMode::Private => {
            let f = rc.f_lower.unwrap_or(0.0);
            1.0 / (2.0 * a2 * f * rc.delta_phi)
        }
        GainMode::Plain => rc.eta * rc.regressor_bound / (2.0 * rc.delta_phi * a2),
    };
    GainReport {
        mode: gain.mode,
        beta: gain.beta,
        threshold,
        satisfied: gain.beta > threshold,
    }
}

/// Sensing and attack pipeline of one agent: regressor source, privacy noise,
/// quantizer and tamper channel, all fed from one private stream.
#[derive(Debug, Clone)]
pub struct AgentPipeline {
    rng: RandomStream,
    generator: RegressorGenerator,
    noise: NoiseModel,
    channel: ChannelParams,
    gain: GainConfig,
    f0: f64,
}

/// What one pipeline pass produced.
#[derive(Debug, Clone)]
pub struct Observation {
    pub phi: Regressor,
    pub raw_bit: Bit,
    pub bit: Bit,
    pub innovation: f64,
}

impl AgentPipeline {
    pub fn new(
        seed: u64,
        regressor: RegressorMode,
        dim: usize,
        noise: NoiseModel,
        channel: ChannelParams,
        gain: GainConfig,
    ) -> Self {
        let mut rng = RandomStream::from_seed(seed);
        let generator = RegressorGenerator::new(regressor, dim, &mut rng);
        Self {
            rng,
            generator,
            f0: noise.cdf_at_zero(),
            noise,
            channel,
            gain,
        }
    }

    pub fn for_experiment(exp: &Experiment, seed: u64) -> Self {
        Self::new(
            seed,
            exp.regressor.clone(),
            exp.dim(),
            exp.noise,
            exp.channel,
            exp.gain,
        )
    }

    /// Draw order per step is fixed: regressor, noise (private mode only),
    /// tamper uniform.
    pub fn observe(&mut self, theta: &ParamVector, theta_hat: &ParamVector) -> Observation {
        let phi = self.generator.next_regressor(&mut self.rng);
        let mut y = phi.dot(theta);
        if self.gain.mode == GainMode::Private {
            y += self.noise.sample(&mut self.rng);
        }
        let raw_bit = binary_quantize(y, phi.dot(theta_hat));
        let bit = tamper(raw_bit, &self.channel, &mut self.rng);
        let innovation = match self.gain.mode {
            GainMode::Private => innovation_private(bit, &self.gain, &self.channel, self.f0),
            GainMode::Plain => innovation_plain(bit, &self.gain, &self.channel),
        };
        Observation {
            phi,
            raw_bit,
            bit,
            innovation,
        }
    }
}

/// Steps at which the squared error is recorded, for estimates `θ̂_1 … θ̂_{K+1}`.
pub fn log_grid(steps: u64, mode: LogMode) -> Vec<u64> {
    let last = steps + 1;
    match mode {
        LogMode::Full => (1..=last).collect(),
        LogMode::Geometric => {
            let mut ks = Vec::new();
            let mut x = 1.0f64;
            loop {
                let k = x.ceil() as u64;
                if k > last {
                    break;
                }
                if ks.last() != Some(&k) {
                    ks.push(k);
                }
                x *= 1.1;
            }
            if ks.last() != Some(&last) {
                ks.push(last);
            }
            ks
        }
    }
}

/// One update as seen by an observer.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub k: u64,
    pub step_size: f64,
    pub observation: &'a Observation,
    pub before: &'a ParamVector,
    pub after: &'a ParamVector,
}

/// Runs one seeded trial of the single-center identifier.
pub fn run_estimator(config: &ExperimentConfig, seed: u64) -> Result<TrialTrajectory> {
    let exp = Experiment::from_config(config)?;
    Ok(run_trial(&exp, seed))
}

/// Runs one trial of a validated experiment.
pub fn run_trial(exp: &Experiment, seed: u64) -> TrialTrajectory {
    run_trial_observed(exp, seed, |_| {})
}

/// [`run_trial`] with a callback after every update.
pub fn run_trial_observed<F>(exp: &Experiment, seed: u64, mut observer: F) -> TrialTrajectory
where
    F: FnMut(&StepEvent<'_>),
{
    let started = Instant::now();
    let grid = log_grid(exp.steps, exp.log);
    let mut next_log = grid.iter().copied().peekable();
    let mut pipeline = AgentPipeline::for_experiment(exp, agent_seed(seed, 0));
    let mut state = EstimatorState::new(exp.theta_init.clone());
    let mut steps = Vec::with_capacity(grid.len());

    if next_log.peek() == Some(&1) {
        steps.push((1, state.theta_hat.dist_sq(&exp.theta)));
        next_log.next();
    }
    for k in 1..=exp.steps {
        let obs = pipeline.observe(&exp.theta, &state.theta_hat);
        let b = exp.schedule.step_size(k);
        let next = update(&state, &obs.phi, obs.innovation, b, &exp.omega);
        observer(&StepEvent {
            k,
            step_size: b,
            observation: &obs,
            before: &state.theta_hat,
            after: &next.theta_hat,
        });
        state = next;
        if next_log.peek() == Some(&state.k) {
            steps.push((state.k, state.theta_hat.dist_sq(&exp.theta)));
            next_log.next();
        }
    }
    TrialTrajectory {
        steps,
        seed,
        mode: exp.gain.mode.tag().to_string(),
        wall_time: started.elapsed(),
    }
}

//! Recursive identification of a linear system from one-bit observations
//! that are perturbed by Gaussian privacy noise and tampered in transit by a
//! bit-flipping attacker, for a single estimation center and for a network of
//! agents that mix estimates over an undirected graph.
//!
//! The crate is organised bottom-up:
//!
//! - [`sysmodel`]: true system, regressor streams, constraint set and projection
//! - [`privacy`]: `Q`, `Q⁻¹`, Gaussian noise calibration and its DP check
//! - [`channel`]: one-bit quantizer, tamper channel and its mean law
//! - [`estimator`]: innovations, projected update, single-center runs
//! - [`graph`]: adjacency, Laplacian, `λ₂`, connectivity
//! - [`distributed`]: networked consensus-plus-innovation runs
//! - [`harness`]: seeded Monte Carlo, aggregation, rate fitting
//! - [`config`], [`output`], [`commands`]: files in, files out, command line

pub mod channel;
pub mod commands;
pub mod config;
pub mod distributed;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod harness;
pub mod output;
pub mod privacy;
pub mod rng;
pub mod sysmodel;

pub use channel::{binary_quantize, channel_law, tamper, Bit, ChannelParams};
pub use config::{load_config, load_experiment, Experiment, ExperimentConfig, LogMode};
pub use distributed::{distributed_step, run_distributed, run_distributed_trial, NetworkState};
pub use error::{Error, Result};
pub use estimator::{
    check_gain_condition, innovation_plain, innovation_private, run_estimator, run_trial, update,
    EstimatorState, GainConfig, GainMode, RateConditions, StepSchedule,
};
pub use graph::{build_laplacian, is_connected, Adjacency, LaplacianView};
pub use harness::{fit_rate, monte_carlo, monte_carlo_distributed, AggregateCurve, RateFit, TrialTrajectory};
pub use privacy::{calibrate_sigma, q_function, q_inverse, verify_dp_condition, NoiseModel, PrivacyBudget};
pub use rng::RandomStream;
pub use sysmodel::{system_output, ConstraintSet, ParamVector, Regressor, RegressorGenerator, RegressorMode};

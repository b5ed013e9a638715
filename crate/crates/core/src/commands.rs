//! The work behind each command-line subcommand. Every function here is
//! usable from library code; the binary only parses flags and prints.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::channel::{binary_quantize, channel_law, tamper, Bit, ChannelParams};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{category, Error, Result};
use crate::estimator::GainReport;
use crate::graph::build_laplacian;
use crate::harness::{fit_rate, monte_carlo_distributed, run_trials, aggregate, AggregateCurve, RateFit};
use crate::output::{ensure_dir, write_curve_csv, write_json, write_network_csv, write_trajectory_csv, write_trials};
use crate::privacy::{calibrate_sigma, q_inverse, verify_dp_condition, NoiseModel, PrivacyBudget};
use crate::rng::{trial_seed, RandomStream, RNG_ALGORITHM};

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub epsilon: f64,
    pub delta: f64,
    pub sensitivity: f64,
    pub q_inverse_delta: f64,
    pub sigma: f64,
    pub dp_slack: f64,
}

pub fn calibrate(epsilon: f64, delta: f64, sensitivity: f64) -> Result<CalibrationReport> {
    let budget = PrivacyBudget::new(epsilon, delta, sensitivity)?;
    let noise = calibrate_sigma(&budget)?;
    Ok(CalibrationReport {
        epsilon,
        delta,
        sensitivity,
        q_inverse_delta: q_inverse(delta)?,
        sigma: noise.sigma,
        dp_slack: verify_dp_condition(&budget, noise.sigma)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelCheck {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub gap: f64,
    pub samples: usize,
    pub identifiable: bool,
    pub analytic_mean: f64,
    pub empirical_mean: f64,
    /// Binomial standard deviation of the empirical mean.
    pub std_error: f64,
    pub z_score: f64,
}

/// Passes `samples` noisy quantizations at a fixed prediction gap through the
/// channel and compares the received-bit frequency with the analytic law.
pub fn check_channel(p: f64, q: f64, sigma: f64, gap: f64, samples: usize, seed: u64) -> Result<ChannelCheck> {
    if samples == 0 {
        return Err(Error::validation(category::RUN, "samples must be >= 1"));
    }
    let params = ChannelParams::new(p, q)?;
    let noise = NoiseModel::gaussian(sigma)?;
    let mut rng = RandomStream::from_seed(seed);
    let ones = (0..samples)
        .filter(|_| {
            let w = noise.sample(&mut rng);
            tamper(binary_quantize(w, gap), &params, &mut rng) == Bit::One
        })
        .count();
    let analytic = channel_law(&params, &noise, gap);
    let empirical = ones as f64 / samples as f64;
    let std_error = (analytic * (1.0 - analytic) / samples as f64).sqrt();
    let z = if std_error > 0.0 {
        (empirical - analytic) / std_error
    } else if empirical == analytic {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ChannelCheck {
        p,
        q,
        sigma,
        gap,
        samples,
        identifiable: params.is_identifiable(),
        analytic_mean: analytic,
        empirical_mean: empirical,
        std_error,
        z_score: z,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentifySummary {
    pub config: ExperimentConfig,
    pub rng: &'static str,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub dp_slack: Option<f64>,
    pub gain_condition: Option<GainReport>,
    pub square_summable_steps: bool,
    pub final_errors: Vec<f64>,
    pub mean_final_error: f64,
    pub max_final_error: f64,
    pub warnings: Vec<String>,
}

pub struct IdentifyOutput {
    pub summary: IdentifySummary,
    pub curve: AggregateCurve,
    pub files: Vec<PathBuf>,
}

/// Runs `n_trials` seeded single-center trials and writes
/// `trial_<t>.csv` plus `summary.json` into `out_dir`.
pub fn identify(exp: &Experiment, n_trials: usize, base_seed: u64, jobs: usize, out_dir: &Path) -> Result<IdentifyOutput> {
    let trials = run_trials(exp, n_trials, base_seed, jobs)?;
    let curve = aggregate(trials.iter().map(|t| t.steps.as_slice()))?;
    let final_errors: Vec<f64> = trials.iter().filter_map(|t| t.final_error()).collect();
    let summary = IdentifySummary {
        config: exp.config.clone(),
        rng: RNG_ALGORITHM,
        base_seed,
        seeds: (0..n_trials as u64).map(|t| trial_seed(base_seed, t)).collect(),
        sigma: exp.noise.sigma,
        dp_slack: exp.dp_slack(),
        gain_condition: exp.gain_report(),
        square_summable_steps: exp.schedule.square_summable(),
        mean_final_error: final_errors.iter().sum::<f64>() / final_errors.len() as f64,
        max_final_error: final_errors.iter().copied().fold(0.0, f64::max),
        final_errors,
        warnings: exp.warnings.clone(),
    };
    ensure_dir(out_dir)?;
    let mut files = write_trials(out_dir, &trials)?;
    let s = out_dir.join("summary.json");
    write_json(&s, &summary)?;
    files.push(s);
    Ok(IdentifyOutput { summary, curve, files })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributedSummary {
    pub config: ExperimentConfig,
    pub rng: &'static str,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub dp_slack: Option<f64>,
    pub lambda2: f64,
    pub connected: bool,
    pub gain_condition: Option<GainReport>,
    /// Per agent, trial-averaged final squared error.
    pub agent_mean_final_errors: Vec<f64>,
    pub network_mean_final_error: f64,
    pub mean_final_disagreement: f64,
    pub warnings: Vec<String>,
}

pub struct DistributedOutput {
    pub summary: DistributedSummary,
    pub aggregate: crate::harness::DistributedAggregate,
    pub files: Vec<PathBuf>,
}

/// Runs the networked identifier and writes `agent_<i>.csv`,
/// `network_mean.csv` and `summary.json`.
pub fn distributed(exp: &Experiment, n_trials: usize, base_seed: u64, jobs: usize, out_dir: &Path) -> Result<DistributedOutput> {
    let adj = exp
        .graph
        .as_ref()
        .ok_or_else(|| Error::validation(category::GRAPH, "distributed run needs a [graph] section"))?;
    let lap = build_laplacian(adj);
    let agg = monte_carlo_distributed(exp, n_trials, base_seed, jobs)?;
    let summary = DistributedSummary {
        config: exp.config.clone(),
        rng: RNG_ALGORITHM,
        base_seed,
        seeds: (0..n_trials as u64).map(|t| trial_seed(base_seed, t)).collect(),
        sigma: exp.noise.sigma,
        dp_slack: exp.dp_slack(),
        lambda2: lap.lambda2,
        connected: crate::graph::is_connected(adj),
        gain_condition: exp.gain_report(),
        agent_mean_final_errors: agg.agents.iter().filter_map(|c| c.final_mean()).collect(),
        network_mean_final_error: agg.network_mean.final_mean().unwrap_or(f64::NAN),
        mean_final_disagreement: agg.disagreement.final_mean().unwrap_or(f64::NAN),
        warnings: exp.warnings.clone(),
    };
    ensure_dir(out_dir)?;
    let mut files = Vec::new();
    for (i, c) in agg.agents.iter().enumerate() {
        let p = out_dir.join(format!("agent_{i}.csv"));
        let steps: Vec<(u64, f64)> = c.ks.iter().copied().zip(c.mean_err_sq.iter().copied()).collect();
        write_trajectory_csv(&p, &steps)?;
        files.push(p);
    }
    let p = out_dir.join("network_mean.csv");
    write_network_csv(&p, &agg.network_mean, &agg.disagreement)?;
    files.push(p);
    let s = out_dir.join("summary.json");
    write_json(&s, &summary)?;
    files.push(s);
    Ok(DistributedOutput {
        summary,
        aggregate: agg,
        files,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub mode: &'static str,
    pub n_trials: usize,
    pub base_seed: u64,
    pub fit: RateFit,
    pub gain_condition: Option<GainReport>,
}

pub struct RateOutput {
    pub report: RateReport,
    pub curve: AggregateCurve,
    pub files: Vec<PathBuf>,
}

/// Monte Carlo mean curve plus its log-log slope on `[k_lo, k_hi]`; writes
/// `curve.csv` and `fit.json`.
pub fn rate(
    exp: &Experiment,
    n_trials: usize,
    base_seed: u64,
    jobs: usize,
    k_lo: u64,
    k_hi: u64,
    out_dir: Option<&Path>,
) -> Result<RateOutput> {
    let curve = crate::harness::monte_carlo(exp, n_trials, base_seed, jobs)?;
    let fit = fit_rate(&curve, k_lo, k_hi)?;
    let report = RateReport {
        mode: exp.gain.mode.tag(),
        n_trials,
        base_seed,
        fit,
        gain_condition: exp.gain_report(),
    };
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let c = dir.join("curve.csv");
        write_curve_csv(&c, &curve)?;
        let f = dir.join("fit.json");
        write_json(&f, &report)?;
        files.push(c);
        files.push(f);
    }
    Ok(RateOutput { report, curve, files })
}

//! Experiment configuration: the on-disk format, validation, and the resolved
//! [`Experiment`] the runners consume.
//!
//! Configs are TOML (JSON is accepted too, so a summary's config echo can be
//! fed back in). Validation reports every violated rule, not just the first.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{category, Error, Result, Violation};
use crate::estimator::{GainConfig, GainMode, GainReport, RateConditions, StepSchedule};
use crate::graph::{is_connected, Adjacency, Topology};
use crate::privacy::{calibrate_sigma, verify_dp_condition, NoiseModel, PrivacyBudget};
use crate::sysmodel::{ConstraintSet, ParamVector, RegressorMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogMode {
    /// Steps `⌈1.1^j⌉` plus the final estimate.
    #[default]
    Geometric,
    /// Every step.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub regressor: RegressorMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacySection {
    pub mode: GainMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
    /// Explicit noise level; overrides calibration from the budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub p: f64,
    pub q: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub beta: f64,
    #[serde(default = "one")]
    pub step_scale: f64,
    #[serde(default = "one")]
    pub step_exponent: f64,
    pub theta_hat_init: Vec<f64>,
    pub steps: u64,
    #[serde(default)]
    pub log: LogMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConditionsSection {
    /// Defaults to the noise density at `M·η`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_lower: Option<f64>,
    pub delta_phi: f64,
    pub h: usize,
    /// Defaults to the sure bound of the regressor law when it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressor_bound: Option<f64>,
    /// Defaults to `sup_{w∈Ω} ‖w‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

fn default_trials() -> usize {
    50
}

fn default_k_lo() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Worker threads; 0 means all cores.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_k_lo")]
    pub k_lo: u64,
    /// Defaults to the last logged step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hi: Option<u64>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: default_trials(),
            jobs: 0,
            k_lo: default_k_lo(),
            k_hi: None,
        }
    }
}

/// One experiment as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub constraint: ConstraintSet,
    pub privacy: PrivacySection,
    pub channel: ChannelSection,
    pub algorithm: AlgorithmSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_conditions: Option<RateConditionsSection>,
    #[serde(default)]
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Parses, then validates; returns the config only if it is valid.
    pub fn parse_validated(text: &str, origin: &Path) -> Result<Self> {
        let cfg = parse(text, origin)?;
        Experiment::from_config(&cfg)?;
        Ok(cfg)
    }
}

fn parse(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let is_json = origin.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let parsed = if is_json {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        ExperimentConfig::from_toml_str(text)
    };
    parsed.map_err(|message| Error::Parse {
        path: origin.to_path_buf(),
        message,
    })
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::parse_validated(&text, path)
}

/// Reads a config file and resolves it into a runnable experiment.
pub fn load_experiment(path: impl AsRef<Path>) -> Result<Experiment> {
    Experiment::from_config(&load_config(path)?)
}

/// A validated experiment with every derived quantity resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub theta: ParamVector,
    pub regressor: RegressorMode,
    pub omega: ConstraintSet,
    pub budget: Option<PrivacyBudget>,
    pub noise: NoiseModel,
    pub channel: ChannelParams,
    pub gain: GainConfig,
    pub schedule: StepSchedule,
    /// Initial estimate, already projected onto Ω.
    pub theta_init: ParamVector,
    pub steps: u64,
    pub log: LogMode,
    pub graph: Option<Adjacency>,
    pub rate_conditions: Option<RateConditions>,
    pub warnings: Vec<String>,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let mut v: Vec<Violation> = Vec::new();
        let mut warnings = Vec::new();

        let d = cfg.system.theta.len();
        if d == 0 {
            v.push(Violation::new(category::DIMENSION, "theta must have dimension >= 1"));
        }
        if let Some(dim) = cfg.system.dimension {
            if dim != d {
                v.push(Violation::new(
                    category::DIMENSION,
                    format!("system.dimension = {dim} but theta has {d} entries"),
                ));
            }
        }
        let theta = ParamVector(cfg.system.theta.clone());
        if !theta.is_finite() {
            v.push(Violation::new(category::DIMENSION, "theta entries must be finite"));
        }
        v.extend(cfg.system.regressor.validate(d));

        // Ω must be convex, compact, nonempty and contain θ
        let omega = cfg.constraint.clone();
        let omega_ok = {
            let ov = omega.validate();
            let ok = ov.is_empty();
            v.extend(ov);
            ok
        };
        let omega_dim_ok = omega.dim() == d;
        if !omega_dim_ok {
            v.push(Violation::new(
                category::DIMENSION,
                format!("constraint set has dimension {} but theta has {d}", omega.dim()),
            ));
        }
        if omega_ok && omega_dim_ok && !omega.contains(&theta, 0.0) {
            v.push(Violation::new(
                category::CONSTRAINT_SET,
                "true parameter theta must lie in the constraint set",
            ));
        }

        let channel = ChannelParams {
            p: cfg.channel.p,
            q: cfg.channel.q,
        };
        let probs = channel.validate_probabilities();
        if probs.is_empty() {
            v.extend(channel.validate_identifiable());
        }
        v.extend(probs);

        let mode = cfg.privacy.mode;
        let gain = GainConfig {
            beta: cfg.algorithm.beta,
            mode,
        };
        v.extend(gain.validate());
        let schedule = StepSchedule {
            scale: cfg.algorithm.step_scale,
            exponent: cfg.algorithm.step_exponent,
        };
        v.extend(schedule.validate());

        let (budget, noise) = resolve_privacy(&cfg.privacy, &mut v);

        let mut theta_init = ParamVector(cfg.algorithm.theta_hat_init.clone());
        if theta_init.dim() != d {
            v.push(Violation::new(
                category::DIMENSION,
                format!("theta_hat_init has {} entries, expected {d}", theta_init.dim()),
            ));
        } else if !theta_init.is_finite() {
            v.push(Violation::new(category::DIMENSION, "theta_hat_init must be finite"));
        } else if omega_ok && omega_dim_ok && !omega.contains(&theta_init, 0.0) {
            let projected = omega.project(&theta_init);
            let msg = format!(
                "initial estimate {:?} lies outside the constraint set; projected to {:?}",
                theta_init.0, projected.0
            );
            log::warn!("{msg}");
            warnings.push(msg);
            theta_init = projected;
        }

        let graph = cfg.graph.as_ref().and_then(|g| resolve_graph(g, &mut v));

        let rate_conditions = cfg.rate_conditions.as_ref().and_then(|rc| {
            let eta = rc.eta.unwrap_or_else(|| omega.eta());
            let m = match rc.regressor_bound.or_else(|| cfg.system.regressor.norm_bound(d)) {
                Some(m) => m,
                None => {
                    v.push(Violation::new(
                        category::RATE_CONDITIONS,
                        "regressor_bound is required when the regressor law is unbounded",
                    ));
                    return None;
                }
            };
            let f_lower = match (rc.f_lower, mode) {
                (Some(f), _) => {
                    if f == 0.0 {
                        v.push(Violation::new(category::RATE_CONDITIONS, "f_lower must be > 0"));
                    }
                    Some(f)
                }
                // may underflow to 0, which makes the private threshold infinite
                (None, GainMode::Private) => Some(noise.density_lower_bound(m * eta)),
                (None, GainMode::Plain) => None,
            };
            let resolved = RateConditions {
                f_lower,
                delta_phi: rc.delta_phi,
                h: rc.h,
                regressor_bound: m,
                eta,
            };
            let rv = resolved.validate(d, mode);
            let ok = rv.is_empty();
            v.extend(rv);
            ok.then_some(resolved)
        });

        if cfg.run.trials == 0 {
            v.push(Violation::new(category::RUN, "run.trials must be >= 1"));
        }

        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        Ok(Self {
            config: cfg.clone(),
            theta,
            regressor: cfg.system.regressor.clone(),
            omega,
            budget,
            noise,
            channel,
            gain,
            schedule,
            theta_init,
            steps: cfg.algorithm.steps,
            log: cfg.algorithm.log,
            graph,
            rate_conditions,
            warnings,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// Gain-condition report, when rate conditions were configured.
    pub fn gain_report(&self) -> Option<GainReport> {
        self.rate_conditions
            .as_ref()
            .map(|rc| crate::estimator::check_gain_condition(&self.gain, &self.channel, rc))
    }

    /// DP slack of the noise level actually used, when a budget is configured.
    pub fn dp_slack(&self) -> Option<f64> {
        let b = self.budget.as_ref()?;
        verify_dp_condition(b, self.noise.sigma).ok()
    }

    /// Upper end of the default rate-fit window.
    pub fn k_hi(&self) -> u64 {
        self.config.run.k_hi.unwrap_or(self.steps + 1)
    }
}

fn resolve_privacy(p: &PrivacySection, v: &mut Vec<Violation>) -> (Option<PrivacyBudget>, NoiseModel) {
    let any_budget = p.epsilon.is_some() || p.delta.is_some() || p.sensitivity.is_some();
    match p.mode {
        GainMode::Plain => {
            if p.sigma.is_some_and(|s| s != 0.0) || any_budget {
                v.push(Violation::new(
                    category::PLAIN_WITH_NOISE,
                    "plain mode runs without privacy noise; remove sigma > 0 and the (epsilon, delta, sensitivity) budget",
                ));
            }
            (None, NoiseModel::noiseless())
        }
        GainMode::Private => {
            let budget = match (p.epsilon, p.delta, p.sensitivity) {
                (Some(epsilon), Some(delta), Some(sensitivity)) => {
                    let b = PrivacyBudget {
                        epsilon,
                        delta,
                        sensitivity,
                    };
                    let bv = b.validate();
                    let ok = bv.is_empty();
                    v.extend(bv);
                    ok.then_some(b)
                }
                (None, None, None) => None,
                _ => {
                    v.push(Violation::new(
                        category::PRIVACY_BUDGET,
                        "epsilon, delta and sensitivity must be given together",
                    ));
                    None
                }
            };
            let sigma = match (p.sigma, budget.as_ref()) {
                (Some(s), _) => Some(s),
                (None, Some(b)) => calibrate_sigma(b).ok().map(|n| n.sigma),
                (None, None) => {
                    if !any_budget {
                        v.push(Violation::new(
                            category::PRIVACY_BUDGET,
                            "private mode needs a privacy budget or an explicit sigma",
                        ));
                    }
                    None
                }
            };
            match sigma {
                Some(s) if s > 0.0 && s.is_finite() => (budget, NoiseModel { sigma: s }),
                Some(_) => {
                    v.push(Violation::new(
                        category::PRIVACY_BUDGET,
                        "private mode needs a finite noise level sigma > 0",
                    ));
                    (budget, NoiseModel::noiseless())
                }
                None => (budget, NoiseModel::noiseless()),
            }
        }
    }
}

fn resolve_graph(g: &GraphSection, v: &mut Vec<Violation>) -> Option<Adjacency> {
    let adj = match (&g.weights, g.topology) {
        (Some(_), Some(_)) => {
            v.push(Violation::new(
                category::GRAPH,
                "give either graph.weights or graph.topology, not both",
            ));
            return None;
        }
        (Some(rows), None) => Adjacency::from_rows(rows),
        (None, Some(t)) => match (g.nodes, g.weight) {
            (Some(n), Some(w)) => Adjacency::topology(t, n, w),
            _ => {
                v.push(Violation::new(
                    category::GRAPH,
                    "named topologies need graph.nodes and graph.weight",
                ));
                return None;
            }
        },
        (None, None) => {
            v.push(Violation::new(
                category::GRAPH,
                "graph section needs weights or a topology",
            ));
            return None;
        }
    };
    match adj {
        Ok(a) => {
            if !is_connected(&a) {
                v.push(Violation::new(
                    category::DISCONNECTED_GRAPH,
                    "communication graph is not connected (graph must be undirected and connected)",
                ));
                return None;
            }
            Some(a)
        }
        Err(Error::Validation(gv)) => {
            v.extend(gv);
            None
        }
        Err(e) => {
            v.push(Violation::new(category::GRAPH, e.to_string()));
            None
        }
    }
}

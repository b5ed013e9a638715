//! Networked identifier: every agent runs its own sensing and attack pipeline
//! and mixes its estimate with its neighbors' through a Laplacian consensus
//! term before projecting.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{category, Error, Result};
use crate::estimator::{log_grid, AgentPipeline, Observation};
use crate::graph::{require_connected, Adjacency};
use crate::harness::TrialTrajectory;
use crate::privacy::NoiseModel;
use crate::rng::agent_seed;
use crate::sysmodel::{ConstraintSet, ParamVector, Regressor, RegressorMode};

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub estimates: Vec<ParamVector>,
    pub k: u64,
}

impl NetworkState {
    pub fn uniform(init: &ParamVector, n: usize) -> Self {
        Self {
            estimates: vec![init.clone(); n],
            k: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.estimates.len()
    }

    /// Network average of the estimates.
    pub fn mean_estimate(&self) -> ParamVector {
        let n = self.n() as f64;
        let d = self.estimates.first().map_or(0, |e| e.dim());
        ParamVector(
            (0..d)
                .map(|m| self.estimates.iter().map(|e| e.0[m]).sum::<f64>() / n)
                .collect(),
        )
    }
}

/// Noise and channel shared by all agents, plus the regressor law each agent
/// instantiates on its own stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentChannelBundle {
    pub noise: NoiseModel,
    pub channel: ChannelParams,
    pub regressor: RegressorMode,
}

/// `Σ_{i<j} a_ij ‖θ̂_i − θ̂_j‖²`.
pub fn disagreement(state: &NetworkState, adj: &Adjacency) -> f64 {
    let mut total = 0.0;
    for i in 0..state.n() {
        for &(j, a) in adj.neighbors(i) {
            if j > i {
                total += a * state.estimates[i].dist_sq(&state.estimates[j]);
            }
        }
    }
    total
}

/// Consensus-plus-innovation update from given innovations. Every agent reads
/// only the pre-step estimates.
pub fn consensus_update(
    state: &NetworkState,
    innovations: &[(Regressor, f64)],
    adj: &Adjacency,
    b_k: f64,
    omega: &ConstraintSet,
) -> Result<NetworkState> {
    let n = state.n();
    if adj.n() != n || innovations.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: if adj.n() != n { adj.n() } else { innovations.len() },
        });
    }
    let estimates = (0..n)
        .map(|i| {
            let own = &state.estimates[i];
            let mut next = own.0.clone();
            let nbrs = adj.neighbors(i);
            if !nbrs.is_empty() {
                let mut pull = vec![0.0; next.len()];
                for &(j, a) in nbrs {
                    for (m, p) in pull.iter_mut().enumerate() {
                        *p += a * (state.estimates[j].0[m] - own.0[m]);
                    }
                }
                for (x, p) in next.iter_mut().zip(&pull) {
                    *x += b_k * p;
                }
            }
            let (phi, s_tilde) = &innovations[i];
            let gain = b_k * s_tilde;
            for (x, f) in next.iter_mut().zip(&phi.0) {
                *x += gain * f;
            }
            omega.project_in_place(&mut next);
            ParamVector(next)
        })
        .collect();
    Ok(NetworkState {
        estimates,
        k: state.k + 1,
    })
}

/// One synchronous round: every agent observes against its own pre-step
/// estimate, then all estimates are updated together.
pub fn distributed_step(
    state: &NetworkState,
    theta: &ParamVector,
    pipelines: &mut [AgentPipeline],
    adj: &Adjacency,
    b_k: f64,
    omega: &ConstraintSet,
) -> Result<(NetworkState, Vec<Observation>)> {
    if pipelines.len() != state.n() {
        return Err(Error::Dimension {
            expected: state.n(),
            got: pipelines.len(),
        });
    }
    let observations: Vec<Observation> = pipelines
        .iter_mut()
        .zip(&state.estimates)
        .map(|(p, hat)| p.observe(theta, hat))
        .collect();
    let innov: Vec<(Regressor, f64)> = observations
        .iter()
        .map(|o| (o.phi.clone(), o.innovation))
        .collect();
    let next = consensus_update(state, &innov, adj, b_k, omega)?;
    Ok((next, observations))
}

/// Output of one networked trial; all series share the log grid.
#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub agents: Vec<TrialTrajectory>,
    /// Mean over agents of `‖θ̃_{k,i}‖²`.
    pub network_mean: TrialTrajectory,
    pub disagreement: Vec<(u64, f64)>,
}

impl DistributedRun {
    pub fn final_disagreement(&self) -> f64 {
        self.disagreement.last().map_or(0.0, |x| x.1)
    }
}

pub fn run_distributed(config: &ExperimentConfig, seed: u64) -> Result<DistributedRun> {
    let exp = Experiment::from_config(config)?;
    run_distributed_trial(&exp, seed)
}

/// Agent `i` draws from the stream seeded by `agent_seed(seed, i)`, so agent 0
/// sees exactly the draws of a single-center trial with the same seed.
pub fn run_distributed_trial(exp: &Experiment, seed: u64) -> Result<DistributedRun> {
    let adj = exp.graph.as_ref().ok_or_else(|| {
        Error::validation(category::GRAPH, "distributed run needs a [graph] section")
    })?;
    require_connected(adj)?;
    let started = Instant::now();
    let n = adj.n();
    let mut pipelines: Vec<AgentPipeline> = (0..n)
        .map(|i| AgentPipeline::for_experiment(exp, agent_seed(seed, i as u64)))
        .collect();
    let grid = log_grid(exp.steps, exp.log);
    let mut next_log = grid.iter().copied().peekable();
    let mut state = NetworkState::uniform(&exp.theta_init, n);
    let mut per_agent: Vec<Vec<(u64, f64)>> = vec![Vec::with_capacity(grid.len()); n];
    let mut mean = Vec::with_capacity(grid.len());
    let mut dis = Vec::with_capacity(grid.len());

    let mut record = |state: &NetworkState| {
        let errs: Vec<f64> = state.estimates.iter().map(|e| e.dist_sq(&exp.theta)).collect();
        for (series, e) in per_agent.iter_mut().zip(&errs) {
            series.push((state.k, *e));
        }
        mean.push((state.k, errs.iter().sum::<f64>() / n as f64));
        dis.push((state.k, disagreement(state, adj)));
    };

    if next_log.peek() == Some(&1) {
        record(&state);
        next_log.next();
    }
    for k in 1..=exp.steps {
        let b = exp.schedule.step_size(k);
        let (next, _) = distributed_step(&state, &exp.theta, &mut pipelines, adj, b, &exp.omega)?;
        state = next;
        if next_log.peek() == Some(&state.k) {
            record(&state);
            next_log.next();
        }
    }
    let elapsed = started.elapsed();
    let tag = exp.gain.mode.tag().to_string();
    let wrap = |steps| TrialTrajectory {
        steps,
        seed,
        mode: tag.clone(),
        wall_time: elapsed,
    };
    Ok(DistributedRun {
        agents: per_agent.into_iter().map(wrap).collect(),
        network_mean: wrap(mean),
        disagreement: dis,
    })
}

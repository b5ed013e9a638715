//! Seeded Monte Carlo runs, pointwise aggregation and log-log rate fits.
//!
//! Trials may execute on any number of threads; results are always folded in
//! trial order so aggregates are bit-identical regardless of scheduling.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Experiment;
use crate::distributed::{run_distributed_trial, DistributedRun};
use crate::error::{category, Error, Result};
use crate::estimator::run_trial;
use crate::rng::trial_seed;

/// Squared estimation error of one seeded trial on the log grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrajectory {
    /// `(k, ‖θ̂_k − θ‖²)`, `k` strictly increasing.
    pub steps: Vec<(u64, f64)>,
    pub seed: u64,
    pub mode: String,
    pub wall_time: Duration,
}

impl TrialTrajectory {
    pub fn final_error(&self) -> Option<f64> {
        self.steps.last().map(|s| s.1)
    }

    pub fn error_at(&self, k: u64) -> Option<f64> {
        self.steps.iter().find(|s| s.0 == k).map(|s| s.1)
    }

    /// Same seed and same recorded points, bit for bit.
    pub fn same_bits(&self, other: &TrialTrajectory) -> bool {
        self.seed == other.seed
            && self.steps.len() == other.steps.len()
            && self
                .steps
                .iter()
                .zip(&other.steps)
                .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub ks: Vec<u64>,
    pub mean_err_sq: Vec<f64>,
    /// Sample standard deviation across trials; 0 for a single trial.
    pub std_err_sq: Vec<f64>,
    pub n_trials: usize,
}

impl AggregateCurve {
    /// Mean error at the first grid point `>= k`.
    pub fn mean_at(&self, k: u64) -> Option<f64> {
        let i = self.ks.iter().position(|&x| x >= k)?;
        Some(self.mean_err_sq[i])
    }

    pub fn final_mean(&self) -> Option<f64> {
        self.mean_err_sq.last().copied()
    }

    pub fn same_bits(&self, other: &AggregateCurve) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.ks == other.ks
            && self.n_trials == other.n_trials
            && bits(&self.mean_err_sq) == bits(&other.mean_err_sq)
            && bits(&self.std_err_sq) == bits(&other.std_err_sq)
    }
}

/// Pointwise mean and sample standard deviation of series sharing one grid.
pub fn aggregate<'a, I>(series: I) -> Result<AggregateCurve>
where
    I: IntoIterator<Item = &'a [(u64, f64)]>,
{
    let series: Vec<&[(u64, f64)]> = series.into_iter().collect();
    let first = *series
        .first()
        .ok_or_else(|| Error::validation(category::RUN, "nothing to aggregate"))?;
    let ks: Vec<u64> = first.iter().map(|s| s.0).collect();
    if series.iter().any(|s| s.len() != ks.len() || s.iter().zip(&ks).any(|(a, k)| a.0 != *k)) {
        return Err(Error::validation(category::RUN, "trajectories do not share a log grid"));
    }
    let n = series.len() as f64;
    let mut mean = vec![0.0; ks.len()];
    for s in &series {
        for (m, p) in mean.iter_mut().zip(s.iter()) {
            *m += p.1;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; ks.len()];
    if series.len() > 1 {
        for s in &series {
            for ((v, p), m) in std.iter_mut().zip(s.iter()).zip(&mean) {
                *v += (p.1 - m) * (p.1 - m);
            }
        }
        std.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).sqrt());
    }
    Ok(AggregateCurve {
        ks,
        mean_err_sq: mean,
        std_err_sq: std,
        n_trials: series.len(),
    })
}

fn run_parallel<T, F>(n_trials: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs == 1 {
        return Ok((0..n_trials).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n_trials).into_par_iter().map(f).collect()))
}

/// Single-center Monte Carlo: trials `t = 0..n_trials` use seed
/// `trial_seed(base_seed, t)`. `jobs = 0` uses all cores.
pub fn run_trials(
    exp: &Experiment,
    n_trials: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<Vec<TrialTrajectory>> {
    if n_trials == 0 {
        return Err(Error::validation(category::RUN, "n_trials must be >= 1"));
    }
    run_parallel(n_trials, jobs, |t| run_trial(exp, trial_seed(base_seed, t as u64)))
}

pub fn monte_carlo(
    exp: &Experiment,
    n_trials: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<AggregateCurve> {
    let trials = run_trials(exp, n_trials, base_seed, jobs)?;
    aggregate(trials.iter().map(|t| t.steps.as_slice()))
}

/// Aggregates of a networked Monte Carlo study.
#[derive(Debug, Clone)]
pub struct DistributedAggregate {
    pub agents: Vec<AggregateCurve>,
    pub network_mean: AggregateCurve,
    pub disagreement: AggregateCurve,
    pub runs: Vec<DistributedRun>,
}

pub fn monte_carlo_distributed(
    exp: &Experiment,
    n_trials: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<DistributedAggregate> {
    if n_trials == 0 {
        return Err(Error::validation(category::RUN, "n_trials must be >= 1"));
    }
    let runs: Vec<DistributedRun> = run_parallel(n_trials, jobs, |t| {
        run_distributed_trial(exp, trial_seed(base_seed, t as u64))
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    let n_agents = runs[0].agents.len();
    let agents = (0..n_agents)
        .map(|i| aggregate(runs.iter().map(|r| r.agents[i].steps.as_slice())))
        .collect::<Result<Vec<_>>>()?;
    let network_mean = aggregate(runs.iter().map(|r| r.network_mean.steps.as_slice()))?;
    let disagreement = aggregate(runs.iter().map(|r| r.disagreement.as_slice()))?;
    Ok(DistributedAggregate {
        agents,
        network_mean,
        disagreement,
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub k_lo: u64,
    pub k_hi: u64,
    pub points: usize,
}

/// Minimum number of grid points inside a fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares fit of `log(mean_err_sq)` against `log(k)` on `[k_lo, k_hi]`.
pub fn fit_rate(curve: &AggregateCurve, k_lo: u64, k_hi: u64) -> Result<RateFit> {
    if k_lo >= k_hi {
        return Err(Error::Fit(format!("empty window [{k_lo}, {k_hi}]")));
    }
    let pts: Vec<(f64, f64)> = curve
        .ks
        .iter()
        .zip(&curve.mean_err_sq)
        .filter(|(k, _)| (k_lo..=k_hi).contains(*k))
        .map(|(k, e)| (*k, *e))
        .filter(|(_, e)| *e > 0.0)
        .map(|(k, e)| ((k as f64).ln(), e.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "window [{k_lo}, {k_hi}] has {} usable points, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        k_lo,
        k_hi,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::log_grid;
    use crate::config::LogMode;

    fn curve(f: impl Fn(f64) -> f64) -> AggregateCurve {
        let ks = log_grid(100_000, LogMode::Geometric);
        let mean = ks.iter().map(|&k| f(k as f64)).collect();
        AggregateCurve {
            std_err_sq: vec![0.0; ks.len()],
            ks,
            mean_err_sq: mean,
            n_trials: 1,
        }
    }

    #[test]
    fn exact_power_laws() {
        let f = fit_rate(&curve(|k| 3.0 / k), 1000, 100_000).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let g = fit_rate(&curve(|k| 3.0 / k.sqrt()), 1000, 100_000).unwrap();
        assert!((g.slope + 0.5).abs() < 1e-9);
        assert!((g.intercept - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        let c = curve(|k| 1.0 / k);
        assert!(matches!(fit_rate(&c, 1000, 1100), Err(Error::Fit(_))));
        assert!(matches!(fit_rate(&c, 10, 5), Err(Error::Fit(_))));
        assert!(matches!(fit_rate(&curve(|_| 0.0), 1, 100_000), Err(Error::Fit(_))));
    }

    #[test]
    fn aggregate_single_and_pair() {
        let a = vec![(1u64, 2.0), (2, 4.0)];
        let b = vec![(1u64, 4.0), (2, 8.0)];
        let one = aggregate([a.as_slice()]).unwrap();
        assert_eq!(one.mean_err_sq, vec![2.0, 4.0]);
        assert_eq!(one.std_err_sq, vec![0.0, 0.0]);
        let two = aggregate([a.as_slice(), b.as_slice()]).unwrap();
        assert_eq!(two.mean_err_sq, vec![3.0, 6.0]);
        assert!((two.std_err_sq[0] - 2f64.sqrt()).abs() < 1e-15);
        let bad = vec![(1u64, 1.0), (3, 1.0)];
        assert!(aggregate([a.as_slice(), bad.as_slice()]).is_err());
    }
}

use std::f64::consts::PI;
use std::path::PathBuf;

use binident::config::{Experiment, ExperimentConfig, GraphSection, LogMode};
use binident::distributed::{consensus_update, disagreement, distributed_step, NetworkState};
use binident::estimator::{log_grid, AgentPipeline};
use binident::graph::{build_laplacian, is_connected, Adjacency, Topology};
use binident::harness::{aggregate, fit_rate, monte_carlo, run_trials};
use binident::rng::{agent_seed, trial_seed, RandomStream};
use binident::sysmodel::{ConstraintSet, ParamVector, Regressor};
use binident::{load_config, run_distributed_trial, run_trial};
use nalgebra::DMatrix;

fn example(name: &str) -> ExperimentConfig {
    load_config(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)).unwrap()
}

fn short(name: &str, steps: u64) -> ExperimentConfig {
    let mut cfg = example(name);
    cfg.algorithm.steps = steps;
    cfg
}

#[test]
fn shipped_configs_validate() {
    for name in ["single.cfg", "single_strong.cfg", "rate_plain.cfg", "ring.cfg", "ring_strong.cfg"] {
        let exp = Experiment::from_config(&example(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(exp.warnings.is_empty(), "{name}: {:?}", exp.warnings);
        if let Some(g) = exp.gain_report() {
            assert!(g.satisfied, "{name}: {g:?}");
        }
    }
}

#[test]
fn toml_round_trip_preserves_config() {
    let cfg = example("ring.cfg");
    let back = ExperimentConfig::from_toml_str(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg, back);
}

#[test]
fn zero_steps_gives_single_record() {
    let exp = Experiment::from_config(&short("single.cfg", 0)).unwrap();
    let t = run_trial(&exp, 1);
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.steps[0].0, 1);
    let init = ParamVector(exp.config.algorithm.theta_hat_init.clone());
    assert_eq!(t.steps[0].1, init.dist_sq(&exp.theta));
}

#[test]
fn log_grid_ends_at_last_estimate() {
    let g = log_grid(100_000, LogMode::Geometric);
    assert_eq!(g[0], 1);
    assert_eq!(*g.last().unwrap(), 100_001);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(log_grid(7, LogMode::Full), (1..=8).collect::<Vec<_>>());
}

#[test]
fn trials_are_reproducible() {
    let exp = Experiment::from_config(&short("single.cfg", 5_000)).unwrap();
    let a = run_trial(&exp, trial_seed(9, 3));
    let b = run_trial(&exp, trial_seed(9, 3));
    let c = run_trial(&exp, trial_seed(9, 4));
    assert!(a.same_bits(&b));
    assert!(!a.same_bits(&c));
}

#[test]
fn single_trial_aggregate_has_zero_spread() {
    let exp = Experiment::from_config(&short("single.cfg", 2_000)).unwrap();
    let trials = run_trials(&exp, 1, 4, 1).unwrap();
    let curve = aggregate(trials.iter().map(|t| t.steps.as_slice())).unwrap();
    assert_eq!(curve.n_trials, 1);
    assert!(curve.std_err_sq.iter().all(|&s| s == 0.0));
    assert_eq!(curve.final_mean(), trials[0].final_error());
}

#[test]
fn plain_mode_beats_private_mode() {
    let private = Experiment::from_config(&short("single.cfg", 20_000)).unwrap();
    let plain = Experiment::from_config(&short("rate_plain.cfg", 20_000)).unwrap();
    let a = monte_carlo(&private, 20, 11, 0).unwrap().final_mean().unwrap();
    let b = monte_carlo(&plain, 20, 11, 0).unwrap().final_mean().unwrap();
    assert!(b < a, "plain {b} private {a}");
}

#[test]
fn fit_needs_enough_points() {
    let exp = Experiment::from_config(&short("single.cfg", 200)).unwrap();
    let curve = monte_carlo(&exp, 2, 1, 1).unwrap();
    assert!(fit_rate(&curve, 150, 200).is_err());
}

#[test]
fn cycle_lambda2_matches_closed_form() {
    for n in 3..12 {
        let adj = Adjacency::topology(Topology::Cycle, n, 0.5).unwrap();
        let expect = 2.0 * 0.5 * (1.0 - (2.0 * PI / n as f64).cos());
        assert!((build_laplacian(&adj).lambda2 - expect).abs() < 1e-9, "n={n}");
    }
}

fn random_graph(rng: &mut RandomStream, n: usize, density: f64) -> Adjacency {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.uniform() < density {
                let a = rng.uniform_in(0.1, 2.0);
                w[(i, j)] = a;
                w[(j, i)] = a;
            }
        }
    }
    Adjacency::new(w).unwrap()
}

#[test]
fn traversal_agrees_with_spectrum() {
    let mut rng = RandomStream::from_seed(2024);
    let mut seen = [0usize; 2];
    for _ in 0..100 {
        let n = 2 + (rng.uniform() * 9.0) as usize;
        let density = rng.uniform_in(0.05, 0.6);
        let adj = random_graph(&mut rng, n, density);
        let view = build_laplacian(&adj);
        let connected = is_connected(&adj);
        assert_eq!(connected, view.lambda2 > 1e-9, "{:?}", adj.rows());
        seen[connected as usize] += 1;
        let row_sums = view.laplacian.column_sum();
        assert!(row_sums.iter().all(|s| s.abs() < 1e-12));
    }
    assert!(seen[0] > 0 && seen[1] > 0);
}

#[test]
fn lambda2_is_permutation_invariant() {
    let mut rng = RandomStream::from_seed(5);
    for _ in 0..20 {
        let adj = random_graph(&mut rng, 7, 0.5);
        let perm = [3, 0, 6, 1, 5, 2, 4];
        let w = adj.weights();
        let permuted = Adjacency::new(DMatrix::from_fn(7, 7, |i, j| w[(perm[i], perm[j])])).unwrap();
        let (a, b) = (build_laplacian(&adj).lambda2, build_laplacian(&permuted).lambda2);
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn bad_adjacency_rejected() {
    assert!(Adjacency::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]).is_err());
    assert!(Adjacency::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    assert!(Adjacency::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
}

// Two-phase reference: read all, then write all.
fn reference_round(
    state: &NetworkState,
    innov: &[(Regressor, f64)],
    adj: &Adjacency,
    b: f64,
    omega: &ConstraintSet,
) -> Vec<ParamVector> {
    let n = state.n();
    let snapshot: Vec<Vec<f64>> = state.estimates.iter().map(|e| e.0.clone()).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = snapshot[i].len();
        let mut v = snapshot[i].clone();
        for j in 0..n {
            let a = adj.weight(i, j);
            for m in 0..d {
                v[m] += b * a * (snapshot[j][m] - snapshot[i][m]);
            }
        }
        for m in 0..d {
            v[m] += b * innov[i].1 * innov[i].0 .0[m];
        }
        out.push(omega.project(&ParamVector(v)));
    }
    out
}

#[test]
fn consensus_update_is_synchronous() {
    let mut rng = RandomStream::from_seed(31);
    let omega = ConstraintSet::symmetric_box(vec![3.0, 3.0]);
    let adj = Adjacency::topology(Topology::Path, 4, 0.7).unwrap();
    for _ in 0..200 {
        let state = NetworkState {
            estimates: (0..4)
                .map(|_| ParamVector(vec![rng.uniform_in(-4.0, 4.0), rng.uniform_in(-4.0, 4.0)]))
                .collect(),
            k: 1,
        };
        let innov: Vec<(Regressor, f64)> = (0..4)
            .map(|_| (Regressor(vec![rng.standard_normal(), rng.standard_normal()]), rng.uniform_in(-5.0, 5.0)))
            .collect();
        let b = rng.uniform_in(0.01, 0.5);
        let got = consensus_update(&state, &innov, &adj, b, &omega).unwrap();
        let want = reference_round(&state, &innov, &adj, b, &omega);
        for (g, w) in got.estimates.iter().zip(&want) {
            assert!(g.dist_sq(w).sqrt() < 1e-12);
        }
        assert_eq!(got.k, 2);
    }
}

#[test]
fn distributed_step_matches_trial_runner() {
    let cfg = short("ring.cfg", 300);
    let exp = Experiment::from_config(&cfg).unwrap();
    let adj = exp.graph.clone().unwrap();
    let seed = trial_seed(cfg.run.seed, 0);
    let mut pipelines: Vec<AgentPipeline> = (0..adj.n())
        .map(|i| AgentPipeline::for_experiment(&exp, agent_seed(seed, i as u64)))
        .collect();
    let init = ParamVector(cfg.algorithm.theta_hat_init.clone());
    let mut state = NetworkState::uniform(&init, adj.n());
    for k in 1..=300u64 {
        let b = exp.schedule.step_size(k);
        state = distributed_step(&state, &exp.theta, &mut pipelines, &adj, b, &exp.omega).unwrap().0;
    }
    let run = run_distributed_trial(&exp, seed).unwrap();
    for (i, agent) in run.agents.iter().enumerate() {
        assert_eq!(agent.final_error().unwrap(), state.estimates[i].dist_sq(&exp.theta));
    }
    assert_eq!(run.final_disagreement(), disagreement(&state, &adj));
}

#[test]
fn isolated_agent_matches_single_center() {
    let mut cfg = short("single_strong.cfg", 3_000);
    cfg.graph = Some(GraphSection {
        topology: None,
        nodes: None,
        weight: None,
        weights: Some(vec![vec![0.0]]),
    });
    let exp = Experiment::from_config(&cfg).unwrap();
    for t in 0..3 {
        let seed = trial_seed(77, t);
        assert!(run_trial(&exp, seed).same_bits(&run_distributed_trial(&exp, seed).unwrap().agents[0]));
    }
}

#[test]
fn parallel_and_serial_agree() {
    let exp = Experiment::from_config(&short("ring.cfg", 2_000)).unwrap();
    let a = binident::monte_carlo_distributed(&exp, 6, 3, 1).unwrap();
    let b = binident::monte_carlo_distributed(&exp, 6, 3, 3).unwrap();
    assert!(a.network_mean.same_bits(&b.network_mean));
    assert!(a.disagreement.same_bits(&b.disagreement));
    for (x, y) in a.agents.iter().zip(&b.agents) {
        assert!(x.same_bits(y));
    }
}

//! Single-center identification from a config file, printing the error curve
//! of a few seeded trials.
//!
//! cargo run --release --example single_center -- crates/core/examples/single.cfg 20

use std::path::PathBuf;

use binident::harness::monte_carlo;
use binident::{load_experiment, run_trial};

fn main() -> binident::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/single.cfg"));
    let trials: usize = args.next().map_or(10, |s| s.parse().expect("trial count"));
    let exp = load_experiment(&path)?;
    println!("theta = {:?}, sigma = {:.4}, p = {}, q = {}", exp.theta.0, exp.noise.sigma, exp.channel.p, exp.channel.q);
    if let Some(g) = exp.gain_report() {
        println!("gain condition: beta {} vs threshold {:.3} -> {}", g.beta, g.threshold, g.satisfied);
    }

    let one = run_trial(&exp, binident::rng::trial_seed(exp.config.run.seed, 0));
    println!("trial 0 final estimate error {:.3e}", one.final_error().unwrap_or(f64::NAN));

    let curve = monte_carlo(&exp, trials, exp.config.run.seed, 0)?;
    println!("{:>8} {:>12} {:>12}", "k", "mean", "std");
    let mut rows: Vec<usize> = [1, 10, 100, 1_000, 10_000, 100_000, exp.config.algorithm.steps + 1]
        .iter()
        .filter_map(|&k| curve.ks.iter().position(|&x| x >= k))
        .collect();
    rows.dedup();
    for i in rows {
        println!("{:>8} {:>12.4e} {:>12.4e}", curve.ks[i], curve.mean_err_sq[i], curve.std_err_sq[i]);
    }
    Ok(())
}

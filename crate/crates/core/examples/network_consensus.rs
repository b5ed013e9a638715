//! Five agents on a ring: per-agent error, network mean and disagreement.
//!
//! cargo run --release --example network_consensus -- crates/core/examples/ring.cfg 10

use std::path::PathBuf;

use binident::graph::build_laplacian;
use binident::harness::monte_carlo_distributed;
use binident::load_experiment;

fn main() -> binident::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/ring.cfg"));
    let trials: usize = args.next().map_or(10, |s| s.parse().expect("trial count"));
    let exp = load_experiment(&path)?;
    let adj = exp.graph.as_ref().expect("config has a [graph] section");
    println!("{} agents, lambda2 = {:.6}", adj.n(), build_laplacian(adj).lambda2);

    let agg = monte_carlo_distributed(&exp, trials, exp.config.run.seed, 0)?;
    for (i, c) in agg.agents.iter().enumerate() {
        println!("agent {i}: mean final err_sq {:.3e}", c.final_mean().unwrap_or(f64::NAN));
    }
    println!("network mean: {:.3e}", agg.network_mean.final_mean().unwrap_or(f64::NAN));
    println!("disagreement: {:.3e}", agg.disagreement.final_mean().unwrap_or(f64::NAN));
    Ok(())
}

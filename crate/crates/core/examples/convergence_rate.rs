//! Log-log slope of the mean squared error for private and plain modes.
//!
//! cargo run --release --example convergence_rate -- 20

use std::path::PathBuf;

use binident::harness::{fit_rate, monte_carlo};
use binident::load_experiment;

fn main() -> binident::Result<()> {
    let trials: usize = std::env::args().nth(1).map_or(20, |s| s.parse().expect("trial count"));
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    for name in ["single.cfg", "rate_plain.cfg"] {
        let exp = load_experiment(dir.join(name))?;
        let curve = monte_carlo(&exp, trials, exp.config.run.seed, 0)?;
        let fit = fit_rate(&curve, exp.config.run.k_lo, exp.k_hi())?;
        println!(
            "{:<8} slope {:+.3}  r2 {:.3}  on [{}, {}] with {} points",
            exp.gain.mode.tag(),
            fit.slope,
            fit.r_squared,
            fit.k_lo,
            fit.k_hi,
            fit.points
        );
    }
    Ok(())
}

//! Gaussian noise level for a privacy budget, and the worst-case DP slack.
//!
//! cargo run --example calibrate_noise -- 0.2 0.05 0.2

use binident::privacy::{calibrate_sigma, q_inverse, verify_dp_condition, PrivacyBudget};

fn main() -> binident::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let (eps, delta, sens) = match args.as_slice() {
        [e, d, s] => (*e, *d, *s),
        _ => (0.2, 0.05, 0.2),
    };
    let budget = PrivacyBudget::new(eps, delta, sens)?;
    let sigma = calibrate_sigma(&budget)?.sigma;
    println!("epsilon={eps} delta={delta} sensitivity={sens}");
    println!("Q^-1(delta) = {:.6}", q_inverse(delta)?);
    println!("sigma       = {sigma:.6}");
    println!("DP slack    = {:+.3e}", verify_dp_condition(&budget, sigma)?);
    println!("slack at sigma/10 = {:+.3e}", verify_dp_condition(&budget, sigma / 10.0)?);
    Ok(())
}

//! Mean of the received bit against its closed form, including the blind
//! spot p + q = 1 where the gap no longer matters.
//!
//! cargo run --example channel_law

use binident::channel::{binary_quantize, channel_law, tamper, Bit, ChannelParams};
use binident::privacy::NoiseModel;
use binident::rng::RandomStream;

const SAMPLES: usize = 200_000;

fn empirical(params: &ChannelParams, noise: &NoiseModel, gap: f64, rng: &mut RandomStream) -> f64 {
    let ones = (0..SAMPLES)
        .filter(|_| tamper(binary_quantize(noise.sample(rng), gap), params, rng) == Bit::One)
        .count();
    ones as f64 / SAMPLES as f64
}

fn main() -> binident::Result<()> {
    let noise = NoiseModel::gaussian(1.0)?;
    let mut rng = RandomStream::from_seed(1);
    println!("{:>5} {:>5} {:>6} {:>9} {:>9}", "p", "q", "gap", "analytic", "empirical");
    for (p, q) in [(0.2, 0.3), (0.8, 0.9), (0.4, 0.6)] {
        let params = ChannelParams::new(p, q)?;
        for gap in [-1.0, 0.0, 1.0] {
            let a = channel_law(&params, &noise, gap);
            let e = empirical(&params, &noise, gap, &mut rng);
            println!("{p:>5} {q:>5} {gap:>6} {a:>9.5} {e:>9.5}");
        }
        if !params.is_identifiable() {
            println!("      (p+q=1: received bit carries no information)");
        }
    }
    Ok(())
}

//! One-bit sensor with a moving threshold and the bit-flipping tamper channel.

use serde::{Deserialize, Serialize};

use crate::error::{category, Error, Result, Violation};
use crate::privacy::NoiseModel;
use crate::rng::RandomStream;

/// A transmitted bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_f64(self) -> f64 {
        match self {
            Bit::Zero => 0.0,
            Bit::One => 1.0,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

/// Tamper probabilities: `p = P(1 → 0)`, `q = P(0 → 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub p: f64,
    pub q: f64,
}

impl ChannelParams {
    /// Accepts any `p, q ∈ [0, 1]`, including the non-identifiable `p + q = 1`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let c = Self { p, q };
        let v = c.validate_probabilities();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Like [`ChannelParams::new`] but also rejects `p + q = 1`.
    pub fn identifiable(p: f64, q: f64) -> Result<Self> {
        let c = Self::new(p, q)?;
        let v = c.validate_identifiable();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::Validation(v))
        }
    }

    /// `1 − (p + q)`.
    pub fn attenuation(&self) -> f64 {
        1.0 - (self.p + self.q)
    }

    pub fn is_identifiable(&self) -> bool {
        self.attenuation() != 0.0
    }

    pub fn validate_probabilities(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::new(
                    category::CHANNEL,
                    format!("tamper probability {name} = {v} outside [0, 1]"),
                ));
            }
        }
        out
    }

    pub fn validate_identifiable(&self) -> Vec<Violation> {
        if self.is_identifiable() {
            Vec::new()
        } else {
            vec![Violation::new(
                category::NON_IDENTIFIABLE,
                format!(
                    "non-identifiable channel: p + q = {} + {} = 1 violates p+q≠1",
                    self.p, self.q
                ),
            )]
        }
    }
}

/// `1` iff `y_private ≤ threshold`.
pub fn binary_quantize(y_private: f64, threshold: f64) -> Bit {
    Bit::from(y_private <= threshold)
}

/// Passes `bit` through the tamper channel. Consumes exactly one uniform draw.
pub fn tamper(bit: Bit, params: &ChannelParams, rng: &mut RandomStream) -> Bit {
    let flip_prob = match bit {
        Bit::One => params.p,
        Bit::Zero => params.q,
    };
    if rng.bernoulli(flip_prob) {
        bit.flip()
    } else {
        bit
    }
}

/// Mean of the received bit given the prediction gap `φᵀθ̂ − φᵀθ`:
/// `(1 − (p + q)) F(gap) + q`.
pub fn channel_law(params: &ChannelParams, noise: &NoiseModel, gap: f64) -> f64 {
    params.attenuation() * noise.cdf(gap) + params.q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantizer_examples() {
        assert_eq!(binary_quantize(0.3, 0.5), Bit::One);
        assert_eq!(binary_quantize(0.5, 0.5), Bit::One);
        assert_eq!(binary_quantize(0.7, 0.5), Bit::Zero);
    }

    #[test]
    fn identity_and_complement_channels() {
        let mut rng = RandomStream::from_seed(1);
        let id = ChannelParams::new(0.0, 0.0).unwrap();
        let flip = ChannelParams::new(1.0, 1.0).unwrap();
        for _ in 0..1000 {
            for b in [Bit::Zero, Bit::One] {
                assert_eq!(tamper(b, &id, &mut rng), b);
                assert_eq!(tamper(b, &flip, &mut rng), b.flip());
            }
        }
    }

    #[test]
    fn flip_frequency() {
        let mut rng = RandomStream::from_seed(17);
        let c = ChannelParams::new(0.2, 0.0).unwrap();
        let n = 100_000;
        let flipped = (0..n).filter(|_| tamper(Bit::One, &c, &mut rng) == Bit::Zero).count();
        let frac = flipped as f64 / n as f64;
        let tol = 4.0 * (0.2f64 * 0.8 / n as f64).sqrt();
        assert!((frac - 0.2).abs() <= tol, "{frac}");
    }

    #[test]
    fn law_examples() {
        let clean = ChannelParams::new(0.0, 0.0).unwrap();
        let noise = NoiseModel::gaussian(1.7036).unwrap();
        assert_eq!(channel_law(&clean, &noise, 0.0), 0.5);
        let dead = ChannelParams::new(0.4, 0.6).unwrap();
        for gap in [-3.0, 0.0, 2.0] {
            assert!((channel_law(&dead, &noise, gap) - 0.6).abs() < 1e-15);
        }
        let c = ChannelParams::new(0.2, 0.3).unwrap();
        let expected = 0.5 * noise.cdf(1.0) + 0.3;
        assert!((channel_law(&c, &noise, 1.0) - expected).abs() < 1e-15);
        // empirical cross-check at fixed gap
        let mut rng = RandomStream::from_seed(8);
        let n = 1_000_000;
        let ones: usize = (0..n)
            .filter(|_| {
                let w = noise.sample(&mut rng);
                tamper(binary_quantize(w, 1.0), &c, &mut rng) == Bit::One
            })
            .count();
        let m = ones as f64 / n as f64;
        let sd = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((m - expected).abs() < 3.0 * sd, "{m} vs {expected}");
    }

    #[test]
    fn identifiability() {
        assert!(ChannelParams::identifiable(0.6, 0.4).is_err());
        let e = ChannelParams::identifiable(0.6, 0.4).unwrap_err();
        assert_eq!(e.category(), category::NON_IDENTIFIABLE);
        assert!(ChannelParams::new(0.6, 0.4).is_ok());
        assert!(ChannelParams::new(1.2, 0.0).is_err());
        assert!((ChannelParams::new(0.2, 0.3).unwrap().attenuation() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn law_monotonicity() {
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let up = ChannelParams::new(0.2, 0.3).unwrap();
        let down = ChannelParams::new(0.8, 0.9).unwrap();
        let gaps: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
        for w in gaps.windows(2) {
            assert!(channel_law(&up, &noise, w[1]) >= channel_law(&up, &noise, w[0]));
            assert!(channel_law(&down, &noise, w[1]) <= channel_law(&down, &noise, w[0]));
        }
    }
}

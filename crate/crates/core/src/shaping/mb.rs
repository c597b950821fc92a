use serde::{Deserialize, Serialize};

use super::AmplitudeAlphabet;
use crate::error::{Error, Result};

/// Maxwell–Boltzmann distribution `p_a ∝ exp(-λ a²)` over an amplitude alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbDistribution {
    pub lambda: f64,
    pub probabilities: Vec<f64>,
    pub entropy_bits: f64,
    pub avg_energy: f64,
}

impl MbDistribution {
    pub fn from_lambda(alphabet: &AmplitudeAlphabet, lambda: f64) -> Self {
        // weights relative to the smallest level keep exp() finite for large λ
        let weights: Vec<f64> = alphabet
            .levels()
            .map(|a| (-lambda * f64::from(a * a - 1)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let entropy_bits = entropy_bits(&probabilities);
        let avg_energy = average_energy(alphabet, &probabilities);
        Self {
            lambda,
            probabilities,
            entropy_bits,
            avg_energy,
        }
    }
}

/// Entropy in bits of a probability vector.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `Σ p_a a²`.
pub fn average_energy(alphabet: &AmplitudeAlphabet, p: &[f64]) -> f64 {
    alphabet
        .levels()
        .zip(p)
        .map(|(a, &pa)| pa * f64::from(a * a))
        .sum()
}

const ENTROPY_TOLERANCE: f64 = 1e-12;

/// Fits the MB distribution whose entropy equals `rate_bits` by bisection on λ.
pub fn fit_mb(alphabet: &AmplitudeAlphabet, rate_bits: f64) -> Result<MbDistribution> {
    let max = alphabet.max_rate_bits();
    if !(rate_bits > 0.0 && rate_bits <= max + 1e-15) {
        return Err(Error::InvalidRate {
            rate: rate_bits.to_string(),
            reason: format!("must lie in (0, {max}]"),
        });
    }
    if rate_bits >= max {
        return Ok(MbDistribution::from_lambda(alphabet, 0.0));
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    while MbDistribution::from_lambda(alphabet, hi).entropy_bits > rate_bits {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidRate {
                rate: rate_bits.to_string(),
                reason: "too close to zero to fit".into(),
            });
        }
    }
    // entropy decreases monotonically in λ
    let mut best = MbDistribution::from_lambda(alphabet, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = MbDistribution::from_lambda(alphabet, mid);
        if d.entropy_bits > rate_bits {
            lo = mid;
        } else {
            hi = mid;
        }
        let done = (d.entropy_bits - rate_bits).abs() <= ENTROPY_TOLERANCE;
        best = d;
        if done || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(best)
}

/// Minimum average energy per amplitude at `rate_bits`, including the
/// degenerate zero-rate point where only the smallest level is sent.
pub fn min_energy_at_rate(alphabet: &AmplitudeAlphabet, rate_bits: f64) -> Result<f64> {
    if rate_bits == 0.0 {
        return Ok(1.0);
    }
    Ok(fit_mb(alphabet, rate_bits)?.avg_energy)
}

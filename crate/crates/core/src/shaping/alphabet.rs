use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive amplitude levels `{1, 3, ..., 2M-1}` of one quadrature of an
/// M²-ary QAM constellation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct AmplitudeAlphabet {
    levels_per_quadrature: u32,
}

impl AmplitudeAlphabet {
    /// `levels_per_quadrature` is M (4 for 16-QAM, 8 for 64-QAM).
    pub fn new(levels_per_quadrature: u32) -> Result<Self> {
        if levels_per_quadrature < 2 || !levels_per_quadrature.is_power_of_two() {
            return Err(Error::config(
                "alphabet",
                format!("M = {levels_per_quadrature} must be a power of two >= 2"),
            ));
        }
        Ok(Self {
            levels_per_quadrature,
        })
    }

    pub fn qam16() -> Self {
        Self {
            levels_per_quadrature: 4,
        }
    }

    pub fn qam64() -> Self {
        Self {
            levels_per_quadrature: 8,
        }
    }

    /// M.
    pub fn levels_per_quadrature(&self) -> u32 {
        self.levels_per_quadrature
    }

    /// Number of positive amplitudes, M/2.
    pub fn len(&self) -> usize {
        (self.levels_per_quadrature / 2) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// m = log2 M, coded bits per real dimension.
    pub fn bits_per_quadrature(&self) -> u32 {
        self.levels_per_quadrature.trailing_zeros()
    }

    /// log2(M/2), the entropy of uniformly distributed amplitudes.
    pub fn max_rate_bits(&self) -> f64 {
        (self.len() as f64).log2()
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> + Clone + '_ {
        (0..self.len() as u32).map(|i| 2 * i + 1)
    }

    pub fn level(&self, index: usize) -> u32 {
        2 * index as u32 + 1
    }

    /// Index of an amplitude in the alphabet, if present.
    pub fn index_of(&self, amplitude: u32) -> Option<usize> {
        if amplitude % 2 == 1 && amplitude < self.levels_per_quadrature {
            Some((amplitude / 2) as usize)
        } else {
            None
        }
    }

    /// Energy excess `(a² - 1) / 8` of each level, the lattice coordinate
    /// used by the sphere-shaping trellis.
    pub(crate) fn lattice_weights(&self) -> Vec<usize> {
        self.levels()
            .map(|a| ((a * a - 1) / 8) as usize)
            .collect()
    }
}

impl TryFrom<u32> for AmplitudeAlphabet {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AmplitudeAlphabet> for u32 {
    fn from(value: AmplitudeAlphabet) -> Self {
        value.levels_per_quadrature
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qam16_levels() {
        let a = AmplitudeAlphabet::qam16();
        assert_eq!(a.levels().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(a.bits_per_quadrature(), 2);
        assert_eq!(a.lattice_weights(), vec![0, 1]);
    }

    #[test]
    fn qam64_weights() {
        let a = AmplitudeAlphabet::qam64();
        assert_eq!(a.levels().collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        assert_eq!(a.lattice_weights(), vec![0, 1, 3, 6]);
        assert_eq!(a.index_of(5), Some(2));
        assert_eq!(a.index_of(9), None);
        assert_eq!(a.index_of(4), None);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(AmplitudeAlphabet::new(6).is_err());
        assert!(AmplitudeAlphabet::new(1).is_err());
    }
}

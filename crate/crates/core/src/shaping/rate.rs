use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shaping rate in bits per positive amplitude, held as an exact fraction so
/// that block sizing `k = floor(n * rate)` never touches floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ShapingRate {
    num: u64,
    den: u64,
}

impl ShapingRate {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRate {
                rate: format!("{num}/{den}"),
                reason: "zero denominator".into(),
            });
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// Rate of `tenths / 10` bits, the granularity of the rate grid.
    pub fn tenths(tenths: u64) -> Self {
        Self::new(tenths, 10).expect("nonzero denominator")
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// Input bits carried by a block of `n` amplitudes.
    pub fn bits_per_block(&self, n: usize) -> u64 {
        (n as u64 * self.num) / self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }
}

impl Ord for ShapingRate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl PartialOrd for ShapingRate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ShapingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // terminating decimals print as decimals, everything else as a fraction
        let mut den = self.den;
        while den.is_multiple_of(2) {
            den /= 2;
        }
        while den.is_multiple_of(5) {
            den /= 5;
        }
        if den == 1 {
            let whole = self.num / self.den;
            let mut rem = self.num % self.den;
            if rem == 0 {
                return write!(f, "{whole}");
            }
            let mut digits = String::new();
            while rem != 0 {
                rem *= 10;
                digits.push(char::from(b'0' + (rem / self.den) as u8));
                rem %= self.den;
            }
            write!(f, "{whole}.{digits}")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for ShapingRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidRate {
            rate: s.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse().map_err(|_| bad("bad numerator"))?;
            let den = d.trim().parse().map_err(|_| bad("bad denominator"))?;
            return Self::new(num, den);
        }
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 12 {
            return Err(bad("too many decimal digits"));
        }
        let whole: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad("not a decimal"))?
        };
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad("not a decimal"))?
        };
        let den = 10u64.pow(frac.len() as u32);
        Self::new(whole * den + frac_val, den)
    }
}

impl TryFrom<String> for ShapingRate {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<ShapingRate> for String {
    fn from(value: ShapingRate) -> Self {
        value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_by_value() {
        let mut v: Vec<ShapingRate> = (2..10).rev().map(ShapingRate::tenths).collect();
        v.sort();
        assert_eq!(v, (2..10).map(ShapingRate::tenths).collect::<Vec<_>>());
        assert!(ShapingRate::tenths(5) > ShapingRate::tenths(3));
        assert!(ShapingRate::new(1, 3).unwrap() < ShapingRate::tenths(4));
    }

    #[test]
    fn block_bits_are_exact() {
        // 0.1 is not representable in binary floating point; 320 * 0.7 must still be 224
        assert_eq!(ShapingRate::tenths(7).bits_per_block(320), 224);
        assert_eq!(ShapingRate::tenths(3).bits_per_block(1280), 384);
        assert_eq!(ShapingRate::new(3, 4).unwrap().bits_per_block(8), 6);
        assert_eq!(ShapingRate::tenths(8).bits_per_block(1), 0);
    }

    #[test]
    fn parse_and_display() {
        let r: ShapingRate = "0.8".parse().unwrap();
        assert_eq!(r, ShapingRate::tenths(8));
        assert_eq!(r.to_string(), "0.8");
        assert_eq!("3/4".parse::<ShapingRate>().unwrap().to_string(), "0.75");
        assert_eq!(ShapingRate::new(1, 3).unwrap().to_string(), "1/3");
        assert_eq!(ShapingRate::tenths(10).to_string(), "1");
        assert!("x".parse::<ShapingRate>().is_err());
    }
}

//! Finite-length sphere shaping: enumerative sphere shaping (ESS), constant
//! composition distribution matching (CCDM), Maxwell–Boltzmann references and
//! shaping-gap analysis.

mod alphabet;
pub mod ccdm;
pub mod ess;
pub mod mb;
mod rate;

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

pub use alphabet::AmplitudeAlphabet;
pub use ccdm::{ccdm_select_composition, quantize_composition, CcdmCodec, CcdmComposition};
pub use ess::{EnergyStatistics, EssTrellis};
pub use mb::{fit_mb, MbDistribution};
pub use rate::ShapingRate;

use crate::error::{Error, Result};

/// Block lengths realized with ESS on the reference grid; longer blocks use CCDM.
pub const ESS_BLOCK_LENGTHS: [usize; 4] = [20, 40, 80, 320];
pub const CCDM_BLOCK_LENGTH: usize = 1280;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapingKind {
    Ess,
    Ccdm,
}

impl ShapingKind {
    /// ESS up to n = 320, CCDM beyond.
    pub fn for_block_length(n: usize) -> Self {
        if n <= 320 {
            ShapingKind::Ess
        } else {
            ShapingKind::Ccdm
        }
    }
}

impl fmt::Display for ShapingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapingKind::Ess => "ESS",
            ShapingKind::Ccdm => "CCDM",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShapingConfig {
    pub n: usize,
    pub rate: ShapingRate,
    pub alphabet: AmplitudeAlphabet,
    pub kind: ShapingKind,
}

impl ShapingConfig {
    pub fn new(
        n: usize,
        rate: ShapingRate,
        alphabet: AmplitudeAlphabet,
        kind: ShapingKind,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("shaping.n", "block length must be positive"));
        }
        if rate.as_f64() > alphabet.max_rate_bits() {
            return Err(Error::InvalidRate {
                rate: rate.to_string(),
                reason: format!(
                    "exceeds log2 of the {} positive amplitudes",
                    alphabet.len()
                ),
            });
        }
        Ok(Self {
            n,
            rate,
            alphabet,
            kind,
        })
    }

    /// The codec family used on the reference grid for this block length.
    pub fn standard(n: usize, rate: ShapingRate, alphabet: AmplitudeAlphabet) -> Result<Self> {
        Self::new(n, rate, alphabet, ShapingKind::for_block_length(n))
    }

    /// Input bits per block, `floor(n · rate)`.
    pub fn k(&self) -> u64 {
        self.rate.bits_per_block(self.n)
    }
}

/// A built amplitude codec.
#[derive(Debug, Clone)]
pub enum ShapingCodec {
    Ess(EssTrellis),
    Ccdm(CcdmCodec),
}

impl ShapingCodec {
    pub fn build(config: &ShapingConfig) -> Result<Self> {
        match config.kind {
            ShapingKind::Ess => Ok(ShapingCodec::Ess(EssTrellis::build(
                &config.alphabet,
                config.n,
                config.k(),
            )?)),
            ShapingKind::Ccdm => {
                let comp = ccdm_select_composition(&config.alphabet, config.n, config.rate)?;
                Ok(ShapingCodec::Ccdm(CcdmCodec::new(comp, config.k())?))
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ShapingCodec::Ess(t) => t.n(),
            ShapingCodec::Ccdm(c) => c.n(),
        }
    }

    pub fn k(&self) -> u64 {
        match self {
            ShapingCodec::Ess(t) => t.k(),
            ShapingCodec::Ccdm(c) => c.k(),
        }
    }

    pub fn alphabet(&self) -> &AmplitudeAlphabet {
        match self {
            ShapingCodec::Ess(t) => t.alphabet(),
            ShapingCodec::Ccdm(c) => &c.composition().alphabet,
        }
    }

    pub fn kind(&self) -> ShapingKind {
        match self {
            ShapingCodec::Ess(_) => ShapingKind::Ess,
            ShapingCodec::Ccdm(_) => ShapingKind::Ccdm,
        }
    }

    pub fn encode(&self, index: &BigUint) -> Result<Vec<u32>> {
        match self {
            ShapingCodec::Ess(t) => t.encode(index),
            ShapingCodec::Ccdm(c) => c.encode(index),
        }
    }

    pub fn decode(&self, seq: &[u32]) -> Result<BigUint> {
        match self {
            ShapingCodec::Ess(t) => t.decode(seq),
            ShapingCodec::Ccdm(c) => c.decode(seq),
        }
    }

    /// Average energy per amplitude over the used codewords.
    pub fn avg_energy(&self) -> f64 {
        self.avg_energy_with(EnergyStatistics::UsedCodewords)
    }

    pub fn avg_energy_with(&self, stats: EnergyStatistics) -> f64 {
        match self {
            ShapingCodec::Ess(t) => t.avg_energy(stats),
            ShapingCodec::Ccdm(c) => c.composition().avg_energy(),
        }
    }

    /// Operational rate `k / n` in bits per amplitude.
    pub fn rate_bits(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Marginal probability of each amplitude level over the used codewords.
    pub fn amplitude_distribution(&self) -> Vec<f64> {
        match self {
            ShapingCodec::Ess(t) => t.amplitude_distribution(),
            ShapingCodec::Ccdm(c) => c.composition().probabilities(),
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            ShapingCodec::Ess(t) => format!("ESS n={} k={} E_max={}", t.n(), t.k(), t.e_max()),
            ShapingCodec::Ccdm(c) => format!(
                "CCDM n={} k={} composition={:?}",
                c.n(),
                c.k(),
                c.composition().counts
            ),
        }
    }
}

/// Energy increase of a codec over the MB distribution at its operational
/// rate `k/n`, in dB.
pub fn shaping_gap_db(config: &ShapingConfig) -> Result<f64> {
    let codec = ShapingCodec::build(config)?;
    codec_gap_db(&codec, EnergyStatistics::UsedCodewords)
}

pub fn codec_gap_db(codec: &ShapingCodec, stats: EnergyStatistics) -> Result<f64> {
    let reference = mb::min_energy_at_rate(codec.alphabet(), codec.rate_bits())?;
    Ok(10.0 * (codec.avg_energy_with(stats) / reference).log10())
}

/// One row of the shaping-gap table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub rate: ShapingRate,
    pub kind: ShapingKind,
    pub k: u64,
    /// `E_max` for ESS, the composition for CCDM.
    pub detail: String,
    pub gap_db: Option<f64>,
    pub error: Option<String>,
}

/// Shaping gap over a grid of block lengths and rates. Infeasible points are
/// reported per row rather than failing the table.
pub fn gap_table(
    alphabet: &AmplitudeAlphabet,
    block_lengths: &[usize],
    rates: &[ShapingRate],
) -> Vec<GapRow> {
    let mut rows = Vec::new();
    for &rate in rates {
        for &n in block_lengths {
            let kind = ShapingKind::for_block_length(n);
            let row = match ShapingConfig::new(n, rate, alphabet.clone(), kind)
                .and_then(|cfg| ShapingCodec::build(&cfg))
            {
                Ok(codec) => {
                    let detail = match &codec {
                        ShapingCodec::Ess(t) => format!("E_max={}", t.e_max()),
                        ShapingCodec::Ccdm(c) => format!(
                            "composition={}",
                            c.composition()
                                .counts
                                .iter()
                                .map(|c| c.to_string())
                                .collect::<Vec<_>>()
                                .join("/")
                        ),
                    };
                    match codec_gap_db(&codec, EnergyStatistics::UsedCodewords) {
                        Ok(gap) => GapRow {
                            n,
                            rate,
                            kind,
                            k: codec.k(),
                            detail,
                            gap_db: Some(gap),
                            error: None,
                        },
                        Err(e) => GapRow {
                            n,
                            rate,
                            kind,
                            k: codec.k(),
                            detail,
                            gap_db: None,
                            error: Some(e.to_string()),
                        },
                    }
                }
                Err(e) => GapRow {
                    n,
                    rate,
                    kind,
                    k: rate.bits_per_block(n),
                    detail: String::new(),
                    gap_db: None,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    rows
}

/// `a / b` for big integers, accurate to double precision at any magnitude.
pub(crate) fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(64);
    let a = (a >> shift).to_f64().unwrap_or(0.0);
    let b = (b >> shift).to_f64().unwrap_or(f64::NAN);
    a / b
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ndr_gbps, RateConfig};
use crate::error::Result;
use crate::shaping::{AmplitudeAlphabet, ShapingCodec, ShapingConfig, ShapingKind, ShapingRate};

/// Transmitted format of every channel in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum Modulation {
    /// Uniform QPSK: a single amplitude per dimension.
    Qpsk,
    /// Shaped QAM at shaping rate `rate` bits per amplitude.
    Pcs { rate: ShapingRate },
}

impl Modulation {
    pub fn pcs(rate: ShapingRate) -> Self {
        Modulation::Pcs { rate }
    }

    /// The amplitude alphabet actually transmitted.
    pub fn alphabet(&self, pcs_alphabet: &AmplitudeAlphabet) -> AmplitudeAlphabet {
        match self {
            Modulation::Qpsk => AmplitudeAlphabet::new(2).expect("two levels is a valid alphabet"),
            Modulation::Pcs { .. } => pcs_alphabet.clone(),
        }
    }

    /// Shaping rate entering the net-data-rate formula; zero for QPSK.
    pub fn shaping_rate(&self) -> f64 {
        match self {
            Modulation::Qpsk => 0.0,
            Modulation::Pcs { rate } => rate.as_f64(),
        }
    }

    pub fn bits_per_quadrature(&self, pcs_alphabet: &AmplitudeAlphabet) -> u32 {
        self.alphabet(pcs_alphabet).bits_per_quadrature()
    }

    /// Amplitude codec of block length `n`. QPSK is the one-word ESS code over
    /// the single amplitude.
    pub fn codec(&self, n: usize, pcs_alphabet: &AmplitudeAlphabet) -> Result<ShapingCodec> {
        let cfg = match self {
            Modulation::Qpsk => ShapingConfig::new(
                n,
                ShapingRate::tenths(0),
                self.alphabet(pcs_alphabet),
                ShapingKind::Ess,
            )?,
            Modulation::Pcs { rate } => ShapingConfig::standard(n, *rate, pcs_alphabet.clone())?,
        };
        ShapingCodec::build(&cfg)
    }

    pub fn ndr_gbps(
        &self,
        pcs_alphabet: &AmplitudeAlphabet,
        rates: &RateConfig,
        symbol_rate_gbd: f64,
        subcarriers: usize,
    ) -> Result<f64> {
        ndr_gbps(
            self.shaping_rate(),
            rates,
            self.bits_per_quadrature(pcs_alphabet),
            symbol_rate_gbd,
            subcarriers,
        )
    }

    /// Short label: `QPSK` or the shaping rate.
    pub fn label(&self) -> String {
        match self {
            Modulation::Qpsk => "QPSK".into(),
            Modulation::Pcs { rate } => rate.to_string(),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Qpsk => f.write_str("QPSK"),
            Modulation::Pcs { rate } => write!(f, "PCS R_S={rate}"),
        }
    }
}

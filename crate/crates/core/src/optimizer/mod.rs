//! Rate adaptation and joint (n, N_SC) optimization per channel, system
//! totals and sweep orchestration.

mod context;
mod search;
mod sweep;

use serde::{Deserialize, Serialize};

pub use context::{ChannelContext, ChannelSim, WdmChannel, WdmContext};
pub use search::{
    benchmark_channel, optimize_channel, rate_search, system_total, CandidateRow, ChannelResult, RateEvaluation,
    RateSearchOutcome, RateSearchStrategy, SystemTotal,
};
pub use sweep::{sweep_fig3, SweepAxis, SweepRow, SweepSpec};

use crate::error::{Error, Result};
use crate::pas::Modulation;
use crate::shaping::{AmplitudeAlphabet, ShapingRate};

/// The fixed reference configuration: n = 1280 on two subcarriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub n: usize,
    pub subcarriers: usize,
}

impl Default for Benchmark {
    fn default() -> Self {
        Self {
            n: 1280,
            subcarriers: 2,
        }
    }
}

/// Search space of the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub block_lengths: Vec<usize>,
    pub subcarriers: Vec<usize>,
    /// Ascending shaping rates; entries at or below 0.2 are realized as QPSK.
    pub rates: Vec<ShapingRate>,
    pub powers_dbm: Vec<f64>,
}

impl SearchGrid {
    /// n ∈ {20, 40, 80, 320, 1280}, N_SC ∈ {1, 2, 4, 8}, R_S from 0.2 in 0.1
    /// steps below the alphabet's uniform rate, P ∈ {12, 13} dBm.
    pub fn standard(alphabet: &AmplitudeAlphabet) -> Self {
        let top = (alphabet.max_rate_bits() * 10.0).round() as u64;
        Self {
            block_lengths: vec![20, 40, 80, 320, 1280],
            subcarriers: vec![1, 2, 4, 8],
            rates: (2..top).map(ShapingRate::tenths).collect(),
            powers_dbm: vec![12.0, 13.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn sorted<T: PartialOrd>(v: &[T]) -> bool {
            v.windows(2).all(|w| w[0] < w[1])
        }
        if self.block_lengths.is_empty() || !sorted(&self.block_lengths) {
            return Err(Error::config("grid.block_lengths", "must be nonempty and strictly ascending"));
        }
        if self.subcarriers.is_empty() || !sorted(&self.subcarriers) {
            return Err(Error::config("grid.subcarriers", "must be nonempty and strictly ascending"));
        }
        if let Some(bad) = self.subcarriers.iter().find(|s| !matches!(s, 1 | 2 | 4 | 8)) {
            return Err(Error::config("grid.subcarriers", format!("{bad} not in {{1, 2, 4, 8}}")));
        }
        if self.rates.is_empty() || !sorted(&self.rates) {
            return Err(Error::config("grid.rates", "must be nonempty and strictly ascending"));
        }
        if self.powers_dbm.is_empty() || !sorted(&self.powers_dbm) {
            return Err(Error::config("grid.powers_dbm", "must be nonempty and strictly ascending"));
        }
        Ok(())
    }

    /// Formats to try, ascending, after the QPSK substitution. QPSK appears at
    /// most once, first.
    pub fn modulations(&self) -> Vec<Modulation> {
        let mut out = Vec::new();
        for &r in &self.rates {
            let m = if r <= ShapingRate::tenths(2) {
                Modulation::Qpsk
            } else {
                Modulation::pcs(r)
            };
            if out.last() != Some(&m) && !(m == Modulation::Qpsk && out.contains(&m)) {
                out.push(m);
            }
        }
        if !out.contains(&Modulation::Qpsk) {
            out.insert(0, Modulation::Qpsk);
        }
        out
    }
}

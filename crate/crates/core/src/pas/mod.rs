//! Probabilistic amplitude shaping: framing shaped amplitudes, sign bits and
//! pilots into dual-polarization symbols, and the net-data-rate accounting.

mod frame;
mod modulation;

use serde::{Deserialize, Serialize};

pub use frame::{
    deframe, frame, frame_random, hard_decision, signed_symbol, BlockRecord, Deframed,
    DeframedBlock, FrameLedger, PdmSymbolFrame,
};
pub use modulation::Modulation;

use crate::error::{Error, Result};

/// Real dimensions per dual-polarization symbol.
pub const DIMENSIONS: usize = 4;

/// FEC and framing rates entering the net-data-rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    /// FEC code rate.
    pub code_rate: f64,
    /// One pilot every `pilot_period` symbols.
    pub pilot_period: usize,
    /// Real dimensions per symbol (4 for dual polarization).
    pub alpha: f64,
    /// Decoding succeeds when NGMI reaches this value.
    pub ngmi_threshold: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            code_rate: 0.8,
            pilot_period: 48,
            alpha: 4.0,
            ngmi_threshold: 0.861,
        }
    }
}

impl RateConfig {
    /// Fraction of symbols carrying data, `(P - 1) / P`.
    pub fn pilot_ratio(&self) -> f64 {
        (self.pilot_period as f64 - 1.0) / self.pilot_period as f64
    }

    /// Parity must fit on the sign bits: `(1 - R_C) m <= 1`.
    pub fn check_feasible(&self, bits_per_quadrature: u32) -> Result<()> {
        if !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return Err(Error::config("rates.code_rate", "must lie in (0, 1]"));
        }
        if self.pilot_period < 2 {
            return Err(Error::config("rates.pilot_period", "must be at least 2"));
        }
        if (1.0 - self.code_rate) * f64::from(bits_per_quadrature) > 1.0 + 1e-12 {
            return Err(Error::config(
                "rates.code_rate",
                format!(
                    "parity (1 - {}) * {bits_per_quadrature} exceeds the one sign bit per dimension",
                    self.code_rate
                ),
            ));
        }
        Ok(())
    }
}

/// Net data rate per optical carrier in Gb/s:
/// `α (R_S + 1 - m (1 - R_C)) R_Sym N_SC R_Pi`.
///
/// QPSK is the case `m = 1`, `R_S = 0`, which reduces to `α R_C R_Sym N_SC R_Pi`.
pub fn ndr_gbps(
    shaping_rate: f64,
    rates: &RateConfig,
    bits_per_quadrature: u32,
    symbol_rate_gbd: f64,
    subcarriers: usize,
) -> Result<f64> {
    rates.check_feasible(bits_per_quadrature)?;
    if shaping_rate < 0.0 {
        return Err(Error::config("shaping_rate", "must be nonnegative"));
    }
    let per_dimension =
        shaping_rate + 1.0 - f64::from(bits_per_quadrature) * (1.0 - rates.code_rate);
    Ok(rates.alpha * per_dimension * symbol_rate_gbd * subcarriers as f64 * rates.pilot_ratio())
}

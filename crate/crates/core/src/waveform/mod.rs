//! Transmit-side DSP: root-raised-cosine pulse shaping, digital subcarrier
//! multiplexing (DSM) and WDM multiplexing onto one sampled field.

mod dsm;
mod plan;
mod rrc;
mod wdm;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use dsm::{dsm_demux, dsm_mux};
pub use plan::{default_rolloff, ChannelPlan, SubcarrierPlan, AGGREGATE_SYMBOL_RATE_GBD};
pub use rrc::{rrc_impulse_response, rrc_receive, rrc_response, rrc_shape};
pub use wdm::wdm_mux;

/// Complex symbols of both polarizations of one subcarrier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolSymbols {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl PolSymbols {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Error vector magnitude of `self` against `reference` in dB, after the
    /// least-squares complex gain per polarization.
    pub fn evm_db(&self, reference: &PolSymbols) -> f64 {
        let mut err = 0.0;
        let mut sig = 0.0;
        for (r, t) in [(&self.x, &reference.x), (&self.y, &reference.y)] {
            let num: Complex64 = r.iter().zip(t).map(|(a, b)| a * b.conj()).sum();
            let den: f64 = t.iter().map(|b| b.norm_sqr()).sum();
            if den == 0.0 {
                continue;
            }
            let h = num / den;
            err += r.iter().zip(t).map(|(a, b)| (a - h * b).norm_sqr()).sum::<f64>();
            sig += den * h.norm_sqr();
        }
        10.0 * (err / sig).max(1e-300).log10()
    }
}

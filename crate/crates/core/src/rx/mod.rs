//! Receiver DSP and information metrics: channel extraction, dispersion
//! compensation, single-tap equalization, SNR, GMI and NGMI.

mod metrics;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use metrics::{
    gmi_ngmi, snr_db, EntropyBasis, GmiEstimate, MetricsReport, SnrEstimate, MIN_GMI_SYMBOLS,
    SNR_CAP_DB,
};

use crate::error::{Error, Result};
use crate::fft;
use crate::fiber::LinkSpec;
use crate::field::SampledField;
use crate::waveform::{ChannelPlan, PolSymbols};

/// Moves channel `index` to baseband, keeps its grid slot and resamples the
/// window to `sample_rate_ghz`. The result's center is the channel frequency
/// as realized on the bin grid.
pub fn extract_channel(
    field: &SampledField,
    plan: &ChannelPlan,
    index: usize,
    sample_rate_ghz: f64,
) -> Result<SampledField> {
    plan.check_index(index)?;
    let n = field.len();
    let df = field.bin_spacing_ghz();
    let out_len_f = field.duration_ns() * sample_rate_ghz;
    let out_len = out_len_f.round() as usize;
    if (out_len_f - out_len as f64).abs() > 1e-6 || out_len == 0 {
        return Err(Error::config(
            "sample_rate_ghz",
            format!("{} ns window holds {out_len_f} samples, not a whole number", field.duration_ns()),
        ));
    }
    let center = field.bins_for(plan.offset_ghz(index)?);
    let half_slot = (plan.spacing_ghz / 2.0 / df).round() as i64;
    let half_out = out_len as i64 / 2;
    let lo = (-half_slot).max(-half_out);
    let hi = half_slot.min(out_len as i64 - half_out);
    let span = n as i64 / 2;
    if center - half_slot < -span || center + half_slot > n as i64 - span {
        return Err(Error::config(
            "channel",
            format!("channel {index} slot lies outside the simulated band"),
        ));
    }
    let spectra = field.spectra();
    let mut out = [
        vec![Complex64::new(0.0, 0.0); out_len],
        vec![Complex64::new(0.0, 0.0); out_len],
    ];
    for b in lo..hi {
        let src = fft::bin_index(center + b, n);
        let dst = fft::bin_index(b, out_len);
        out[0][dst] = spectra[0][src];
        out[1][dst] = spectra[1][src];
    }
    let center_thz = field.center_thz + center as f64 * df * 1e-3;
    SampledField::from_spectra(out, sample_rate_ghz, center_thz)
}

/// Removes the link's accumulated linear phase at the field's absolute
/// frequencies.
pub fn cdc(field: &SampledField, link: &LinkSpec) -> Result<SampledField> {
    let n = field.len();
    let df_thz = field.bin_spacing_ghz() * 1e-3;
    let [mut sx, mut sy] = field.spectra();
    for k in 0..n {
        let f = field.center_thz + fft::signed_bin(k, n) as f64 * df_thz;
        let r = Complex64::from_polar(1.0, -link.accumulated_phase(f));
        sx[k] *= r;
        sy[k] *= r;
    }
    SampledField::from_spectra([sx, sy], field.sample_rate_ghz, field.center_thz)
}

/// Equalized data symbols of one subcarrier, both polarizations pooled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolPairs {
    pub tx: Vec<Complex64>,
    pub rx: Vec<Complex64>,
}

impl SymbolPairs {
    pub fn len(&self) -> usize {
        self.tx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx.is_empty()
    }
}

/// Per-subcarrier single-tap least-squares gain `h = <y, x> / <x, x>` for each
/// polarization, optional block-wise common-phase removal against the known
/// symbols, then pilots dropped. `pilot_masks[s][j]` marks symbol `j` of
/// subcarrier `s`.
pub fn equalize_and_decide(
    rx: &[PolSymbols],
    tx: &[PolSymbols],
    pilot_masks: &[Vec<bool>],
    phase_block: Option<usize>,
) -> Result<Vec<SymbolPairs>> {
    if rx.len() != tx.len() || rx.len() != pilot_masks.len() {
        return Err(Error::Alignment {
            expected: tx.len(),
            got: rx.len(),
        });
    }
    let mut out = Vec::with_capacity(rx.len());
    for ((r, t), mask) in rx.iter().zip(tx).zip(pilot_masks) {
        let mut pairs = SymbolPairs::default();
        for (y, x) in [(&r.x, &t.x), (&r.y, &t.y)] {
            if y.len() != x.len() || mask.len() != x.len() {
                return Err(Error::Alignment {
                    expected: x.len(),
                    got: y.len(),
                });
            }
            let eq = equalize_pol(y, x, phase_block)?;
            for ((e, s), &pilot) in eq.into_iter().zip(x.iter()).zip(mask) {
                if !pilot {
                    pairs.tx.push(*s);
                    pairs.rx.push(e);
                }
            }
        }
        out.push(pairs);
    }
    Ok(out)
}

fn equalize_pol(y: &[Complex64], x: &[Complex64], phase_block: Option<usize>) -> Result<Vec<Complex64>> {
    let xx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if !(xx > 0.0) {
        return Err(Error::Degenerate("reference symbols have zero energy".into()));
    }
    let yx: Complex64 = y.iter().zip(x).map(|(a, b)| a * b.conj()).sum();
    let h = yx / xx;
    if h.norm() == 0.0 {
        return Err(Error::Degenerate("received symbols uncorrelated with reference".into()));
    }
    let mut eq: Vec<Complex64> = y.iter().map(|v| v / h).collect();
    if let Some(block) = phase_block.filter(|&b| b > 0) {
        for (e, s) in eq.chunks_mut(block).zip(x.chunks(block)) {
            let c: Complex64 = e.iter().zip(s).map(|(a, b)| a * b.conj()).sum();
            if c.norm() > 0.0 {
                let rot = c.conj() / c.norm();
                for v in e.iter_mut() {
                    *v *= rot;
                }
            }
        }
    }
    Ok(eq)
}

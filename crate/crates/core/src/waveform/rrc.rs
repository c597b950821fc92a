use std::f64::consts::PI;

use num_complex::Complex64;

use super::PolSymbols;
use crate::error::{Error, Result};
use crate::fft;
use crate::field::SampledField;

/// Root-raised-cosine amplitude response, 1 in the flat band.
pub fn rrc_response(f_ghz: f64, symbol_rate_gbd: f64, rolloff: f64) -> f64 {
    let f = f_ghz.abs();
    let lo = (1.0 - rolloff) * symbol_rate_gbd / 2.0;
    let hi = (1.0 + rolloff) * symbol_rate_gbd / 2.0;
    if f <= lo {
        1.0
    } else if f > hi {
        0.0
    } else {
        (0.5 * (1.0 + (PI / (rolloff * symbol_rate_gbd) * (f - lo)).cos())).sqrt()
    }
}

/// Window length in samples for `symbols` at `symbol_rate_gbd`, which must be
/// a whole number.
fn window_len(symbols: usize, symbol_rate_gbd: f64, sample_rate_ghz: f64) -> Result<usize> {
    let len = symbols as f64 * sample_rate_ghz / symbol_rate_gbd;
    let rounded = len.round();
    if (len - rounded).abs() > 1e-6 || rounded < 1.0 {
        return Err(Error::config(
            "sample_rate_ghz",
            format!("{symbols} symbols at {symbol_rate_gbd} GBd span {len} samples, not a whole number"),
        ));
    }
    Ok(rounded as usize)
}

fn check_aliasing(symbol_rate_gbd: f64, rolloff: f64, sample_rate_ghz: f64) -> Result<()> {
    if sample_rate_ghz < 2.0 * symbol_rate_gbd * (1.0 + rolloff) * (1.0 - 1e-12) {
        return Err(Error::config(
            "sample_rate_ghz",
            format!(
                "{sample_rate_ghz} GHz is below twice the {} GHz RRC bandwidth",
                symbol_rate_gbd * (1.0 + rolloff)
            ),
        ));
    }
    Ok(())
}

/// Unscaled periodic RRC waveform; a matched filter sampled at the symbol
/// centers returns `symbols` exactly.
pub(crate) fn shape_unscaled(
    symbols: &[Complex64],
    symbol_rate_gbd: f64,
    rolloff: f64,
    len: usize,
    sample_rate_ghz: f64,
) -> Vec<Complex64> {
    let ns = symbols.len();
    let mut s = symbols.to_vec();
    fft::forward(&mut s);
    let df = sample_rate_ghz / len as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let edge = ((1.0 + rolloff) * symbol_rate_gbd / 2.0 / df).ceil() as i64;
    let half = len as i64 / 2;
    for b in (-edge).max(-half)..=edge.min(len as i64 - half - 1) {
        let h = rrc_response(b as f64 * df, symbol_rate_gbd, rolloff);
        if h == 0.0 {
            continue;
        }
        out[fft::bin_index(b, len)] = s[fft::bin_index(b, ns)] * (h / ns as f64);
    }
    fft::inverse(&mut out);
    out
}

/// Periodic RRC-shaped baseband field of one subcarrier with unit average power.
pub fn rrc_shape(
    symbols: &PolSymbols,
    symbol_rate_gbd: f64,
    rolloff: f64,
    sample_rate_ghz: f64,
) -> Result<SampledField> {
    if symbols.x.len() != symbols.y.len() || symbols.is_empty() {
        return Err(Error::config(
            "symbols",
            "polarizations must be nonempty and of equal length",
        ));
    }
    check_aliasing(symbol_rate_gbd, rolloff, sample_rate_ghz)?;
    let len = window_len(symbols.len(), symbol_rate_gbd, sample_rate_ghz)?;
    let x = shape_unscaled(&symbols.x, symbol_rate_gbd, rolloff, len, sample_rate_ghz);
    let y = shape_unscaled(&symbols.y, symbol_rate_gbd, rolloff, len, sample_rate_ghz);
    let mut field = SampledField::new(x, y, sample_rate_ghz, 0.0)?;
    field.set_power_mw(1.0)?;
    Ok(field)
}

/// Matched RRC filter centered `offset_bins` above the field center, sampled
/// at `symbols` symbol instants.
pub fn rrc_receive(
    field: &SampledField,
    offset_bins: i64,
    symbols: usize,
    symbol_rate_gbd: f64,
    rolloff: f64,
) -> Result<PolSymbols> {
    if symbols == 0 {
        return Err(Error::config("symbols", "must be positive"));
    }
    let len = field.len();
    let expected = window_len(symbols, symbol_rate_gbd, field.sample_rate_ghz)?;
    if expected != len {
        return Err(Error::config(
            "symbols",
            format!("{symbols} symbols need a {expected}-sample window, field has {len}"),
        ));
    }
    let df = field.bin_spacing_ghz();
    let spectra = field.spectra();
    let edge = ((1.0 + rolloff) * symbol_rate_gbd / 2.0 / df).ceil() as i64;
    let mut out = [
        vec![Complex64::new(0.0, 0.0); symbols],
        vec![Complex64::new(0.0, 0.0); symbols],
    ];
    for b in -edge..=edge {
        let h = rrc_response(b as f64 * df, symbol_rate_gbd, rolloff);
        if h == 0.0 {
            continue;
        }
        let src = fft::bin_index(b + offset_bins, len);
        let dst = fft::bin_index(b, symbols);
        for p in 0..2 {
            out[p][dst] += spectra[p][src] * h;
        }
    }
    let [mut x, mut y] = out;
    fft::inverse(&mut x);
    fft::inverse(&mut y);
    Ok(PolSymbols { x, y })
}

/// Unit-energy RRC impulse response sampled at `sample_rate_ghz` on a
/// `len`-sample periodic window, peak at index 0.
pub fn rrc_impulse_response(
    symbol_rate_gbd: f64,
    rolloff: f64,
    sample_rate_ghz: f64,
    len: usize,
) -> Result<Vec<f64>> {
    check_aliasing(symbol_rate_gbd, rolloff, sample_rate_ghz)?;
    let df = sample_rate_ghz / len as f64;
    let mut h: Vec<Complex64> = (0..len)
        .map(|k| {
            let f = fft::signed_bin(k, len) as f64 * df;
            Complex64::new(rrc_response(f, symbol_rate_gbd, rolloff), 0.0)
        })
        .collect();
    fft::inverse(&mut h);
    let energy: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    Ok(h.iter().map(|c| c.re / energy.sqrt()).collect())
}

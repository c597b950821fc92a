//! Dual-polarization sampled optical field on a periodic time window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Two polarizations sampled at `sample_rate_ghz`, centered at `center_thz`.
///
/// The window is periodic: spectra are Fourier-series coefficients and
/// frequency shifts are whole-bin rotations. Power is in mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate_ghz: f64,
    pub center_thz: f64,
}

impl SampledField {
    pub fn new(
        x: Vec<Complex64>,
        y: Vec<Complex64>,
        sample_rate_ghz: f64,
        center_thz: f64,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::config(
                "field",
                format!("polarization lengths differ ({} vs {})", x.len(), y.len()),
            ));
        }
        if !(sample_rate_ghz > 0.0) {
            return Err(Error::config("field.sample_rate_ghz", "must be positive"));
        }
        Ok(Self {
            x,
            y,
            sample_rate_ghz,
            center_thz,
        })
    }

    pub fn zeros(len: usize, sample_rate_ghz: f64, center_thz: f64) -> Self {
        Self {
            x: vec![Complex64::new(0.0, 0.0); len],
            y: vec![Complex64::new(0.0, 0.0); len],
            sample_rate_ghz,
            center_thz,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn duration_ns(&self) -> f64 {
        self.len() as f64 / self.sample_rate_ghz
    }

    /// Frequency resolution of the periodic window.
    pub fn bin_spacing_ghz(&self) -> f64 {
        self.sample_rate_ghz / self.len() as f64
    }

    /// `mean(|X|² + |Y|²)` in mW.
    pub fn power_mw(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let s: f64 = self
            .x
            .iter()
            .chain(&self.y)
            .map(|c| c.norm_sqr())
            .sum();
        s / self.len() as f64
    }

    pub fn power_dbm(&self) -> f64 {
        10.0 * self.power_mw().log10()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.x.iter_mut().chain(self.y.iter_mut()) {
            *c *= factor;
        }
    }

    pub fn set_power_mw(&mut self, power_mw: f64) -> Result<()> {
        let p = self.power_mw();
        if !(p > 0.0) {
            return Err(Error::Degenerate("cannot rescale a zero-power field".into()));
        }
        self.scale((power_mw / p).sqrt());
        Ok(())
    }

    pub fn add(&mut self, other: &SampledField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += b;
        }
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += b;
        }
        Ok(())
    }

    fn check_compatible(&self, other: &SampledField) -> Result<()> {
        if self.len() != other.len() || (self.sample_rate_ghz - other.sample_rate_ghz).abs() > 1e-9 {
            return Err(Error::config(
                "field",
                format!(
                    "incompatible grids: {} samples at {} GHz vs {} samples at {} GHz",
                    self.len(),
                    self.sample_rate_ghz,
                    other.len(),
                    other.sample_rate_ghz
                ),
            ));
        }
        Ok(())
    }

    /// Fourier-series coefficients of both polarizations; `Σ|c|² = power`.
    pub fn spectra(&self) -> [Vec<Complex64>; 2] {
        let n = self.len() as f64;
        let mut sx = self.x.clone();
        let mut sy = self.y.clone();
        fft::forward(&mut sx);
        fft::forward(&mut sy);
        for c in sx.iter_mut().chain(sy.iter_mut()) {
            *c /= n;
        }
        [sx, sy]
    }

    /// Inverse of [`SampledField::spectra`].
    pub fn from_spectra(
        spectra: [Vec<Complex64>; 2],
        sample_rate_ghz: f64,
        center_thz: f64,
    ) -> Result<Self> {
        let [mut x, mut y] = spectra;
        fft::inverse(&mut x);
        fft::inverse(&mut y);
        Self::new(x, y, sample_rate_ghz, center_thz)
    }

    /// Nearest whole-bin count for a frequency offset.
    pub fn bins_for(&self, offset_ghz: f64) -> i64 {
        (offset_ghz / self.bin_spacing_ghz()).round() as i64
    }

    /// Frequency of signed bin `b` relative to the center, in GHz.
    pub fn bin_frequency_ghz(&self, b: i64) -> f64 {
        b as f64 * self.bin_spacing_ghz()
    }

    /// Rotates the spectrum up by `bins` whole bins.
    pub fn shift_bins(&mut self, bins: i64) {
        let n = self.len();
        if n == 0 {
            return;
        }
        let step = bins.rem_euclid(n as i64) as u128;
        let tau = std::f64::consts::TAU;
        for (i, (a, b)) in self.x.iter_mut().zip(self.y.iter_mut()).enumerate() {
            let m = (step * i as u128 % n as u128) as f64;
            let r = Complex64::from_polar(1.0, tau * m / n as f64);
            *a *= r;
            *b *= r;
        }
    }

    /// Same duration on a grid of `len` samples; the sample rate scales with it.
    ///
    /// Spectral content beyond the new Nyquist band is discarded.
    pub fn resample(&self, len: usize) -> Result<SampledField> {
        if len == 0 {
            return Err(Error::config("field", "cannot resample to zero samples"));
        }
        let old = self.len();
        let [sx, sy] = self.spectra();
        let mut out = [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]];
        let keep = old.min(len);
        let lo = -(keep as i64 / 2);
        let hi = lo + keep as i64;
        for b in lo..hi {
            let src = fft::bin_index(b, old);
            let dst = fft::bin_index(b, len);
            out[0][dst] = sx[src];
            out[1][dst] = sy[src];
        }
        let fs = self.sample_rate_ghz * len as f64 / old as f64;
        SampledField::from_spectra(out, fs, self.center_thz)
    }

    /// Power spectral density in dB(mW/GHz), averaged over `resolution`
    /// adjacent bins, ordered by frequency.
    pub fn psd_db(&self, resolution: usize) -> Vec<(f64, f64)> {
        let n = self.len();
        let res = resolution.max(1);
        let [sx, sy] = self.spectra();
        let df = self.bin_spacing_ghz();
        let lo = -(n as i64 / 2);
        let mut rows = Vec::with_capacity(n / res + 1);
        let mut b = lo;
        while b < lo + n as i64 {
            let end = (b + res as i64).min(lo + n as i64);
            let mut p = 0.0;
            for k in b..end {
                let i = fft::bin_index(k, n);
                p += sx[i].norm_sqr() + sy[i].norm_sqr();
            }
            let width = (end - b) as f64;
            let f = (b as f64 + (width - 1.0) / 2.0) * df;
            rows.push((f, 10.0 * (p / (width * df)).max(1e-300).log10()));
            b = end;
        }
        rows
    }

    /// PSD rows as `frequency_GHz,dB` CSV.
    pub fn psd_csv(&self, resolution: usize) -> String {
        let mut s = String::from("frequency_GHz,dB\n");
        for (f, db) in self.psd_db(resolution) {
            s.push_str(&format!("{f:.6},{db:.6}\n"));
        }
        s
    }
}

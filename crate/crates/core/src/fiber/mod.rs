//! Dispersion-managed fiber link: span table, dispersion map and split-step
//! propagation with lumped amplification, ASE noise and per-loop gain
//! equalization.

mod dispersion;
mod propagate;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use dispersion::{dispersion_map, DispersionMap};
pub use propagate::{propagate, propagate_wdm, PropagationStats};

use crate::error::{Error, Result};

/// Speed of light in nm/ps.
pub const SPEED_OF_LIGHT_NM_PS: f64 = 299_792.458;
/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reference wavelength of the span dispersion data.
pub const REFERENCE_WAVELENGTH_NM: f64 = 1550.13;

pub fn wavelength_nm(frequency_thz: f64) -> f64 {
    SPEED_OF_LIGHT_NM_PS / frequency_thz
}

/// One fiber span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanSpec {
    pub name: String,
    pub length_km: f64,
    /// ps/(nm·km) at `reference_wavelength_nm`.
    pub dispersion_ps_nm_km: f64,
    /// ps/(nm²·km).
    pub slope_ps_nm2_km: f64,
    pub reference_wavelength_nm: f64,
    pub attenuation_db_km: f64,
    /// 1/(W·km).
    pub gamma_per_w_km: f64,
}

impl SpanSpec {
    /// Standard single-mode fiber, 40.3 km.
    pub fn ssmf() -> Self {
        Self {
            name: "SSMF".into(),
            length_km: 40.3,
            dispersion_ps_nm_km: 17.24,
            slope_ps_nm2_km: 0.092,
            reference_wavelength_nm: REFERENCE_WAVELENGTH_NM,
            attenuation_db_km: 0.20,
            gamma_per_w_km: 1.3,
        }
    }

    /// Negative-dispersion fiber, 40.3 km.
    pub fn ndf() -> Self {
        Self {
            name: "NDF".into(),
            length_km: 40.3,
            dispersion_ps_nm_km: -2.47,
            slope_ps_nm2_km: -0.1026,
            reference_wavelength_nm: REFERENCE_WAVELENGTH_NM,
            attenuation_db_km: 0.22,
            gamma_per_w_km: 1.7,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let checks = [
            (self.length_km > 0.0, "length_km", "must be positive"),
            (self.attenuation_db_km >= 0.0, "attenuation_db_km", "must be nonnegative"),
            (self.gamma_per_w_km >= 0.0, "gamma_per_w_km", "must be nonnegative"),
            (self.reference_wavelength_nm > 0.0, "reference_wavelength_nm", "must be positive"),
            (
                self.dispersion_ps_nm_km.is_finite() && self.slope_ps_nm2_km.is_finite(),
                "dispersion_ps_nm_km",
                "must be finite",
            ),
        ];
        for (ok, field, reason) in checks {
            if !ok {
                return Err(Error::config(format!("{path}.{field}"), reason));
            }
        }
        Ok(())
    }

    /// `D(λ) = D + S (λ - λ_ref)`.
    pub fn dispersion_at(&self, wavelength_nm: f64) -> f64 {
        self.dispersion_ps_nm_km + self.slope_ps_nm2_km * (wavelength_nm - self.reference_wavelength_nm)
    }

    /// β2 at the reference wavelength, ps²/km.
    pub fn beta2(&self) -> f64 {
        let l = self.reference_wavelength_nm;
        -self.dispersion_ps_nm_km * l * l / (2.0 * PI * SPEED_OF_LIGHT_NM_PS)
    }

    /// β3 at the reference wavelength, ps³/km.
    pub fn beta3(&self) -> f64 {
        let l = self.reference_wavelength_nm;
        let a = l / (2.0 * PI * SPEED_OF_LIGHT_NM_PS);
        a * a * (l * l * self.slope_ps_nm2_km + 2.0 * l * self.dispersion_ps_nm_km)
    }

    pub fn reference_frequency_thz(&self) -> f64 {
        SPEED_OF_LIGHT_NM_PS / self.reference_wavelength_nm
    }

    /// Linear spectral phase per km at absolute frequency `frequency_thz`,
    /// `-(β2 Ω²/2 + β3 Ω³/6)` with `Ω = 2π (f - f_ref)`.
    pub fn phase_per_km(&self, frequency_thz: f64) -> f64 {
        let w = 2.0 * PI * (frequency_thz - self.reference_frequency_thz());
        -(self.beta2() / 2.0 * w * w + self.beta3() / 6.0 * w * w * w)
    }

    /// Power loss coefficient in 1/km.
    pub fn loss_per_km(&self) -> f64 {
        self.attenuation_db_km * std::f64::consts::LN_10 / 10.0
    }

    pub fn loss_db(&self) -> f64 {
        self.attenuation_db_km * self.length_km
    }

    /// Same fiber expanded around `center_thz`, with dispersion multiplied by
    /// `dispersion_factor` and slope by `slope_factor`.
    pub fn rescaled(&self, center_thz: f64, dispersion_factor: f64, slope_factor: f64) -> Self {
        let l = wavelength_nm(center_thz);
        Self {
            dispersion_ps_nm_km: dispersion_factor * self.dispersion_at(l),
            slope_ps_nm2_km: slope_factor * self.slope_ps_nm2_km,
            reference_wavelength_nm: l,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSpec {
    pub noise_figure_db: f64,
    /// Adds ASE when set; gain is applied either way.
    pub ase: bool,
}

impl Default for AmplifierSpec {
    fn default() -> Self {
        Self {
            noise_figure_db: 5.0,
            ase: true,
        }
    }
}

impl AmplifierSpec {
    /// One-sided ASE density per polarization in mW/GHz for power gain `gain`
    /// at `frequency_thz`: `hν (NF·G - 1) / 2`.
    pub fn ase_psd_mw_per_ghz(&self, gain: f64, frequency_thz: f64) -> f64 {
        if !self.ase {
            return 0.0;
        }
        let nf = 10f64.powf(self.noise_figure_db / 10.0);
        let h_nu = PLANCK * frequency_thz * 1e12;
        (h_nu * (nf * gain - 1.0) / 2.0).max(0.0) * 1e12
    }
}

/// Gain equalization applied at the end of every loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgePolicy {
    /// Every channel slot restored to its launch power.
    Ideal,
    /// Only a flat gain and a linear dB tilt across the band are corrected.
    GainTiltOnly,
    Off,
}

/// Split-step size control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub max_step_km: f64,
    /// Bound on `(8/9) γ P h` at the span input power.
    pub max_nonlinear_phase_rad: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            max_step_km: 0.1,
            max_nonlinear_phase_rad: 0.005,
        }
    }
}

/// One recirculating loop of spans, traversed `loops` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub spans: Vec<SpanSpec>,
    pub loops: usize,
    pub amplifier: AmplifierSpec,
    pub dge: DgePolicy,
    pub step: StepControl,
}

impl LinkSpec {
    /// Seven 40.3 km spans with SSMF as span 4, ten loops.
    pub fn paper_scale() -> Self {
        let mut spans = vec![SpanSpec::ndf(); 7];
        spans[3] = SpanSpec::ssmf();
        Self {
            spans,
            loops: 10,
            amplifier: AmplifierSpec::default(),
            dge: DgePolicy::Ideal,
            step: StepControl::default(),
        }
    }

    /// The loop of [`LinkSpec::paper_scale`] for 4x slower symbols on a 4x
    /// denser grid: dispersion scaled by 16 so accumulated dispersion is
    /// unchanged in symbol units, slope scaled by 512 so channels 25 GHz apart
    /// see the dispersion of channels 800 GHz apart. Ten loops, so accumulated
    /// dispersion also matches in symbol units.
    pub fn mini_link(center_thz: f64) -> Self {
        let full = Self::paper_scale();
        Self {
            spans: full
                .spans
                .iter()
                .map(|s| s.rescaled(center_thz, 16.0, 512.0))
                .collect(),
            step: StepControl {
                max_step_km: 0.5,
                max_nonlinear_phase_rad: 0.005,
            },
            ..full
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spans.is_empty() {
            return Err(Error::config("link.spans", "at least one span required"));
        }
        if self.loops == 0 {
            return Err(Error::config("link.loops", "must be positive"));
        }
        for (i, s) in self.spans.iter().enumerate() {
            s.validate(&format!("link.spans[{i}]"))?;
        }
        if !(self.step.max_step_km > 0.0) {
            return Err(Error::config("link.step.max_step_km", "must be positive"));
        }
        if !(self.step.max_nonlinear_phase_rad > 0.0) {
            return Err(Error::config("link.step.max_nonlinear_phase_rad", "must be positive"));
        }
        if !self.amplifier.noise_figure_db.is_finite() {
            return Err(Error::config("link.amplifier.noise_figure_db", "must be finite"));
        }
        Ok(())
    }

    pub fn loop_length_km(&self) -> f64 {
        self.spans.iter().map(|s| s.length_km).sum()
    }

    pub fn total_length_km(&self) -> f64 {
        self.loop_length_km() * self.loops as f64
    }

    /// Accumulated linear spectral phase of the whole link at `frequency_thz`.
    pub fn accumulated_phase(&self, frequency_thz: f64) -> f64 {
        let per_loop: f64 = self
            .spans
            .iter()
            .map(|s| s.phase_per_km(frequency_thz) * s.length_km)
            .sum();
        per_loop * self.loops as f64
    }

    pub fn amplifier_count(&self) -> usize {
        self.spans.len() * self.loops
    }
}

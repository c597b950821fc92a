use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DgePolicy, LinkSpec, SpanSpec};
use crate::error::{Error, Result};
use crate::fft;
use crate::field::SampledField;
use crate::seed::derive_seed;
use crate::waveform::ChannelPlan;

/// Bookkeeping of one propagation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationStats {
    pub steps: usize,
    /// Largest per-slot deviation from the launch profile seen before each
    /// loop's equalizer, dB.
    pub max_excursion_db: f64,
    /// Field power after every loop, mW.
    pub loop_power_mw: Vec<f64>,
}

/// Propagates through the link, equalizing the whole band as one slot.
pub fn propagate(field: &SampledField, link: &LinkSpec, seed: u64) -> Result<SampledField> {
    let slots = vec![whole_band(field.len())];
    run(field, link, &slots, seed).map(|(f, _)| f)
}

/// Propagates a WDM field, equalizing each channel slot of `plan`.
pub fn propagate_wdm(
    field: &SampledField,
    link: &LinkSpec,
    plan: &ChannelPlan,
    seed: u64,
) -> Result<(SampledField, PropagationStats)> {
    plan.validate()?;
    let df = field.bin_spacing_ghz();
    let half = field.len() as i64 / 2;
    let slots = (1..=plan.count)
        .map(|i| {
            let off = plan.offset_ghz(i)?;
            let lo = ((off - plan.spacing_ghz / 2.0) / df).round() as i64;
            let hi = ((off + plan.spacing_ghz / 2.0) / df).round() as i64;
            Ok((lo.max(-half), hi.min(field.len() as i64 - half)))
        })
        .collect::<Result<Vec<_>>>()?;
    run(field, link, &slots, seed)
}

fn whole_band(len: usize) -> (i64, i64) {
    let half = len as i64 / 2;
    (-half, len as i64 - half)
}

fn slot_powers(spectra: &[Vec<Complex64>; 2], slots: &[(i64, i64)]) -> Vec<f64> {
    let n = spectra[0].len();
    slots
        .iter()
        .map(|&(lo, hi)| {
            (lo..hi)
                .map(|b| {
                    let i = fft::bin_index(b, n);
                    spectra[0][i].norm_sqr() + spectra[1][i].norm_sqr()
                })
                .sum()
        })
        .collect()
}

fn run(
    input: &SampledField,
    link: &LinkSpec,
    slots: &[(i64, i64)],
    seed: u64,
) -> Result<(SampledField, PropagationStats)> {
    link.validate()?;
    if input.is_empty() {
        return Err(Error::config("field", "empty field"));
    }
    let mut field = input.clone();
    let n = field.len();
    let launch_power = field.power_mw();
    let launch_profile = slot_powers(&field.spectra(), slots);
    let mut stats = PropagationStats::default();
    for lp in 0..link.loops {
        for (si, span) in link.spans.iter().enumerate() {
            stats.steps += ssfm_span(&mut field, span, link)?;
            let gain = (span.loss_per_km() * span.length_km).exp();
            field.scale(gain.sqrt());
            let psd = link.amplifier.ase_psd_mw_per_ghz(gain, field.center_thz);
            if psd > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[lp as u64, si as u64]));
                let sigma = (psd * field.sample_rate_ghz / 2.0).sqrt();
                for c in field.x.iter_mut().chain(field.y.iter_mut()) {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *c += Complex64::new(re, im) * sigma;
                }
            }
            let p = field.power_mw();
            let blown = launch_power > 0.0 && p > 1e6 * launch_power;
            if !p.is_finite() || blown {
                return Err(Error::Integration {
                    loop_index: lp,
                    span: si,
                    reason: format!(
                        "field power {p} mW after span; reduce link.step.max_step_km or link.step.max_nonlinear_phase_rad"
                    ),
                });
            }
        }
        let excursion = equalize(&mut field, link.dge, slots, &launch_profile)?;
        stats.max_excursion_db = stats.max_excursion_db.max(excursion);
        stats.loop_power_mw.push(field.power_mw());
    }
    debug_assert_eq!(field.len(), n);
    Ok((field, stats))
}

/// Applies the loop-end equalizer and returns the pre-equalization excursion.
fn equalize(
    field: &mut SampledField,
    policy: DgePolicy,
    slots: &[(i64, i64)],
    target: &[f64],
) -> Result<f64> {
    let mut spectra = field.spectra();
    let current = slot_powers(&spectra, slots);
    let errors_db: Vec<Option<f64>> = current
        .iter()
        .zip(target)
        .map(|(&c, &t)| (c > 0.0 && t > 0.0).then(|| 10.0 * (t / c).log10()))
        .collect();
    let excursion = errors_db.iter().flatten().fold(0.0f64, |m, e| m.max(e.abs()));
    let n = field.len();
    match policy {
        DgePolicy::Off => return Ok(excursion),
        DgePolicy::Ideal => {
            for (&(lo, hi), e) in slots.iter().zip(&errors_db) {
                let Some(e) = e else { continue };
                let g = 10f64.powf(e / 20.0);
                for b in lo..hi {
                    let i = fft::bin_index(b, n);
                    spectra[0][i] *= g;
                    spectra[1][i] *= g;
                }
            }
        }
        DgePolicy::GainTiltOnly => {
            let pts: Vec<(f64, f64)> = slots
                .iter()
                .zip(&errors_db)
                .filter_map(|(&(lo, hi), e)| e.map(|e| ((lo + hi) as f64 / 2.0, e)))
                .collect();
            if pts.is_empty() {
                return Ok(excursion);
            }
            let m = pts.len() as f64;
            let fx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let fy = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxx: f64 = pts.iter().map(|p| (p.0 - fx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - fx) * (p.1 - fy)).sum();
            let tilt = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            for k in 0..n {
                let b = fft::signed_bin(k, n) as f64;
                let g = 10f64.powf((fy + tilt * (b - fx)) / 20.0);
                spectra[0][k] *= g;
                spectra[1][k] *= g;
            }
        }
    }
    *field = SampledField::from_spectra(spectra, field.sample_rate_ghz, field.center_thz)?;
    Ok(excursion)
}

/// Symmetric split-step integration of one span; returns the step count.
fn ssfm_span(field: &mut SampledField, span: &SpanSpec, link: &LinkSpec) -> Result<usize> {
    let n = field.len();
    let gamma = span.gamma_per_w_km * 1e-3 * 8.0 / 9.0;
    let p_in = field.power_mw();
    let mut h = link.step.max_step_km;
    if gamma > 0.0 && p_in > 0.0 {
        h = h.min(link.step.max_nonlinear_phase_rad / (gamma * p_in));
    }
    let steps = (span.length_km / h).ceil().max(1.0) as usize;
    let h = span.length_km / steps as f64;

    let df_thz = field.bin_spacing_ghz() * 1e-3;
    let alpha = span.loss_per_km();
    let inv_n = 1.0 / n as f64;
    let half: Vec<Complex64> = (0..n)
        .map(|k| {
            let f = field.center_thz + fft::signed_bin(k, n) as f64 * df_thz;
            Complex64::from_polar((-alpha * h / 4.0).exp() * inv_n, span.phase_per_km(f) * h / 2.0)
        })
        .collect();
    let full: Vec<Complex64> = half.iter().map(|c| c * c * n as f64).collect();

    let (x, y) = (&mut field.x, &mut field.y);
    fft::forward(x);
    fft::forward(y);
    apply(x, y, &half);
    for s in 0..steps {
        fft::inverse(x);
        fft::inverse(y);
        if gamma > 0.0 {
            for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                let phi = -gamma * (a.norm_sqr() + b.norm_sqr()) * h;
                let r = Complex64::from_polar(1.0, phi);
                *a *= r;
                *b *= r;
            }
        }
        fft::forward(x);
        fft::forward(y);
        apply(x, y, if s + 1 == steps { &half } else { &full });
    }
    fft::inverse(x);
    fft::inverse(y);
    Ok(steps)
}

fn apply(x: &mut [Complex64], y: &mut [Complex64], op: &[Complex64]) {
    for ((a, b), o) in x.iter_mut().zip(y.iter_mut()).zip(op) {
        *a *= o;
        *b *= o;
    }
}

//! End-to-end WDM runs: framing, pulse shaping, multiplexing, propagation and
//! per-channel reception.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{propagate_wdm, LinkSpec, PropagationStats};
use crate::field::SampledField;
use crate::pas::{frame_random, FrameLedger, Modulation, RateConfig, DIMENSIONS};
use crate::rx::{self, cdc, equalize_and_decide, extract_channel, EntropyBasis, MetricsReport};
use crate::seed::derive_seed;
use crate::shaping::{AmplitudeAlphabet, ShapingCodec};
use crate::waveform::{
    dsm_demux, dsm_mux, rrc_shape, wdm_mux, ChannelPlan, PolSymbols, SubcarrierPlan,
};

/// Numerical settings shared by every job of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// `N_SC · R_Sym`, GBd.
    pub aggregate_rate_gbd: f64,
    /// PDM symbols per channel across all subcarriers; a multiple of 8.
    pub symbols_per_channel: usize,
    /// Channel processing rate in units of the aggregate rate.
    pub channel_oversampling: usize,
    /// WDM field rate in units of the aggregate rate.
    pub wdm_oversampling: usize,
    /// Common-phase block length; `None` disables phase removal.
    pub phase_block: Option<usize>,
    pub entropy: EntropyBasis,
    /// Alphabet of shaped formats.
    pub alphabet: AmplitudeAlphabet,
    pub rates: RateConfig,
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.aggregate_rate_gbd > 0.0) {
            return Err(Error::config("sim.aggregate_rate_gbd", "must be positive"));
        }
        if self.symbols_per_channel == 0 || !self.symbols_per_channel.is_multiple_of(8) {
            return Err(Error::config(
                "sim.symbols_per_channel",
                format!("{} is not a positive multiple of 8", self.symbols_per_channel),
            ));
        }
        if self.channel_oversampling < 3 {
            return Err(Error::config(
                "sim.channel_oversampling",
                "must be at least 3 to hold one subcarrier with roll-off",
            ));
        }
        if self.wdm_oversampling < self.channel_oversampling {
            return Err(Error::config(
                "sim.wdm_oversampling",
                "must not be below channel_oversampling",
            ));
        }
        self.rates.check_feasible(self.alphabet.bits_per_quadrature())
    }

    pub fn channel_rate_ghz(&self) -> f64 {
        self.channel_oversampling as f64 * self.aggregate_rate_gbd
    }

    pub fn wdm_rate_ghz(&self) -> f64 {
        self.wdm_oversampling as f64 * self.aggregate_rate_gbd
    }
}

/// Fiber link, or a noise-loaded back-to-back connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Transmission {
    Link,
    /// White Gaussian noise at `snr_db` relative to each channel's power in
    /// its aggregate symbol-rate bandwidth.
    BackToBack { snr_db: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "channels")]
    pub plan: ChannelPlan,
    pub link: LinkSpec,
    /// Total launch power of all channels, dBm.
    pub power_dbm: f64,
    #[serde(rename = "sim")]
    pub settings: SimSettings,
    pub transmission: Transmission,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.link.validate()?;
        self.settings.validate()?;
        if !self.power_dbm.is_finite() {
            return Err(Error::config("power_dbm", "must be finite"));
        }
        let reach = self.plan.offset_ghz(self.plan.count)? + self.plan.spacing_ghz / 2.0;
        if reach > self.settings.wdm_rate_ghz() / 2.0 {
            return Err(Error::config(
                "sim.wdm_oversampling",
                format!(
                    "{} GHz sampling does not cover the {} GHz band",
                    self.settings.wdm_rate_ghz(),
                    2.0 * reach
                ),
            ));
        }
        if self.plan.spacing_ghz > self.settings.channel_rate_ghz() {
            return Err(Error::config(
                "sim.channel_oversampling",
                format!(
                    "{} GHz channel processing rate is narrower than the {} GHz slot",
                    self.settings.channel_rate_ghz(),
                    self.plan.spacing_ghz
                ),
            ));
        }
        Ok(())
    }
}

/// One transmitted configuration, applied to every channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Job {
    pub n: usize,
    pub subcarriers: usize,
    pub modulation: Modulation,
}

/// Result of one WDM run.
#[derive(Debug, Clone)]
pub struct WdmRun {
    pub reports: Vec<MetricsReport>,
    pub stats: Option<PropagationStats>,
    /// Transmitted blocks of each channel, in channel order.
    pub ledgers: Vec<FrameLedger>,
    pub launch: SampledField,
    pub received: SampledField,
}

struct ChannelTx {
    field: SampledField,
    symbols: Vec<PolSymbols>,
    pilots: Vec<Vec<bool>>,
    ledger: FrameLedger,
}

fn synthesize(
    codec: &ShapingCodec,
    sc: &SubcarrierPlan,
    settings: &SimSettings,
    seed: u64,
) -> Result<ChannelTx> {
    let frame = frame_random(codec, settings.symbols_per_channel, &settings.rates, seed)?;
    let per = settings.symbols_per_channel / sc.subcarriers;
    let mut symbols = Vec::with_capacity(sc.subcarriers);
    let mut pilots = Vec::with_capacity(sc.subcarriers);
    let mut fields = Vec::with_capacity(sc.subcarriers);
    for s in 0..sc.subcarriers {
        let range = s * per..(s + 1) * per;
        let chunk = &frame.symbols[range.clone()];
        let pol = PolSymbols {
            x: chunk.iter().map(|d| Complex64::new(d[0], d[1])).collect(),
            y: chunk.iter().map(|d| Complex64::new(d[2], d[3])).collect(),
        };
        let mut f = rrc_shape(&pol, sc.symbol_rate_gbd, sc.rolloff, settings.channel_rate_ghz())?;
        f.scale((1.0 / sc.subcarriers as f64).sqrt());
        fields.push(f);
        symbols.push(pol);
        pilots.push(frame.pilot_mask[range].to_vec());
    }
    debug_assert_eq!(DIMENSIONS, 4);
    Ok(ChannelTx {
        field: dsm_mux(&fields, sc)?,
        symbols,
        pilots,
        ledger: frame.ledger,
    })
}

fn add_white_noise(field: &mut SampledField, per_pol_psd_mw_ghz: f64, seed: u64) {
    let sigma = (per_pol_psd_mw_ghz * field.sample_rate_ghz / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in field.x.iter_mut().chain(field.y.iter_mut()) {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *c += Complex64::new(re, im) * sigma;
    }
}

/// Transmits `job` on every channel of the scenario and measures each one.
///
/// Channel `i` draws its data from `derive_seed(seed, [i])`; link noise uses
/// an independent stream.
pub fn simulate(scenario: &Scenario, job: &Job, seed: u64) -> Result<WdmRun> {
    scenario.validate()?;
    let st = &scenario.settings;
    let codec = job.modulation.codec(job.n, &st.alphabet)?;
    let sc = SubcarrierPlan::new(job.subcarriers, st.aggregate_rate_gbd)?;
    let txs: Vec<ChannelTx> = (1..=scenario.plan.count)
        .into_par_iter()
        .map(|i| synthesize(&codec, &sc, st, derive_seed(seed, &[i as u64])))
        .collect::<Result<_>>()?;
    let fields: Vec<SampledField> = txs.iter().map(|t| t.field.clone()).collect();
    let launch = wdm_mux(&fields, &scenario.plan, scenario.power_dbm, st.wdm_rate_ghz())?;
    drop(fields);

    let noise_seed = derive_seed(seed, &[u64::MAX]);
    let (received, stats) = match scenario.transmission {
        Transmission::Link => {
            let (f, s) = propagate_wdm(&launch, &scenario.link, &scenario.plan, noise_seed)?;
            (f, Some(s))
        }
        Transmission::BackToBack { snr_db } => {
            let p_ch = 10f64.powf(scenario.plan.per_channel_power_dbm(scenario.power_dbm) / 10.0);
            let n0 = p_ch / (10f64.powf(snr_db / 10.0) * st.aggregate_rate_gbd);
            let mut f = launch.clone();
            add_white_noise(&mut f, n0 / 2.0, noise_seed);
            (f, None)
        }
    };

    let prior = codec.amplitude_distribution();
    let tx_alphabet = job.modulation.alphabet(&st.alphabet);
    let amplitude_bits = st.entropy.amplitude_bits(&codec);
    let per = st.symbols_per_channel / sc.subcarriers;
    let reports = txs
        .par_iter()
        .enumerate()
        .map(|(i, tx)| {
            let index = i + 1;
            let mut ch = extract_channel(&received, &scenario.plan, index, st.channel_rate_ghz())?;
            if scenario.transmission == Transmission::Link {
                ch = cdc(&ch, &scenario.link)?;
            }
            let rx_symbols = dsm_demux(&ch, &sc, per)?;
            let pairs = equalize_and_decide(&rx_symbols, &tx.symbols, &tx.pilots, st.phase_block)?;
            let snr = rx::snr_db(&pairs);
            let gmi = rx::gmi_ngmi(&pairs, &snr.noise_variance, &tx_alphabet, &prior, amplitude_bits)
                .map_err(|e| Error::Simulation {
                    context: format!("channel {index}"),
                    source: Box::new(e),
                })?;
            let mut warnings = snr.warnings.clone();
            warnings.extend(gmi.warnings.iter().cloned());
            Ok(MetricsReport {
                channel: index,
                frequency_thz: scenario.plan.frequency_thz(index)?,
                n: job.n,
                subcarriers: job.subcarriers,
                symbol_rate_gbd: sc.symbol_rate_gbd,
                modulation: job.modulation,
                power_dbm: scenario.power_dbm,
                seed,
                snr_db: snr.mean_db,
                snr_db_per_subcarrier: snr.per_subcarrier_db,
                snr_capped: snr.capped,
                gmi_bits: gmi.gmi_bits,
                ngmi: gmi.ngmi,
                entropy_bits: gmi.entropy_bits,
                bit_levels: gmi.bit_levels,
                noise_variance: snr.noise_variance,
                data_symbols: snr.data_symbols,
                warnings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WdmRun {
        reports,
        stats,
        ledgers: txs.into_iter().map(|t| t.ledger).collect(),
        launch,
        received,
    })
}

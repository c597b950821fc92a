//! Run configuration: presets, validation and the provenance hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fiber::LinkSpec;
use crate::optimizer::{Benchmark, RateSearchStrategy, SearchGrid};
use crate::pas::RateConfig;
use crate::rx::EntropyBasis;
use crate::shaping::AmplitudeAlphabet;
use crate::sim::{Scenario, SimSettings, Transmission};
use crate::waveform::{ChannelPlan, AGGREGATE_SYMBOL_RATE_GBD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Five channels at a quarter of the full symbol rate; runs in seconds.
    MiniLink,
    /// The full 37-channel system. Too large to simulate on a desktop; used
    /// for dry runs and link-level commands.
    PaperScale,
    Custom,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mini-link" => Ok(Preset::MiniLink),
            "paper-scale" => Ok(Preset::PaperScale),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; expected mini-link, paper-scale or custom"),
            )),
        }
    }
}

/// Everything that determines the numbers a command produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Preset,
    #[serde(flatten)]
    pub scenario: Scenario,
    pub grid: SearchGrid,
    pub benchmark: Benchmark,
    pub strategy: RateSearchStrategy,
    /// Base seed; repeat `r` runs with `seed + r`.
    pub seed: u64,
    pub repeats: usize,
}

/// Per-channel launch power of the full system at 13 dBm total.
const PAPER_TOTAL_DBM: f64 = 13.0;

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::MiniLink => Self::mini_link(),
            Preset::PaperScale => Self::paper_scale(),
            Preset::Custom => Self {
                preset: Preset::Custom,
                ..Self::mini_link()
            },
        }
    }

    /// 37 channels, 7 x 40.3 km, 10 loops, R_C = 0.8, one pilot in 48,
    /// NGMI threshold 0.861, 13 dBm.
    pub fn paper_scale() -> Self {
        let alphabet = AmplitudeAlphabet::qam16();
        Self {
            preset: Preset::PaperScale,
            scenario: Scenario {
                plan: ChannelPlan::c_band(),
                link: LinkSpec::paper_scale(),
                power_dbm: PAPER_TOTAL_DBM,
                settings: SimSettings {
                    aggregate_rate_gbd: AGGREGATE_SYMBOL_RATE_GBD,
                    symbols_per_channel: 1 << 16,
                    channel_oversampling: 4,
                    wdm_oversampling: 64,
                    phase_block: Some(64),
                    entropy: EntropyBasis::default(),
                    alphabet: alphabet.clone(),
                    rates: RateConfig::default(),
                },
                transmission: Transmission::Link,
            },
            grid: SearchGrid::standard(&alphabet),
            benchmark: Benchmark::default(),
            strategy: RateSearchStrategy::default(),
            seed: 1,
            repeats: 1,
        }
    }

    /// Five channels on a 25 GHz grid at 19.7 GBd over the rescaled loop.
    /// Launch power matches the full system's per-channel power at 12 and
    /// 13 dBm total.
    pub fn mini_link() -> Self {
        let plan = ChannelPlan {
            first_thz: 193.55,
            spacing_ghz: 25.0,
            count: 5,
        };
        let full = ChannelPlan::c_band();
        let to_mini = |p: f64| {
            let per = full.per_channel_power_dbm(p);
            let total = per + 10.0 * (plan.count as f64).log10();
            (total * 100.0).round() / 100.0
        };
        let alphabet = AmplitudeAlphabet::qam16();
        let mut grid = SearchGrid::standard(&alphabet);
        grid.powers_dbm = grid.powers_dbm.iter().map(|&p| to_mini(p)).collect();
        Self {
            preset: Preset::MiniLink,
            scenario: Scenario {
                link: LinkSpec::mini_link(plan.center_thz()),
                power_dbm: to_mini(PAPER_TOTAL_DBM),
                plan,
                settings: SimSettings {
                    aggregate_rate_gbd: AGGREGATE_SYMBOL_RATE_GBD / 4.0,
                    symbols_per_channel: 2560,
                    channel_oversampling: 4,
                    wdm_oversampling: 16,
                    phase_block: Some(64),
                    entropy: EntropyBasis::default(),
                    alphabet,
                    rates: RateConfig::default(),
                },
                transmission: Transmission::Link,
            },
            grid,
            benchmark: Benchmark::default(),
            strategy: RateSearchStrategy::default(),
            seed: 1,
            repeats: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.grid.validate()?;
        if let Some(p) = self.grid.powers_dbm.iter().find(|p| !p.is_finite()) {
            return Err(Error::config("grid.powers_dbm", format!("{p} is not finite")));
        }
        if !matches!(self.benchmark.subcarriers, 1 | 2 | 4 | 8) {
            return Err(Error::config(
                "benchmark.subcarriers",
                format!("{} not in {{1, 2, 4, 8}}", self.benchmark.subcarriers),
            ));
        }
        if self.benchmark.n == 0 {
            return Err(Error::config("benchmark.n", "must be positive"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats", "must be positive"));
        }
        if let Transmission::BackToBack { snr_db } = self.scenario.transmission {
            if !snr_db.is_finite() {
                return Err(Error::config("transmission.snr_db", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repeats as u64)
            .map(|r| self.seed.wrapping_add(r))
            .collect()
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn hash(&self) -> Result<String> {
        let json = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&json)))
    }

    /// First 12 hex digits of [`RunConfig::hash`].
    pub fn short_hash(&self) -> Result<String> {
        Ok(self.hash()?[..12].to_string())
    }
}

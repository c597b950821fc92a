use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aggregate symbol rate of one optical carrier at full scale.
pub const AGGREGATE_SYMBOL_RATE_GBD: f64 = 78.8;

/// β = 0.05 for one or two subcarriers, 0.1 for more.
pub fn default_rolloff(subcarriers: usize) -> f64 {
    if subcarriers <= 2 {
        0.05
    } else {
        0.1
    }
}

/// Subcarrier comb of one optical carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierPlan {
    pub subcarriers: usize,
    pub symbol_rate_gbd: f64,
    pub rolloff: f64,
    pub spacing_ghz: f64,
}

impl SubcarrierPlan {
    /// `subcarriers` equal slices of `aggregate_rate_gbd`, default roll-off,
    /// spacing `R_Sym (1 + β)`.
    pub fn new(subcarriers: usize, aggregate_rate_gbd: f64) -> Result<Self> {
        Self::with_rolloff(subcarriers, aggregate_rate_gbd, default_rolloff(subcarriers))
    }

    pub fn with_rolloff(subcarriers: usize, aggregate_rate_gbd: f64, rolloff: f64) -> Result<Self> {
        if !matches!(subcarriers, 1 | 2 | 4 | 8) {
            return Err(Error::config(
                "subcarriers",
                format!("{subcarriers} not in {{1, 2, 4, 8}}"),
            ));
        }
        if !(aggregate_rate_gbd > 0.0) {
            return Err(Error::config("aggregate_rate_gbd", "must be positive"));
        }
        let r = aggregate_rate_gbd / subcarriers as f64;
        let plan = Self {
            subcarriers,
            symbol_rate_gbd: r,
            rolloff,
            spacing_ghz: r * (1.0 + rolloff),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::config("rolloff", format!("{} outside [0, 1]", self.rolloff)));
        }
        if self.spacing_ghz < self.symbol_rate_gbd * (1.0 + self.rolloff) * (1.0 - 1e-9) {
            return Err(Error::config(
                "spacing_ghz",
                format!(
                    "{} GHz overlaps subcarriers of bandwidth {} GHz",
                    self.spacing_ghz,
                    self.symbol_rate_gbd * (1.0 + self.rolloff)
                ),
            ));
        }
        Ok(())
    }

    pub fn aggregate_rate_gbd(&self) -> f64 {
        self.symbol_rate_gbd * self.subcarriers as f64
    }

    /// Symmetric comb of subcarrier center offsets.
    pub fn offsets_ghz(&self) -> Vec<f64> {
        let mid = (self.subcarriers as f64 - 1.0) / 2.0;
        (0..self.subcarriers)
            .map(|i| (i as f64 - mid) * self.spacing_ghz)
            .collect()
    }

    /// Width between the outer spectral edges of the comb.
    pub fn occupied_bandwidth_ghz(&self) -> f64 {
        (self.subcarriers as f64 - 1.0) * self.spacing_ghz
            + self.symbol_rate_gbd * (1.0 + self.rolloff)
    }
}

/// Equally spaced WDM grid; channels are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelPlan {
    pub first_thz: f64,
    pub spacing_ghz: f64,
    pub count: usize,
}

impl ChannelPlan {
    /// 37 channels on the 100 GHz grid from 192.1 THz.
    pub fn c_band() -> Self {
        Self {
            first_thz: 192.1,
            spacing_ghz: 100.0,
            count: 37,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::config("channels.count", "must be positive"));
        }
        if !(self.spacing_ghz > 0.0) {
            return Err(Error::config("channels.spacing_ghz", "must be positive"));
        }
        if !(self.first_thz > 0.0) {
            return Err(Error::config("channels.first_thz", "must be positive"));
        }
        Ok(())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.count {
            return Err(Error::config(
                "channel",
                format!("index {index} outside 1..={}", self.count),
            ));
        }
        Ok(())
    }

    pub fn frequency_thz(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(self.first_thz + self.spacing_ghz * 1e-3 * (index - 1) as f64)
    }

    /// Midpoint of the first and last channel.
    pub fn center_thz(&self) -> f64 {
        self.first_thz + self.spacing_ghz * 1e-3 * (self.count - 1) as f64 / 2.0
    }

    /// Offset of channel `index` from the band center.
    pub fn offset_ghz(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(self.spacing_ghz * (index as f64 - 1.0 - (self.count - 1) as f64 / 2.0))
    }

    /// Uniform share of the total launch power.
    pub fn per_channel_power_dbm(&self, total_power_dbm: f64) -> f64 {
        total_power_dbm - 10.0 * (self.count as f64).log10()
    }

    /// Outer edge-to-edge width of all channel slots.
    pub fn band_width_ghz(&self) -> f64 {
        self.spacing_ghz * self.count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid() {
        let p = ChannelPlan::c_band();
        assert!((p.frequency_thz(1).unwrap() - 192.1).abs() < 1e-12);
        assert!((p.frequency_thz(8).unwrap() - 192.8).abs() < 1e-12);
        assert!((p.frequency_thz(37).unwrap() - 195.7).abs() < 1e-12);
        assert!((p.center_thz() - 193.9).abs() < 1e-12);
        assert!((p.offset_ghz(19).unwrap()).abs() < 1e-9);
        assert!((p.offset_ghz(1).unwrap() + 1800.0).abs() < 1e-9);
        assert!(p.frequency_thz(0).is_err());
        assert!(p.frequency_thz(38).is_err());
        assert!((p.per_channel_power_dbm(13.0) + 2.682_017_240_669_95).abs() < 1e-9);
    }

    #[test]
    fn subcarrier_combs() {
        let one = SubcarrierPlan::new(1, 78.8).unwrap();
        assert_eq!(one.offsets_ghz(), vec![0.0]);
        let mut two = SubcarrierPlan::new(2, 78.8).unwrap();
        assert!((two.symbol_rate_gbd - 39.4).abs() < 1e-12);
        two.spacing_ghz = 40.0;
        let o = two.offsets_ghz();
        assert!((o[0] + 20.0).abs() < 1e-12 && (o[1] - 20.0).abs() < 1e-12);
        for n in [1, 2, 4, 8] {
            let p = SubcarrierPlan::new(n, 78.8).unwrap();
            assert!((p.aggregate_rate_gbd() - 78.8).abs() < 1e-9);
            assert!(p.occupied_bandwidth_ghz() <= 78.8 * 1.1 + 1e-9);
            assert!(p.rolloff >= 0.05 && p.rolloff <= 0.1);
        }
        assert!(SubcarrierPlan::new(3, 78.8).is_err());
        let mut bad = SubcarrierPlan::new(4, 78.8).unwrap();
        bad.spacing_ghz = 20.0;
        assert!(bad.validate().is_err());
    }
}

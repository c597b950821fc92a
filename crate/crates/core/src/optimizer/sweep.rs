use serde::{Deserialize, Serialize};

use super::WdmContext;
use crate::error::{Error, Result};
use crate::pas::Modulation;
use crate::shaping::ShapingRate;
use crate::sim::{Job, Scenario};

/// Quantity varied along the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    BlockLength,
    SymbolRate,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub block_lengths: Vec<usize>,
    pub subcarriers: Vec<usize>,
    pub powers_dbm: Vec<f64>,
    pub seeds: Vec<u64>,
    pub modulation: Modulation,
}

impl SweepSpec {
    /// SNR against n on two subcarriers.
    pub fn block_length(powers_dbm: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            axis: SweepAxis::BlockLength,
            block_lengths: vec![20, 40, 80, 320, 1280],
            subcarriers: vec![2],
            powers_dbm,
            seeds,
            modulation: Modulation::pcs(ShapingRate::tenths(8)),
        }
    }

    /// SNR against symbol rate at n = 1280.
    pub fn symbol_rate(powers_dbm: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            axis: SweepAxis::SymbolRate,
            block_lengths: vec![1280],
            subcarriers: vec![1, 2, 4, 8],
            ..Self::block_length(powers_dbm, seeds)
        }
    }

    /// SNR against launch power for n = 20 and n = 1280 on two subcarriers.
    pub fn power(powers_dbm: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            axis: SweepAxis::Power,
            block_lengths: vec![20, 1280],
            ..Self::block_length(powers_dbm, seeds)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("sweep.block_lengths", self.block_lengths.is_empty()),
            ("sweep.subcarriers", self.subcarriers.is_empty()),
            ("sweep.powers_dbm", self.powers_dbm.is_empty()),
            ("sweep.seeds", self.seeds.is_empty()),
        ];
        if let Some((path, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::config(*path, "must not be empty"));
        }
        if let Some(p) = self.powers_dbm.iter().find(|p| !p.is_finite()) {
            return Err(Error::config("sweep.powers_dbm", format!("{p} is not finite")));
        }
        Ok(())
    }

    fn jobs(&self) -> impl Iterator<Item = Job> + '_ {
        self.block_lengths.iter().flat_map(move |&n| {
            self.subcarriers.iter().map(move |&subcarriers| Job {
                n,
                subcarriers,
                modulation: self.modulation,
            })
        })
    }
}

/// One channel of one sweep run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub channel: usize,
    pub frequency_thz: f64,
    pub dispersion_ps_nm_per_loop: f64,
    pub n: usize,
    pub subcarriers: usize,
    pub symbol_rate_gbd: f64,
    pub power_dbm: f64,
    /// Base seed of the sweep point; the run itself uses a derived seed.
    pub seed: u64,
    pub run_seed: u64,
    pub modulation: Modulation,
    pub snr_db: f64,
    pub gmi_bits: f64,
    pub ngmi: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "axis,axis_value,channel,frequency_THz,D_ps_nm_loop,n,N_SC,R_Sym,P_dBm,seed,run_seed,R_S,snr_db,gmi,ngmi";

    pub fn csv_row(&self) -> String {
        let axis = match self.axis {
            SweepAxis::BlockLength => "n",
            SweepAxis::SymbolRate => "R_Sym",
            SweepAxis::Power => "P",
        };
        format!(
            "{axis},{},{},{:.6},{:.3},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.axis_value,
            self.channel,
            self.frequency_thz,
            self.dispersion_ps_nm_per_loop,
            self.n,
            self.subcarriers,
            self.symbol_rate_gbd,
            self.power_dbm,
            self.seed,
            self.run_seed,
            self.modulation.label(),
            self.snr_db,
            self.gmi_bits,
            self.ngmi
        )
    }
}

/// Runs every `(power, seed, n, N_SC)` point of `spec` on `scenario` and
/// returns one row per channel and point, in that nesting order.
pub fn sweep_fig3(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &power_dbm in &spec.powers_dbm {
        let sc = Scenario {
            power_dbm,
            ..scenario.clone()
        };
        for &seed in &spec.seeds {
            let ctx = WdmContext::new(sc.clone(), seed)?;
            for job in spec.jobs() {
                let reports = ctx.run(&job)?;
                for (r, ch) in reports.iter().zip(ctx.channels()) {
                    let c = super::ChannelSim::context(&ch);
                    let axis_value = match spec.axis {
                        SweepAxis::BlockLength => job.n as f64,
                        SweepAxis::SymbolRate => r.symbol_rate_gbd,
                        SweepAxis::Power => power_dbm,
                    };
                    rows.push(SweepRow {
                        axis: spec.axis,
                        axis_value,
                        channel: r.channel,
                        frequency_thz: r.frequency_thz,
                        dispersion_ps_nm_per_loop: c.dispersion_ps_nm_per_loop,
                        n: job.n,
                        subcarriers: job.subcarriers,
                        symbol_rate_gbd: r.symbol_rate_gbd,
                        power_dbm,
                        seed,
                        run_seed: r.seed,
                        modulation: job.modulation,
                        snr_db: r.snr_db,
                        gmi_bits: r.gmi_bits,
                        ngmi: r.ngmi,
                    });
                }
            }
        }
    }
    Ok(rows)
}

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::dispersion_map;
use crate::pas::{Modulation, RateConfig};
use crate::rx::MetricsReport;
use crate::seed::derive_seed;
use crate::shaping::AmplitudeAlphabet;
use crate::sim::{simulate, Job, Scenario};

/// Static facts about the channel under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelContext {
    pub channel: usize,
    pub frequency_thz: f64,
    /// Total launch power of the run, dBm.
    pub power_dbm: f64,
    pub dispersion_ps_nm_per_loop: f64,
    pub aggregate_rate_gbd: f64,
    pub alphabet: AmplitudeAlphabet,
    pub rates: RateConfig,
}

/// Simulate-and-measure callback for one channel.
pub trait ChannelSim: Sync {
    fn context(&self) -> &ChannelContext;
    fn evaluate(&self, job: &Job) -> Result<MetricsReport>;
}

type Slot = Arc<OnceLock<std::result::Result<Arc<Vec<MetricsReport>>, String>>>;

/// A scenario whose runs are cached per job. Every run loads all channels
/// with the same job, so one run serves every channel.
pub struct WdmContext {
    scenario: Scenario,
    base_seed: u64,
    channels: Vec<ChannelContext>,
    cache: Mutex<HashMap<Job, Slot>>,
}

impl WdmContext {
    pub fn new(scenario: Scenario, base_seed: u64) -> Result<Self> {
        scenario.validate()?;
        let channels = (1..=scenario.plan.count)
            .map(|i| {
                let f = scenario.plan.frequency_thz(i)?;
                Ok(ChannelContext {
                    channel: i,
                    frequency_thz: f,
                    power_dbm: scenario.power_dbm,
                    dispersion_ps_nm_per_loop: dispersion_map(&scenario.link, f).net_per_loop_ps_nm,
                    aggregate_rate_gbd: scenario.settings.aggregate_rate_gbd,
                    alphabet: scenario.settings.alphabet.clone(),
                    rates: scenario.settings.rates,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            scenario,
            base_seed,
            channels,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    /// Seed of the run for `job`, independent of evaluation order.
    pub fn job_seed(&self, job: &Job) -> u64 {
        let rate_tag = match job.modulation {
            Modulation::Qpsk => 0,
            Modulation::Pcs { rate } => (rate.numerator() << 32) | rate.denominator(),
        };
        derive_seed(self.base_seed, &[job.n as u64, job.subcarriers as u64, rate_tag])
    }

    /// Reports of all channels for `job`, simulating at most once per job.
    pub fn run(&self, job: &Job) -> Result<Arc<Vec<MetricsReport>>> {
        let slot = {
            let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
            cache.entry(*job).or_default().clone()
        };
        slot.get_or_init(|| {
            simulate(&self.scenario, job, self.job_seed(job))
                .map(|r| Arc::new(r.reports))
                .map_err(|e| e.to_string())
        })
        .clone()
        .map_err(|msg| Error::Simulation {
            context: format!("n={} N_SC={} {}", job.n, job.subcarriers, job.modulation),
            source: Box::new(Error::Degenerate(msg)),
        })
    }

    /// Number of distinct jobs simulated so far.
    pub fn runs(&self) -> usize {
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn channel(&self, index: usize) -> Result<WdmChannel<'_>> {
        self.scenario.plan.check_index(index)?;
        Ok(WdmChannel {
            wdm: self,
            context: &self.channels[index - 1],
        })
    }

    pub fn channels(&self) -> impl Iterator<Item = WdmChannel<'_>> {
        self.channels.iter().map(move |c| WdmChannel {
            wdm: self,
            context: c,
        })
    }
}

/// One channel's view of a [`WdmContext`].
pub struct WdmChannel<'a> {
    wdm: &'a WdmContext,
    context: &'a ChannelContext,
}

impl ChannelSim for WdmChannel<'_> {
    fn context(&self) -> &ChannelContext {
        self.context
    }

    fn evaluate(&self, job: &Job) -> Result<MetricsReport> {
        let reports = self.wdm.run(job)?;
        Ok(reports[self.context.channel - 1].clone())
    }
}

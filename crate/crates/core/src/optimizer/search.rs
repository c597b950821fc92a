use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Benchmark, ChannelSim, SearchGrid};
use crate::error::{Error, Result};
use crate::pas::Modulation;
use crate::sim::Job;

/// Relative tolerance under which two NDRs count as equal.
const NDR_TIE: f64 = 1e-9;

/// Order in which shaping rates are probed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateSearchStrategy {
    /// From the top down, stopping at the first feasible rate.
    Descending,
    /// Binary search assuming NGMI falls with rate; a non-monotone probe
    /// triggers a full scan.
    #[default]
    Bisection,
    /// Every rate.
    FullScan,
}

/// One simulated point of a rate search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEvaluation {
    pub modulation: Modulation,
    pub ngmi: f64,
    pub snr_db: f64,
    pub feasible: bool,
}

/// Best feasible format at fixed `(n, N_SC)`; `modulation` is `None` when
/// even QPSK misses the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSearchOutcome {
    pub n: usize,
    pub subcarriers: usize,
    pub modulation: Option<Modulation>,
    pub ngmi: f64,
    pub snr_db: f64,
    pub ndr_gbps: f64,
    /// Probes in evaluation order.
    pub evaluations: Vec<RateEvaluation>,
    pub warnings: Vec<String>,
}

struct Prober<'a> {
    sim: &'a dyn ChannelSim,
    n: usize,
    subcarriers: usize,
    evaluations: Vec<RateEvaluation>,
}

impl Prober<'_> {
    fn probe(&mut self, modulation: Modulation) -> Result<RateEvaluation> {
        if let Some(e) = self.evaluations.iter().find(|e| e.modulation == modulation) {
            return Ok(e.clone());
        }
        let job = Job {
            n: self.n,
            subcarriers: self.subcarriers,
            modulation,
        };
        let ctx = self.sim.context();
        let report = self.sim.evaluate(&job).map_err(|e| Error::Simulation {
            context: format!(
                "channel {} n={} N_SC={} {}",
                ctx.channel, self.n, self.subcarriers, modulation
            ),
            source: Box::new(e),
        })?;
        let e = RateEvaluation {
            modulation,
            ngmi: report.ngmi,
            snr_db: report.snr_db,
            feasible: report.ngmi >= ctx.rates.ngmi_threshold,
        };
        self.evaluations.push(e.clone());
        Ok(e)
    }

    /// Probed shaped rates whose NGMI rises with rate.
    fn inversions(&self) -> Vec<String> {
        let mut probed: Vec<&RateEvaluation> = self
            .evaluations
            .iter()
            .filter(|e| e.modulation != Modulation::Qpsk)
            .collect();
        probed.sort_by_key(|a| a.modulation);
        probed
            .windows(2)
            .filter(|w| w[1].ngmi > w[0].ngmi)
            .map(|w| {
                format!(
                    "NGMI not monotone in rate: {:.4} at {} below {:.4} at {}",
                    w[0].ngmi,
                    w[0].modulation.label(),
                    w[1].ngmi,
                    w[1].modulation.label()
                )
            })
            .collect()
    }
}

/// Largest feasible format at fixed `(n, N_SC)`.
///
/// `modulations` lists candidate formats in ascending rate; QPSK, if present,
/// is only tried once no shaped rate qualifies.
pub fn rate_search(
    sim: &dyn ChannelSim,
    n: usize,
    subcarriers: usize,
    modulations: &[Modulation],
    strategy: RateSearchStrategy,
) -> Result<RateSearchOutcome> {
    let shaped: Vec<Modulation> = modulations
        .iter()
        .copied()
        .filter(|m| *m != Modulation::Qpsk)
        .collect();
    if shaped.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("grid.rates", "formats must be strictly ascending"));
    }
    let mut p = Prober {
        sim,
        n,
        subcarriers,
        evaluations: Vec::new(),
    };
    let mut warnings = Vec::new();
    let full_scan = |p: &mut Prober| -> Result<Option<usize>> {
        let mut best = None;
        for (i, m) in shaped.iter().enumerate() {
            if p.probe(*m)?.feasible {
                best = Some(i);
            }
        }
        Ok(best)
    };
    let best = match strategy {
        RateSearchStrategy::Descending => {
            let mut best = None;
            for (i, m) in shaped.iter().enumerate().rev() {
                if p.probe(*m)?.feasible {
                    best = Some(i);
                    break;
                }
            }
            best
        }
        RateSearchStrategy::FullScan => full_scan(&mut p)?,
        RateSearchStrategy::Bisection => {
            // Invariant: everything below `lo` is feasible, `hi` and above are not.
            let (mut lo, mut hi) = (0usize, shaped.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                if p.probe(shaped[mid])?.feasible {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let inv = p.inversions();
            if inv.is_empty() {
                lo.checked_sub(1)
            } else {
                warnings.extend(inv);
                warnings.push("falling back to a full scan".into());
                full_scan(&mut p)?
            }
        }
    };
    if strategy != RateSearchStrategy::Bisection {
        warnings.extend(p.inversions());
    }

    let ctx = sim.context();
    let chosen = match best {
        Some(i) => Some(p.probe(shaped[i])?),
        None if modulations.contains(&Modulation::Qpsk) => {
            Some(p.probe(Modulation::Qpsk)?).filter(|e| e.feasible)
        }
        None => None,
    };
    let (modulation, ngmi, snr_db, ndr_gbps) = match chosen {
        Some(e) => {
            let ndr = e.modulation.ndr_gbps(
                &ctx.alphabet,
                &ctx.rates,
                ctx.aggregate_rate_gbd / subcarriers as f64,
                subcarriers,
            )?;
            (Some(e.modulation), e.ngmi, e.snr_db, ndr)
        }
        None => {
            let last = p
                .evaluations
                .iter()
                .min_by(|a, b| a.modulation.cmp(&b.modulation))
                .cloned();
            warnings.push("no format reaches the NGMI threshold".into());
            match last {
                Some(e) => (None, e.ngmi, e.snr_db, 0.0),
                None => (None, f64::NAN, f64::NAN, 0.0),
            }
        }
    };
    Ok(RateSearchOutcome {
        n,
        subcarriers,
        modulation,
        ngmi,
        snr_db,
        ndr_gbps,
        evaluations: p.evaluations,
        warnings,
    })
}

/// Summary of one `(n, N_SC)` point of a channel optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub n: usize,
    pub subcarriers: usize,
    pub modulation: Option<Modulation>,
    pub ngmi: f64,
    pub snr_db: f64,
    pub ndr_gbps: f64,
    pub probes: usize,
}

impl From<&RateSearchOutcome> for CandidateRow {
    fn from(o: &RateSearchOutcome) -> Self {
        Self {
            n: o.n,
            subcarriers: o.subcarriers,
            modulation: o.modulation,
            ngmi: o.ngmi,
            snr_db: o.snr_db,
            ndr_gbps: o.ndr_gbps,
            probes: o.evaluations.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub channel: usize,
    pub frequency_thz: f64,
    pub power_dbm: f64,
    pub dispersion_ps_nm_per_loop: f64,
    pub n: usize,
    pub subcarriers: usize,
    pub symbol_rate_gbd: f64,
    /// `None` when nothing in the grid is decodable.
    pub modulation: Option<Modulation>,
    pub snr_db: f64,
    pub ngmi: f64,
    pub ndr_gbps: f64,
    pub candidates: Vec<CandidateRow>,
    pub diagnostics: Vec<String>,
}

impl ChannelResult {
    /// NDR recomputed from the stored format and symbol rate.
    pub fn recompute_ndr(&self, sim: &dyn ChannelSim) -> Result<f64> {
        let ctx = sim.context();
        match self.modulation {
            Some(m) => m.ndr_gbps(&ctx.alphabet, &ctx.rates, self.symbol_rate_gbd, self.subcarriers),
            None => Ok(0.0),
        }
    }
}

/// `a` beats `b`: higher NDR, then larger n, then fewer subcarriers.
fn better(a: &CandidateRow, b: &CandidateRow) -> bool {
    let scale = a.ndr_gbps.abs().max(b.ndr_gbps.abs()).max(1.0);
    if (a.ndr_gbps - b.ndr_gbps).abs() > NDR_TIE * scale {
        return a.ndr_gbps > b.ndr_gbps;
    }
    if a.n != b.n {
        return a.n > b.n;
    }
    a.subcarriers < b.subcarriers
}

fn collect_result(
    sim: &dyn ChannelSim,
    outcomes: Vec<RateSearchOutcome>,
) -> Result<ChannelResult> {
    let ctx = sim.context();
    let candidates: Vec<CandidateRow> = outcomes.iter().map(CandidateRow::from).collect();
    let best = candidates
        .iter()
        .filter(|c| c.modulation.is_some())
        .fold(None::<&CandidateRow>, |acc, c| match acc {
            Some(a) if !better(c, a) => Some(a),
            _ => Some(c),
        });
    let mut diagnostics: Vec<String> = outcomes
        .iter()
        .flat_map(|o| {
            o.warnings
                .iter()
                .map(move |w| format!("n={} N_SC={}: {w}", o.n, o.subcarriers))
        })
        .collect();
    let pick = match best {
        Some(b) => b.clone(),
        None => {
            let closest = candidates
                .iter()
                .filter(|c| c.ngmi.is_finite())
                .max_by(|a, b| a.ngmi.total_cmp(&b.ngmi))
                .or(candidates.first())
                .ok_or_else(|| Error::config("grid", "no candidates"))?;
            diagnostics.push(format!(
                "no feasible configuration; highest NGMI {:.4} at n={} N_SC={} is below {}",
                closest.ngmi, closest.n, closest.subcarriers, ctx.rates.ngmi_threshold
            ));
            closest.clone()
        }
    };
    Ok(ChannelResult {
        channel: ctx.channel,
        frequency_thz: ctx.frequency_thz,
        power_dbm: ctx.power_dbm,
        dispersion_ps_nm_per_loop: ctx.dispersion_ps_nm_per_loop,
        n: pick.n,
        subcarriers: pick.subcarriers,
        symbol_rate_gbd: ctx.aggregate_rate_gbd / pick.subcarriers as f64,
        modulation: pick.modulation,
        snr_db: pick.snr_db,
        ngmi: pick.ngmi,
        ndr_gbps: pick.ndr_gbps,
        candidates,
        diagnostics,
    })
}

/// Highest-NDR `(n, N_SC, R_S)` on the grid. Ties go to the larger n, then to
/// fewer subcarriers.
pub fn optimize_channel(
    sim: &dyn ChannelSim,
    grid: &SearchGrid,
    strategy: RateSearchStrategy,
) -> Result<ChannelResult> {
    grid.validate()?;
    let modulations = grid.modulations();
    let points: Vec<(usize, usize)> = grid
        .block_lengths
        .iter()
        .flat_map(|&n| grid.subcarriers.iter().map(move |&s| (n, s)))
        .collect();
    let outcomes = points
        .par_iter()
        .map(|&(n, s)| rate_search(sim, n, s, &modulations, strategy))
        .collect::<Result<Vec<_>>>()?;
    collect_result(sim, outcomes)
}

/// The fixed benchmark configuration with only the rate adapted.
pub fn benchmark_channel(
    sim: &dyn ChannelSim,
    benchmark: Benchmark,
    grid: &SearchGrid,
    strategy: RateSearchStrategy,
) -> Result<ChannelResult> {
    grid.validate()?;
    let outcome = rate_search(
        sim,
        benchmark.n,
        benchmark.subcarriers,
        &grid.modulations(),
        strategy,
    )?;
    collect_result(sim, vec![outcome])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemTotal {
    pub total_gbps: f64,
    /// `(channel, NDR)` in channel order.
    pub per_channel: Vec<(usize, f64)>,
    pub benchmark_gbps: Option<f64>,
    /// Relative gain over the benchmark, percent.
    pub gain_percent: Option<f64>,
}

fn sorted_ndrs(results: &[ChannelResult]) -> Result<Vec<(usize, f64)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        if !seen.insert(r.channel) {
            return Err(Error::DuplicateChannel(r.channel));
        }
        out.push((r.channel, r.ndr_gbps));
    }
    out.sort_by_key(|&(c, _)| c);
    Ok(out)
}

/// Sum of per-channel NDRs, with the gain over `benchmark` when one is given.
pub fn system_total(
    results: &[ChannelResult],
    benchmark: Option<&[ChannelResult]>,
) -> Result<SystemTotal> {
    let per_channel = sorted_ndrs(results)?;
    let total_gbps = per_channel.iter().map(|&(_, v)| v).sum();
    let benchmark_gbps = match benchmark {
        Some(b) if !b.is_empty() => Some(sorted_ndrs(b)?.iter().map(|&(_, v)| v).sum::<f64>()),
        _ => None,
    };
    let gain_percent = benchmark_gbps
        .filter(|&b| b > 0.0)
        .map(|b| 100.0 * (total_gbps / b - 1.0));
    Ok(SystemTotal {
        total_gbps,
        per_channel,
        benchmark_gbps,
        gain_percent,
    })
}

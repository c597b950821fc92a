use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use shapelink::config::{Preset, RunConfig};
use shapelink::fiber::{dispersion_map as link_dispersion, wavelength_nm, PropagationStats};
use shapelink::optimizer::{
    benchmark_channel, optimize_channel, sweep_fig3, system_total, ChannelResult, ChannelSim,
    SweepAxis, SweepRow, SweepSpec, SystemTotal, WdmContext,
};
use shapelink::pas::{FrameLedger, Modulation};
use shapelink::rx::MetricsReport;
use shapelink::shaping::{gap_table, ShapingRate};
use shapelink::sim::{simulate as run_sim, Job, Scenario, Transmission};

use crate::output::Output;

/// Full-system NDR gain of the optimized system over the benchmark, percent.
/// Echoed for the paper-scale preset; never asserted.
const REFERENCE_GAIN_PERCENT: f64 = 6.4;

pub struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    dry_run: bool,
}

impl Ctx {
    pub fn new(cfg: RunConfig, out: &Path, dry_run: bool) -> Self {
        Self {
            cfg,
            out: out.to_path_buf(),
            dry_run,
        }
    }

    fn output(&self, command: &'static str) -> Result<Output> {
        let out = Output::new(&self.out, command, self.cfg.hash()?, self.cfg.seed)?;
        out.json("config.json", &self.cfg)?;
        out.toml("link.toml", &self.cfg.scenario.link)?;
        Ok(out)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// `qpsk` or a decimal shaping rate; rates up to 0.2 are realized as QPSK.
fn parse_modulation(s: &str) -> Result<Modulation> {
    if s.eq_ignore_ascii_case("qpsk") {
        return Ok(Modulation::Qpsk);
    }
    let r = ShapingRate::from_str(s).with_context(|| format!("invalid rate `{s}`"))?;
    Ok(if r <= ShapingRate::tenths(2) {
        Modulation::Qpsk
    } else {
        Modulation::pcs(r)
    })
}

#[derive(Serialize)]
struct DryRun {
    preset: Preset,
    channels: usize,
    total_length_km: f64,
    net_dispersion_ps_nm_per_loop: Vec<(usize, f64)>,
    probe_symbols_per_channel: usize,
    probe_stats: Option<PropagationStats>,
    probe_reports: Vec<MetricsReport>,
    full_wdm_samples: usize,
    full_steps_estimate: Option<usize>,
    runs_upper_bound: usize,
}

const PROBE_SYMBOLS: usize = 512;

/// One span, one loop, short frames: exercises every stage without the cost.
fn dry_run(ctx: &Ctx, out: &Output, runs_upper_bound: usize) -> Result<()> {
    let cfg = &ctx.cfg;
    let s = &cfg.scenario;
    let mut probe = s.clone();
    probe.link.spans.truncate(1);
    probe.link.loops = 1;
    probe.settings.symbols_per_channel = PROBE_SYMBOLS;
    let job = Job {
        n: 20,
        subcarriers: 2,
        modulation: Modulation::Qpsk,
    };
    let run = run_sim(&probe, &job, cfg.seed).context("probe propagation")?;
    let spans = s.link.spans.len() * s.link.loops;
    let report = DryRun {
        preset: cfg.preset,
        channels: s.plan.count,
        total_length_km: s.link.total_length_km(),
        net_dispersion_ps_nm_per_loop: (1..=s.plan.count)
            .map(|i| Ok((i, link_dispersion(&s.link, s.plan.frequency_thz(i)?).net_per_loop_ps_nm)))
            .collect::<shapelink::Result<_>>()?,
        probe_symbols_per_channel: PROBE_SYMBOLS,
        full_steps_estimate: run.stats.as_ref().map(|st| st.steps * spans),
        probe_stats: run.stats,
        probe_reports: run.reports,
        full_wdm_samples: s.settings.symbols_per_channel * s.settings.wdm_oversampling,
        runs_upper_bound,
    };
    let path = out.json("dry_run.json", &report)?;
    println!(
        "dry run ok: {} channels, {:.1} km, ~{} SSFM steps per run at {} samples, <= {} runs; {}",
        report.channels,
        report.total_length_km,
        report.full_steps_estimate.unwrap_or(0),
        report.full_wdm_samples,
        runs_upper_bound,
        path.display()
    );
    Ok(())
}

pub fn shape_gap(ctx: &Ctx) -> Result<()> {
    let out = ctx.output("shape-gap")?;
    if ctx.dry_run {
        println!("dry run ok: config {}", out.config_hash());
        return Ok(());
    }
    let g = &ctx.cfg.grid;
    let rows = gap_table(&ctx.cfg.scenario.settings.alphabet, &g.block_lengths, &g.rates);
    let path = out.csv(
        "shape_gap.csv",
        "n,R_S,kind,k,detail,gap_dB,error",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.n,
                r.rate,
                r.kind,
                r.k,
                csv_field(&r.detail),
                opt(r.gap_db),
                csv_field(r.error.as_deref().unwrap_or(""))
            )
        }),
    )?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} rows ({failed} infeasible) -> {}", rows.len(), path.display());
    Ok(())
}

pub fn dispersion_map(ctx: &Ctx, channels: &[usize]) -> Result<()> {
    let out = ctx.output("dispersion-map")?;
    let s = &ctx.cfg.scenario;
    for &c in channels {
        s.plan.check_index(c)?;
    }
    if ctx.dry_run {
        println!("dry run ok: config {}", out.config_hash());
        return Ok(());
    }
    let mut rows = Vec::new();
    for i in 1..=s.plan.count {
        let f = s.plan.frequency_thz(i)?;
        let map = link_dispersion(&s.link, f);
        let total = map.profile.last().map_or(0.0, |p| p.1);
        rows.push(format!(
            "{i},{f:.4},{:.4},{:.4},{:.4}",
            wavelength_nm(f),
            map.net_per_loop_ps_nm,
            total
        ));
        if channels.is_empty() || channels.contains(&i) {
            out.csv_body(&format!("dispersion_profile_ch{i}.csv"), &map.to_csv())?;
        }
    }
    let path = out.csv(
        "dispersion_map.csv",
        "channel,frequency_THz,wavelength_nm,net_ps_nm_per_loop,accumulated_ps_nm",
        rows,
    )?;
    println!("{} channels -> {}", s.plan.count, path.display());
    Ok(())
}

pub struct SimulateArgs {
    pub n: usize,
    pub subcarriers: usize,
    pub rate: String,
    pub power: Option<f64>,
    pub b2b_snr: Option<f64>,
    pub psd_resolution: usize,
}

#[derive(Serialize)]
struct SimRecord<'a> {
    seed: u64,
    job: Job,
    transmission: &'a Transmission,
    stats: Option<PropagationStats>,
    reports: Vec<MetricsReport>,
}

#[derive(Serialize)]
struct LedgerRecord {
    seed: u64,
    ledgers: Vec<FrameLedger>,
}

pub fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let out = ctx.output("simulate")?;
    let job = Job {
        n: a.n,
        subcarriers: a.subcarriers,
        modulation: parse_modulation(&a.rate)?,
    };
    let mut scenario: Scenario = ctx.cfg.scenario.clone();
    if let Some(p) = a.power {
        scenario.power_dbm = p;
    }
    if let Some(snr_db) = a.b2b_snr {
        scenario.transmission = Transmission::BackToBack { snr_db };
    }
    scenario.validate()?;
    if ctx.dry_run {
        return dry_run(ctx, &out, ctx.cfg.repeats);
    }
    let mut records = Vec::new();
    let mut ledgers = Vec::new();
    let mut rows = Vec::new();
    for (r, seed) in ctx.cfg.seeds().into_iter().enumerate() {
        let run = run_sim(&scenario, &job, seed)?;
        if r == 0 {
            out.csv_body("psd_launch.csv", &run.launch.psd_csv(a.psd_resolution))?;
            out.csv_body("psd_received.csv", &run.received.psd_csv(a.psd_resolution))?;
        }
        for rep in &run.reports {
            println!(
                "seed {seed} ch {}: SNR {:.3} dB, GMI {:.4}, NGMI {:.4}{}",
                rep.channel,
                rep.snr_db,
                rep.gmi_bits,
                rep.ngmi,
                if rep.snr_capped { " (SNR capped)" } else { "" }
            );
            rows.push(rep.csv_row());
        }
        ledgers.push(LedgerRecord {
            seed,
            ledgers: run.ledgers,
        });
        records.push(SimRecord {
            seed,
            job,
            transmission: &scenario.transmission,
            stats: run.stats,
            reports: run.reports,
        });
    }
    out.json("metrics.json", &records)?;
    out.json("ledger.json", &ledgers)?;
    let path = out.csv("run.csv", MetricsReport::CSV_HEADER, rows)?;
    println!("-> {}", path.display());
    Ok(())
}

pub fn sweep(ctx: &Ctx, axis: SweepAxis, powers: Vec<f64>, rate: &str) -> Result<()> {
    let out = ctx.output("sweep")?;
    let cfg = &ctx.cfg;
    let powers = match (powers.is_empty(), axis) {
        (false, _) => powers,
        (true, SweepAxis::Power) => (0..6)
            .map(|k| cfg.scenario.power_dbm - 5.0 + k as f64)
            .collect(),
        (true, _) => cfg.grid.powers_dbm.clone(),
    };
    let seeds = cfg.seeds();
    let mut spec = match axis {
        SweepAxis::BlockLength => SweepSpec::block_length(powers, seeds),
        SweepAxis::SymbolRate => SweepSpec::symbol_rate(powers, seeds),
        SweepAxis::Power => SweepSpec::power(powers, seeds),
    };
    spec.modulation = parse_modulation(rate)?;
    spec.validate()?;
    if ctx.dry_run {
        let runs = spec.powers_dbm.len()
            * spec.seeds.len()
            * spec.block_lengths.len()
            * spec.subcarriers.len();
        return dry_run(ctx, &out, runs);
    }
    let rows = sweep_fig3(&cfg.scenario, &spec)?;
    for r in &rows {
        println!(
            "P {:.2} n {:>4} N_SC {} seed {} ch {}: SNR {:.3} dB",
            r.power_dbm, r.n, r.subcarriers, r.seed, r.channel, r.snr_db
        );
    }
    let name = match axis {
        SweepAxis::BlockLength => "sweep_n.csv",
        SweepAxis::SymbolRate => "sweep_r_sym.csv",
        SweepAxis::Power => "sweep_p.csv",
    };
    out.json("sweep.json", &spec)?;
    let path = out.csv(name, SweepRow::CSV_HEADER, rows.iter().map(SweepRow::csv_row))?;
    println!("-> {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct PowerResult {
    power_dbm: f64,
    seed: u64,
    optimized: Vec<ChannelResult>,
    benchmark: Vec<ChannelResult>,
    total: SystemTotal,
    simulated_jobs: usize,
}

#[derive(Serialize)]
struct OptimizeReport {
    preset: Preset,
    powers: Vec<PowerResult>,
    /// Full-system reference gain; informational only.
    reference_gain_percent: Option<f64>,
}

pub fn optimize(ctx: &Ctx, channels: &[usize], powers: Vec<f64>) -> Result<()> {
    let out = ctx.output("optimize")?;
    let cfg = &ctx.cfg;
    let powers = if powers.is_empty() {
        cfg.grid.powers_dbm.clone()
    } else {
        powers
    };
    for &c in channels {
        cfg.scenario.plan.check_index(c)?;
    }
    if let Some(p) = powers.iter().find(|p| !p.is_finite()) {
        bail!("invalid configuration at `powers`: {p} is not finite");
    }
    if ctx.dry_run {
        let g = &cfg.grid;
        let runs = powers.len() * g.block_lengths.len() * g.subcarriers.len() * g.modulations().len();
        return dry_run(ctx, &out, runs);
    }
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &power_dbm in &powers {
        let scenario = Scenario {
            power_dbm,
            ..cfg.scenario.clone()
        };
        let wdm = WdmContext::new(scenario, cfg.seed)?;
        let mut optimized = Vec::new();
        let mut benchmark = Vec::new();
        for ch in wdm.channels() {
            let c = ch.context().channel;
            if !channels.is_empty() && !channels.contains(&c) {
                continue;
            }
            let best = optimize_channel(&ch, &cfg.grid, cfg.strategy)?;
            let bench = benchmark_channel(&ch, cfg.benchmark, &cfg.grid, cfg.strategy)?;
            println!(
                "P {power_dbm:.2} ch {c}: n* {} N_SC* {} R_S* {} NDR {:.2} Gb/s (benchmark {:.2})",
                best.n,
                best.subcarriers,
                best.modulation.map_or("none".into(), |m| m.label()),
                best.ndr_gbps,
                bench.ndr_gbps
            );
            for d in &best.diagnostics {
                eprintln!("  ch {c}: {d}");
            }
            rows.push(format!(
                "{power_dbm},{c},{:.4},{:.3},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                best.frequency_thz,
                best.dispersion_ps_nm_per_loop,
                best.n,
                best.subcarriers,
                best.symbol_rate_gbd,
                best.modulation.map_or("none".into(), |m| m.label()),
                best.snr_db,
                best.ngmi,
                best.ndr_gbps,
                bench.ndr_gbps
            ));
            optimized.push(best);
            benchmark.push(bench);
        }
        let total = system_total(&optimized, Some(&benchmark))?;
        println!(
            "P {power_dbm:.2}: total {:.2} Gb/s, benchmark {:.2} Gb/s, gain {}",
            total.total_gbps,
            total.benchmark_gbps.unwrap_or(0.0),
            total
                .gain_percent
                .map_or("n/a".into(), |g| format!("{g:.2} %"))
        );
        results.push(PowerResult {
            power_dbm,
            seed: cfg.seed,
            optimized,
            benchmark,
            total,
            simulated_jobs: wdm.runs(),
        });
    }
    let report = OptimizeReport {
        preset: cfg.preset,
        powers: results,
        reference_gain_percent: (cfg.preset == Preset::PaperScale).then_some(REFERENCE_GAIN_PERCENT),
    };
    out.json("optimize.json", &report)?;
    let path = out.csv(
        "optimize.csv",
        "P_dBm,channel,frequency_THz,D_ps_nm_loop,n,N_SC,R_Sym,R_S,snr_db,ngmi,ndr_gbps,benchmark_ndr_gbps",
        rows,
    )?;
    println!("-> {}", path.display());
    Ok(())
}

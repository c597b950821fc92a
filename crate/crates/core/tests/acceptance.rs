//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so the
//! lines come out in order with their timings.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use shapelink::config::RunConfig;
use shapelink::fiber::{dispersion_map, propagate, AmplifierSpec, DgePolicy, LinkSpec, SpanSpec, StepControl};
use shapelink::optimizer::{
    benchmark_channel, optimize_channel, rate_search, ChannelContext, ChannelResult, ChannelSim,
    RateSearchStrategy, SearchGrid, WdmContext,
};
use shapelink::pas::{ndr_gbps, Modulation, RateConfig};
use shapelink::rx::MetricsReport;
use shapelink::shaping::{
    shaping_gap_db, AmplitudeAlphabet, ShapingConfig, ShapingKind, ShapingRate,
};
use shapelink::sim::{simulate, Job, Transmission};
use shapelink::waveform::ChannelPlan;
use shapelink::SampledField;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pcs(tenths: u64) -> Modulation {
    Modulation::pcs(ShapingRate::tenths(tenths))
}

fn job(n: usize, subcarriers: usize, modulation: Modulation) -> Job {
    Job { n, subcarriers, modulation }
}

// 1. Codec exactness against brute force.
fn codec_exactness() -> Outcome {
    let t = Instant::now();
    common::oracle::ess_matches_enumeration(12);
    common::oracle::ccdm_matches_enumeration(12);
    let s = t.elapsed().as_secs_f64();
    ensure(s < 60.0, format!("ESS and CCDM match enumeration for n <= 12 in {s:.1} s"))
}

// 2. Shaping gap.
fn shaping_gap() -> Outcome {
    let qam16 = AmplitudeAlphabet::qam16();
    let mut worst = (0.0f64, 0);
    for t in 2..=9 {
        let cfg = ShapingConfig::new(1280, ShapingRate::tenths(t), qam16.clone(), ShapingKind::Ccdm)
            .map_err(|e| e.to_string())?;
        let g = shaping_gap_db(&cfg).map_err(|e| e.to_string())?;
        if g > worst.0 {
            worst = (g, t);
        }
    }
    let ess: Vec<f64> = [20, 40, 80, 320]
        .iter()
        .map(|&n| {
            let cfg = ShapingConfig::new(n, ShapingRate::tenths(8), qam16.clone(), ShapingKind::Ess)?;
            shaping_gap_db(&cfg)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let decreasing = ess.windows(2).all(|w| w[1] < w[0]);
    ensure(
        worst.0 <= 0.05 && decreasing,
        format!(
            "CCDM n=1280 worst gap {:.4} dB at R_S=0.{}; ESS R_S=0.8 gaps {:?} dB",
            worst.0,
            worst.1,
            ess.iter().map(|g| (g * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

// 3. Dispersion map anchors.
fn dispersion_anchors() -> Outcome {
    let link = LinkSpec::paper_scale();
    let mut parts = Vec::new();
    let mut ok = true;
    for (f, target) in [(192.3, -86.0), (192.8, -1.0), (195.2, 402.0)] {
        let net = dispersion_map(&link, f).net_per_loop_ps_nm;
        ok &= (net - target).abs() <= 10.0;
        parts.push(format!("{f} THz {net:.2} (target {target})"));
    }
    ensure(ok, format!("ps/nm/loop: {}", parts.join(", ")))
}

// 4. Net data rate arithmetic.
fn ndr_arithmetic() -> Outcome {
    let r = RateConfig::default();
    let e = |s: shapelink::Error| s.to_string();
    let ndr = ndr_gbps(0.8, &r, 2, 39.4, 2).map_err(e)?;
    let direct = 4.0 * (0.8 + 1.0 - 2.0 * 0.2) * 39.4 * 2.0 * 47.0 / 48.0;
    let pcs = ndr_gbps(0.2, &r, 2, 39.4, 2).map_err(e)?;
    let qpsk = ndr_gbps(0.0, &r, 1, 39.4, 2).map_err(e)?;
    ensure(
        (ndr - direct).abs() < 1e-9 && (ndr - 432.0833).abs() < 0.01 && (pcs - qpsk).abs() <= 1e-12 * qpsk,
        format!("NDR {ndr:.4} Gb/s (432.0833 quoted); PCS R_S=0.2 {pcs:.6} vs QPSK {qpsk:.6} Gb/s"),
    )
}

fn lossless(span: SpanSpec) -> LinkSpec {
    LinkSpec {
        spans: vec![span],
        loops: 1,
        amplifier: AmplifierSpec { noise_figure_db: 5.0, ase: false },
        dge: DgePolicy::Off,
        step: StepControl::default(),
    }
}

fn random_field(len: usize, fs: f64, power_mw: f64, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectra = [vec![Complex64::new(0.0, 0.0); len], vec![Complex64::new(0.0, 0.0); len]];
    for s in spectra.iter_mut() {
        for (k, c) in s.iter_mut().enumerate() {
            if k < len / 4 || k >= len - len / 4 {
                *c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
    }
    let mut f = SampledField::from_spectra(spectra, fs, 193.6).unwrap();
    f.set_power_mw(power_mw).unwrap();
    f
}

fn rms_rel(a: &SampledField, b: &SampledField) -> f64 {
    let num: f64 = a.x.iter().zip(&b.x).chain(a.y.iter().zip(&b.y)).map(|(p, q)| (p - q).norm_sqr()).sum();
    let den: f64 = b.x.iter().chain(&b.y).map(|q| q.norm_sqr()).sum();
    (num / den).sqrt()
}

// 5. Propagation physics.
fn propagation_physics() -> Outcome {
    let e = |s: shapelink::Error| s.to_string();
    let mut parts = Vec::new();
    let mut ok = true;

    // (a) dispersion only, the whole mini link, compensated at the receiver
    let mut cfg = RunConfig::mini_link();
    for s in cfg.scenario.link.spans.iter_mut() {
        s.gamma_per_w_km = 0.0;
    }
    cfg.scenario.link.amplifier.ase = false;
    // linear steps commute, so one step per span is exact
    cfg.scenario.link.step.max_step_km = 50.0;
    let run = simulate(&cfg.scenario, &job(1280, 2, pcs(8)), 1).map_err(e)?;
    let worst = run.reports.iter().map(|r| r.snr_db).fold(f64::MAX, f64::min);
    ok &= worst > 40.0;
    parts.push(format!("(a) CDC SNR >= {worst:.1} dB"));

    // (b) continuous wave self-phase modulation
    let span = SpanSpec {
        dispersion_ps_nm_km: 0.0,
        slope_ps_nm2_km: 0.0,
        attenuation_db_km: 0.0,
        length_km: 50.0,
        ..SpanSpec::ndf()
    };
    let p = 5.0;
    let cw = SampledField::new(
        vec![Complex64::new(f64::sqrt(p), 0.0); 64],
        vec![Complex64::new(0.0, 0.0); 64],
        100.0,
        193.6,
    )
    .map_err(e)?;
    let out = propagate(&cw, &lossless(span.clone()), 0).map_err(e)?;
    let expect = 8.0 / 9.0 * span.gamma_per_w_km * 1e-3 * p * span.length_km;
    let phase_err = out.x.iter().map(|c| (-c.arg() / expect - 1.0).abs()).fold(0.0, f64::max);
    ok &= phase_err < 1e-6;
    parts.push(format!("(b) SPM phase rel err {phase_err:.1e}"));

    // (c) power conservation with dispersion and nonlinearity
    let span = SpanSpec { attenuation_db_km: 0.0, ..SpanSpec::ndf() };
    let input = random_field(2048, 200.0, 20.0, 3);
    let out = propagate(&input, &lossless(span), 0).map_err(e)?;
    let drift = (out.power_mw() / input.power_mw() - 1.0).abs();
    ok &= drift < 1e-6;
    parts.push(format!("(c) power drift {drift:.1e}"));

    // (d) step halving, one full-scale channel over a loop at default steps
    let mut cfg = RunConfig::paper_scale();
    cfg.scenario.plan = ChannelPlan { first_thz: 193.6, spacing_ghz: 100.0, count: 1 };
    cfg.scenario.power_dbm = ChannelPlan::c_band().per_channel_power_dbm(13.0);
    cfg.scenario.settings.symbols_per_channel = 4096;
    cfg.scenario.settings.wdm_oversampling = 4;
    cfg.scenario.transmission = Transmission::BackToBack { snr_db: 100.0 };
    let launch = simulate(&cfg.scenario, &job(1280, 2, pcs(8)), 1).map_err(e)?.launch;
    let mut link = LinkSpec::paper_scale();
    link.loops = 1;
    link.amplifier.ase = false;
    let coarse = propagate(&launch, &link, 0).map_err(e)?;
    link.step.max_step_km /= 2.0;
    link.step.max_nonlinear_phase_rad /= 2.0;
    let fine = propagate(&launch, &link, 0).map_err(e)?;
    let d = rms_rel(&coarse, &fine);
    ok &= d < 1e-4;
    parts.push(format!("(d) halving RMS {d:.1e}"));

    // (d) mini link, coarser steps held to metric-level convergence
    let mut mini = RunConfig::mini_link();
    mini.scenario.link.loops = 1;
    let j = job(1280, 2, pcs(8));
    let a = simulate(&mini.scenario, &j, 3).map_err(e)?;
    mini.scenario.link.step.max_step_km /= 2.0;
    mini.scenario.link.step.max_nonlinear_phase_rad /= 2.0;
    let b = simulate(&mini.scenario, &j, 3).map_err(e)?;
    let dsnr = a
        .reports
        .iter()
        .zip(&b.reports)
        .map(|(x, y)| (x.snr_db - y.snr_db).abs())
        .fold(0.0, f64::max);
    ok &= dsnr < 0.05;
    parts.push(format!("mini halving dSNR {dsnr:.3} dB"));

    ensure(ok, parts.join("; "))
}

// 6. Back-to-back DSM neutrality.
fn dsm_neutrality() -> Outcome {
    let mut cfg = RunConfig::mini_link();
    cfg.scenario.plan = ChannelPlan { first_thz: 193.6, spacing_ghz: 25.0, count: 1 };
    cfg.scenario.settings.symbols_per_channel = 102_400;
    cfg.scenario.transmission = Transmission::BackToBack { snr_db: 15.0 };
    let mut snrs = Vec::new();
    for nsc in [1, 2, 4, 8] {
        let run = simulate(&cfg.scenario, &job(1280, nsc, pcs(8)), 7).map_err(|e| e.to_string())?;
        snrs.push(run.reports[0].snr_db);
    }
    let hi = snrs.iter().cloned().fold(f64::MIN, f64::max);
    let lo = snrs.iter().cloned().fold(f64::MAX, f64::min);
    ensure(
        hi - lo <= 0.2,
        format!(
            "SNR over N_SC 1/2/4/8 = {:?} dB, spread {:.3} dB",
            snrs.iter().map(|s| (s * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            hi - lo
        ),
    )
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

// 7. Desk-scale nonlinear trends on the mini link.
fn nonlinear_trends() -> Outcome {
    let cfg = RunConfig::mini_link();
    let seeds = 1..=5u64;
    let contexts: Vec<WdmContext> = seeds
        .map(|s| WdmContext::new(cfg.scenario.clone(), s))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ctxs: Vec<ChannelContext> = contexts[0].channels().map(|c| c.context().clone()).collect();
    let by_d = |pick: fn(f64, f64) -> bool| {
        ctxs.iter()
            .fold(None::<&ChannelContext>, |best, c| match best {
                Some(b) if !pick(c.dispersion_ps_nm_per_loop.abs(), b.dispersion_ps_nm_per_loop.abs()) => Some(b),
                _ => Some(c),
            })
            .unwrap()
            .channel
    };
    let near_zero = by_d(|a, b| a < b);
    let highest = by_d(|a, b| a > b);

    let snr = |ctx: &WdmContext, j: Job, ch: usize| -> Result<f64, String> {
        Ok(ctx.run(&j).map_err(|e| e.to_string())?[ch - 1].snr_db)
    };
    let (short, long) = (job(20, 2, pcs(8)), job(1280, 2, pcs(8)));
    let mut d_near = Vec::new();
    let mut d_high = Vec::new();
    for ctx in &contexts {
        d_near.push(snr(ctx, short, near_zero)? - snr(ctx, long, near_zero)?);
        d_high.push(snr(ctx, short, highest)? - snr(ctx, long, highest)?);
    }
    let (m_near, s_near) = mean_sd(&d_near);
    let (m_high, _) = mean_sd(&d_high);
    let t = StudentsT::new(0.0, 1.0, (d_near.len() - 1) as f64).unwrap().inverse_cdf(0.975);
    let lower = m_near - t * s_near / (d_near.len() as f64).sqrt();
    let a = lower > 0.0;
    let b = m_high.abs() * 2.0 <= m_near;

    // Adjacent N_SC differ by 0.1-0.2 dB, below the seed-to-seed scatter of
    // 2560-symbol windows, so this check runs 4x longer sequences.
    let mut long_run = cfg.scenario.clone();
    long_run.settings.symbols_per_channel *= 4;
    let mut by_nsc = Vec::new();
    for nsc in [8, 4, 2, 1] {
        let mut v = Vec::new();
        for s in 1..=5u64 {
            let ctx = WdmContext::new(long_run.clone(), s).map_err(|e| e.to_string())?;
            v.push(snr(&ctx, job(1280, nsc, pcs(8)), near_zero)?);
        }
        by_nsc.push(mean_sd(&v).0);
    }
    let c = by_nsc.windows(2).all(|w| w[1] > w[0]);

    let mut d = true;
    let mut ndrs = Vec::new();
    for ch in contexts[0].channels() {
        let opt = optimize_channel(&ch, &cfg.grid, cfg.strategy).map_err(|e| e.to_string())?;
        let bench = benchmark_channel(&ch, cfg.benchmark, &cfg.grid, cfg.strategy)
            .map_err(|e| e.to_string())?;
        d &= opt.ndr_gbps >= bench.ndr_gbps;
        ndrs.push(format!(
            "ch{} {:.1}>={:.1} (n={} N_SC={} {})",
            ch.context().channel,
            opt.ndr_gbps,
            bench.ndr_gbps,
            opt.n,
            opt.subcarriers,
            opt.modulation.map_or("none".into(), |m| m.label())
        ));
    }
    ensure(
        a && b && c && d,
        format!(
            "(a) ch{near_zero} SNR(20)-SNR(1280) mean {m_near:.3} dB, 95% lower bound {lower:.3} [{}]; \
             (b) ch{highest} mean {m_high:.3} dB [{}]; (c) ch{near_zero} SNR by N_SC 8/4/2/1 at 4x length {:?} [{}]; \
             (d) NDR Gb/s {} [{}]; {} runs",
            verdict(a),
            verdict(b),
            by_nsc.iter().map(|s| (s * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            verdict(c),
            ndrs.join(", "),
            verdict(d),
            contexts.iter().map(|c| c.runs()).sum::<usize>()
        ),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

struct Profile {
    ctx: ChannelContext,
    ngmi: Vec<f64>,
    mods: Vec<Modulation>,
}

impl ChannelSim for Profile {
    fn context(&self) -> &ChannelContext {
        &self.ctx
    }

    fn evaluate(&self, job: &Job) -> shapelink::Result<MetricsReport> {
        let i = self.mods.iter().position(|m| *m == job.modulation).unwrap();
        Ok(MetricsReport {
            channel: 1,
            frequency_thz: 193.6,
            n: job.n,
            subcarriers: job.subcarriers,
            symbol_rate_gbd: 78.8 / job.subcarriers as f64,
            modulation: job.modulation,
            power_dbm: 0.0,
            seed: 0,
            snr_db: 10.0,
            snr_db_per_subcarrier: vec![],
            snr_capped: false,
            gmi_bits: 0.0,
            ngmi: self.ngmi[i],
            entropy_bits: 0.0,
            bit_levels: 0,
            noise_variance: vec![],
            data_symbols: 0,
            warnings: vec![],
        })
    }
}

fn one_channel_results(cfg: &RunConfig, grid: &SearchGrid) -> Result<String, String> {
    let ctx = WdmContext::new(cfg.scenario.clone(), cfg.seed).map_err(|e| e.to_string())?;
    let results: Vec<ChannelResult> = ctx
        .channels()
        .map(|ch| optimize_channel(&ch, grid, cfg.strategy))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&results).map_err(|e| e.to_string())
}

// 8. Threshold semantics on every feasibility pattern, then determinism.
fn optimizer_semantics() -> Outcome {
    let alphabet = AmplitudeAlphabet::qam16();
    let mods = SearchGrid::standard(&alphabet).modulations();
    let ctx = ChannelContext {
        channel: 1,
        frequency_thz: 193.6,
        power_dbm: 0.0,
        dispersion_ps_nm_per_loop: 0.0,
        aggregate_rate_gbd: 78.8,
        alphabet,
        rates: RateConfig::default(),
    };
    let threshold = ctx.rates.ngmi_threshold;
    let shaped = mods.len() - 1;
    let mut cases = 0;
    for pattern in 0u32..1 << mods.len() {
        let feasible = |i: usize| pattern >> i & 1 == 1;
        // values at and just below the threshold
        let ngmi: Vec<f64> = (0..mods.len())
            .map(|i| if feasible(i) { threshold } else { threshold - 1e-12 })
            .collect();
        let expect = (1..=shaped)
            .rev()
            .find(|&i| feasible(i))
            .or(feasible(0).then_some(0))
            .map(|i| mods[i]);
        // shaped rates feasible exactly on a prefix
        let monotone = (1..shaped).all(|i| feasible(i) || !feasible(i + 1));
        let sim = Profile { ctx: ctx.clone(), ngmi, mods: mods.clone() };
        for s in [RateSearchStrategy::FullScan, RateSearchStrategy::Bisection, RateSearchStrategy::Descending] {
            if s != RateSearchStrategy::FullScan && !monotone {
                continue;
            }
            let got = rate_search(&sim, 320, 2, &mods, s).map_err(|e| e.to_string())?;
            if got.modulation != expect {
                return Err(format!("pattern {pattern:#b} {s:?}: got {:?}, want {expect:?}", got.modulation));
            }
            cases += 1;
        }
    }

    let mut cfg = RunConfig::mini_link();
    cfg.scenario.transmission = Transmission::BackToBack { snr_db: 13.0 };
    let grid = SearchGrid {
        block_lengths: vec![20, 1280],
        subcarriers: vec![1, 2],
        ..cfg.grid.clone()
    };
    let first = one_channel_results(&cfg, &grid)?;
    let second = one_channel_results(&cfg, &grid)?;
    ensure(
        first == second,
        format!(
            "{cases} stub searches pick the top rate with NGMI >= {threshold}; repeated optimization JSON identical ({} bytes)",
            first.len()
        ),
    )
}

// 9. Paper-scale preset dry run.
fn paper_scale_dry_run() -> Outcome {
    let e = |s: shapelink::Error| s.to_string();
    let cfg = RunConfig::paper_scale();
    cfg.validate().map_err(e)?;
    let f8 = cfg.scenario.plan.frequency_thz(8).map_err(e)?;
    let d8 = dispersion_map(&cfg.scenario.link, f8).net_per_loop_ps_nm;
    let mut probe = cfg.scenario.clone();
    probe.link.spans.truncate(1);
    probe.link.loops = 1;
    probe.settings.symbols_per_channel = 512;
    let run = simulate(&probe, &job(20, 2, Modulation::Qpsk), cfg.seed).map_err(e)?;
    let finite = run.reports.iter().all(|r| r.snr_db.is_finite());
    ensure(
        run.reports.len() == 37 && finite,
        format!(
            "hash {}; Ch#8 {d8:.2} ps/nm/loop; one-span probe of {} channels ok; reference targets for full runs: \
             12.86 vs 12.09 Tb/s, up to 1.1 dB SNR gain (not asserted)",
            cfg.short_hash().map_err(e)?,
            run.reports.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("codec exactness", codec_exactness),
        ("shaping gap", shaping_gap),
        ("dispersion map", dispersion_anchors),
        ("net data rate", ndr_arithmetic),
        ("propagation physics", propagation_physics),
        ("DSM neutrality", dsm_neutrality),
        ("desk-scale nonlinear trends", nonlinear_trends),
        ("optimizer semantics and determinism", optimizer_semantics),
        ("paper-scale dry run", paper_scale_dry_run),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

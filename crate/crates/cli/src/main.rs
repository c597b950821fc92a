//! `shapelink`: shaping-gap tables, dispersion maps, end-to-end runs, sweeps
//! and per-channel rate optimization.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use shapelink::config::{Preset, RunConfig};
use shapelink::fiber::LinkSpec;

#[derive(Parser)]
#[command(name = "shapelink", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Built-in configuration: mini-link, paper-scale or custom.
    #[arg(long, global = true, default_value = "mini-link")]
    preset: Preset,
    /// Full run configuration (TOML); replaces the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Link description (TOML); replaces the configured link.
    #[arg(long, global = true)]
    link: Option<PathBuf>,
    /// Base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of seeds, counting up from the base seed.
    #[arg(long, global = true)]
    repeats: Option<usize>,
    /// Output directory.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Validate, write the resolved configuration and propagate one span at
    /// reduced length instead of running the command.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Shaping gap over the configured block lengths and rates.
    ShapeGap,
    /// Accumulated dispersion per channel.
    DispersionMap {
        /// Channels whose distance profile is written; all when omitted.
        #[arg(long, value_delimiter = ',')]
        channels: Vec<usize>,
    },
    /// One end-to-end run with every channel carrying the same format.
    Simulate {
        #[arg(long, default_value_t = 1280)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        subcarriers: usize,
        /// Shaping rate, or `qpsk`.
        #[arg(long, default_value = "0.8")]
        rate: String,
        /// Total launch power, dBm; defaults to the configured power.
        #[arg(long, allow_negative_numbers = true)]
        power: Option<f64>,
        /// Bypass the link and load white noise at this SNR, dB.
        #[arg(long, allow_negative_numbers = true)]
        b2b_snr: Option<f64>,
        /// FFT bins averaged per PSD point.
        #[arg(long, default_value_t = 16)]
        psd_resolution: usize,
    },
    /// SNR against block length, symbol rate or launch power.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Launch powers, dBm. The power axis defaults to the five dB below
        /// the configured power in 1 dB steps, the others to the grid powers.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        powers: Vec<f64>,
        #[arg(long, default_value = "0.8")]
        rate: String,
    },
    /// Per-channel joint (n, N_SC, R_S) optimization and system totals.
    Optimize {
        /// Channels to optimize; all when omitted.
        #[arg(long, value_delimiter = ',')]
        channels: Vec<usize>,
        /// Launch powers, dBm; defaults to the grid powers.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        powers: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    N,
    RSym,
    P,
}

/// Reads a TOML file over the defaults of its `preset` (or `--preset`), so a
/// file only needs the keys it changes. Keys the config does not know fail.
fn overlay(preset: Preset, text: &str) -> Result<RunConfig> {
    let user: toml::Table = toml::from_str(text)?;
    let preset = match user.get("preset") {
        Some(v) => v.clone().try_into::<Preset>()?,
        None => preset,
    };
    let mut merged = toml::Table::try_from(RunConfig::preset(preset))?;
    merge(&mut merged, &user);
    let cfg: RunConfig = toml::Value::Table(merged).try_into()?;
    let resolved = toml::Table::try_from(&cfg)?;
    if let Some(path) = unknown_key(&user, &resolved, "") {
        anyhow::bail!("invalid configuration at `{path}`: unknown key");
    }
    Ok(cfg)
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn unknown_key(user: &toml::Table, resolved: &toml::Table, prefix: &str) -> Option<String> {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (resolved.get(k), v) {
            (None, _) => return Some(path),
            (Some(toml::Value::Table(r)), toml::Value::Table(u)) => {
                if let Some(p) = unknown_key(u, r, &path) {
                    return Some(p);
                }
            }
            _ => {}
        }
    }
    None
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            overlay(c.preset, &text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::preset(c.preset),
    };
    if let Some(path) = &c.link {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.scenario.link = toml::from_str::<LinkSpec>(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        cfg.preset = Preset::Custom;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.repeats {
        cfg.repeats = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.common.workers {
        if w == 0 {
            anyhow::bail!("invalid configuration at `workers`: must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("starting worker pool")?;
    }
    let cfg = load_config(&cli.common)?;
    let ctx = commands::Ctx::new(cfg, &cli.common.out, cli.common.dry_run);
    match cli.command {
        Command::ShapeGap => commands::shape_gap(&ctx),
        Command::DispersionMap { channels } => commands::dispersion_map(&ctx, &channels),
        Command::Simulate {
            n,
            subcarriers,
            rate,
            power,
            b2b_snr,
            psd_resolution,
        } => commands::simulate(
            &ctx,
            &commands::SimulateArgs {
                n,
                subcarriers,
                rate,
                power,
                b2b_snr,
                psd_resolution,
            },
        ),
        Command::Sweep { axis, powers, rate } => {
            let axis = match axis {
                Axis::N => shapelink::optimizer::SweepAxis::BlockLength,
                Axis::RSym => shapelink::optimizer::SweepAxis::SymbolRate,
                Axis::P => shapelink::optimizer::SweepAxis::Power,
            };
            commands::sweep(&ctx, axis, powers, &rate)
        }
        Command::Optimize { channels, powers } => commands::optimize(&ctx, &channels, powers),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::Parser;
use sisogrand::schedule::ScheduleKind;
use sisogrand::sim::{run_sweep, write_output, Overrides, SimConfig};

/// Monte-Carlo BER and query-count sweep for the iterative product decoder.
///
/// Writes one CSV row per (Eb/N0, iteration). Per-iteration overrides take
/// `i=VALUE` with 1-based SISO iteration numbers and may be repeated.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated Eb/N0 values in dB
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum frames per SNR point
    #[arg(long)]
    frames: Option<u64>,
    /// Stop a point once every iteration has this many frame errors
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in code name or parity-check file
    #[arg(long)]
    code: Option<String>,
    /// Decode noiseless channel outputs
    #[arg(long)]
    noiseless: bool,
    #[arg(long, value_name = "i=KIND", value_parser = parse_entry::<ScheduleKind>)]
    schedule: Vec<(usize, ScheduleKind)>,
    #[arg(long, value_name = "i=N", value_parser = parse_entry::<u64>)]
    qmax: Vec<(usize, u64)>,
    #[arg(long, value_name = "i=N", value_parser = parse_entry::<u64>)]
    qmaxc: Vec<(usize, u64)>,
    #[arg(long, value_name = "i=BOOL", value_parser = parse_entry::<bool>)]
    et: Vec<(usize, bool)>,
}

fn parse_entry<T>(s: &str) -> std::result::Result<(usize, T), String>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    let (i, v) = s.split_once('=').ok_or_else(|| format!("expected i=VALUE, got {s:?}"))?;
    let i = i.trim().parse::<usize>().map_err(|e| format!("iteration {i:?}: {e}"))?;
    let v = v.trim().parse::<T>().map_err(|e| format!("value {v:?}: {e}"))?;
    Ok((i, v))
}

fn main() -> Result<()> {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    let overrides = Overrides {
        code: args.code,
        ebn0_list: args.snr,
        seed: args.seed,
        max_frames: args.frames,
        min_frame_errors: args.min_errors,
        workers: args.workers,
        output_path: args.out,
        noiseless: args.noiseless.then_some(true),
        schedule: args.schedule,
        q_max: args.qmax,
        q_max_c: args.qmaxc,
        et: args.et,
    };
    cfg.apply(&overrides)?;
    cfg.validate().map_err(|e| anyhow!("invalid configuration: {e}"))?;
    let rows = run_sweep(&cfg).context("simulation failed")?;
    write_output(&cfg, &rows)?;
    Ok(())
}

//! Monte-Carlo sweeps over Eb/N0 and CSV output.
//!
//! Frame `f` at SNR index `s` draws its message and noise from a ChaCha
//! stream keyed by `(seed, s, f)`. Frames run in fixed-size batches whose
//! statistics are merged in frame order, so results do not depend on the
//! number of worker threads.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::channel::{modulate, quantize, transmit, transmit_noiseless, NoiseConfig};
use crate::code::{LinearCode, OFEC_NAME};
use crate::error::{Error, Result};
use crate::pipeline::{encode_product, IterationPolicy, IterationStats, IterativeDecoder, PipelineStats};
use crate::schedule::ScheduleKind;
use crate::soft::ScalingProfile;

pub const CSV_HEADER: [&str; 8] = [
    "ebn0_db",
    "iteration",
    "ber",
    "avg_q_main",
    "avg_q_total",
    "competitor_rate",
    "frames",
    "frame_errors",
];

/// Frames simulated between stopping-rule checks.
pub const DEFAULT_BATCH_FRAMES: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuantizerStep {
    Fixed(f64),
    /// A quarter of the mean channel LLR magnitude at each SNR.
    Auto,
}

impl QuantizerStep {
    pub fn resolve(self, noise: &NoiseConfig) -> f64 {
        match self {
            Self::Fixed(s) => s,
            Self::Auto => noise.mean_llr() / 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Built-in code name or path to a parity-check file.
    pub code: String,
    pub ebn0_list: Vec<f64>,
    pub policy: IterationPolicy,
    /// `None` disables channel quantization.
    pub quantizer_step: Option<QuantizerStep>,
    pub max_frames: u64,
    pub min_frame_errors: u64,
    pub seed: u64,
    pub workers: usize,
    pub batch_frames: u64,
    pub noiseless: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            code: OFEC_NAME.to_string(),
            ebn0_list: Vec::new(),
            policy: IterationPolicy::default(),
            quantizer_step: Some(QuantizerStep::Fixed(1.0)),
            max_frames: 100,
            min_frame_errors: 10,
            seed: 0,
            workers: 1,
            batch_frames: DEFAULT_BATCH_FRAMES,
            noiseless: false,
            output_path: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(self, len: usize) -> Vec<T> {
        match self {
            Self::One(v) => vec![v; len],
            Self::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StepSetting {
    Fixed(f64),
    Named(String),
}

/// Flat configuration file. Per-iteration keys take either one value for
/// every SISO iteration or a list.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub code: Option<String>,
    pub ebn0_list: Option<Vec<f64>>,
    pub schedule: Option<OneOrMany<ScheduleKind>>,
    pub q_max: Option<OneOrMany<u64>>,
    pub q_max_c: Option<OneOrMany<u64>>,
    pub et: Option<OneOrMany<bool>>,
    pub alpha: Option<OneOrMany<f64>>,
    pub beta: Option<OneOrMany<f64>>,
    pub gamma: Option<OneOrMany<f64>>,
    pub n_siso: Option<usize>,
    pub n_hiho: Option<usize>,
    pub hiho_max_hw: Option<usize>,
    pub competitor_search: Option<bool>,
    pub nonincreasing_budgets: Option<bool>,
    pub requantize: Option<bool>,
    pub quantizer_step: Option<StepSetting>,
    pub max_frames: Option<u64>,
    pub min_frame_errors: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub batch_frames: Option<u64>,
    pub noiseless: Option<bool>,
    pub output_path: Option<PathBuf>,
}

/// Command-line style overrides applied on top of a configuration file.
/// Per-iteration entries are `(iteration, value)` pairs, 1-based.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub code: Option<String>,
    pub ebn0_list: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub max_frames: Option<u64>,
    pub min_frame_errors: Option<u64>,
    pub workers: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub noiseless: Option<bool>,
    pub schedule: Vec<(usize, ScheduleKind)>,
    pub q_max: Vec<(usize, u64)>,
    pub q_max_c: Vec<(usize, u64)>,
    pub et: Vec<(usize, bool)>,
}

fn set_entries<T: Copy>(target: &mut [T], entries: &[(usize, T)], name: &str) -> Result<()> {
    for &(i, v) in entries {
        if i == 0 || i > target.len() {
            return Err(Error::Config(format!(
                "{name} iteration {i} out of range 1..={}",
                target.len()
            )));
        }
        target[i - 1] = v;
    }
    Ok(())
}

fn expand<T: Clone>(v: Option<OneOrMany<T>>, default: Vec<T>, len: usize) -> Vec<T> {
    v.map_or(default, |x| x.expand(len))
}

impl SimConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let d = Self::default();
        let dp = IterationPolicy::default();
        let n_siso = file.n_siso.unwrap_or(dp.n_siso);
        let ds = ScalingProfile::default();
        let policy = IterationPolicy {
            schedule: expand(file.schedule, dp.schedule, n_siso),
            q_max: expand(file.q_max, dp.q_max, n_siso),
            q_max_c: expand(file.q_max_c, dp.q_max_c, n_siso),
            et_enabled: expand(file.et, dp.et_enabled, n_siso),
            scaling: ScalingProfile {
                alpha: expand(file.alpha, ds.alpha, n_siso),
                beta: expand(file.beta, ds.beta, n_siso),
                gamma: expand(file.gamma, ds.gamma, n_siso),
            },
            n_siso,
            n_hiho: file.n_hiho.unwrap_or(dp.n_hiho),
            hiho_max_hw: file.hiho_max_hw.unwrap_or(dp.hiho_max_hw),
            competitor_search: file.competitor_search.unwrap_or(dp.competitor_search),
            nonincreasing_budgets: file.nonincreasing_budgets.unwrap_or(false),
            requantize_step: None,
        };
        let quantizer_step = match file.quantizer_step {
            None => d.quantizer_step,
            Some(StepSetting::Fixed(s)) => Some(QuantizerStep::Fixed(s)),
            Some(StepSetting::Named(s)) => match s.to_ascii_lowercase().as_str() {
                "auto" => Some(QuantizerStep::Auto),
                "none" | "off" => None,
                _ => return Err(Error::Config(format!("unknown quantizer_step {s:?}"))),
            },
        };
        let mut cfg = Self {
            code: file.code.unwrap_or(d.code),
            ebn0_list: file.ebn0_list.unwrap_or_default(),
            policy,
            quantizer_step,
            max_frames: file.max_frames.unwrap_or(d.max_frames),
            min_frame_errors: file.min_frame_errors.unwrap_or(d.min_frame_errors),
            seed: file.seed.unwrap_or(d.seed),
            workers: file.workers.unwrap_or(d.workers),
            batch_frames: file.batch_frames.unwrap_or(d.batch_frames),
            noiseless: file.noiseless.unwrap_or(false),
            output_path: file.output_path,
        };
        if file.requantize.unwrap_or(false) {
            cfg.policy.requantize_step = match cfg.quantizer_step {
                Some(QuantizerStep::Fixed(s)) => Some(s),
                _ => {
                    return Err(Error::Config(
                        "requantize needs a fixed quantizer_step".into(),
                    ))
                }
            };
        }
        Ok(cfg)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            msg: e.message().to_string(),
        })?;
        Self::from_file(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = &o.code {
            self.code = v.clone();
        }
        if let Some(v) = &o.ebn0_list {
            self.ebn0_list = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.max_frames {
            self.max_frames = v;
        }
        if let Some(v) = o.min_frame_errors {
            self.min_frame_errors = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = &o.output_path {
            self.output_path = Some(v.clone());
        }
        if let Some(v) = o.noiseless {
            self.noiseless = v;
        }
        let p = &mut self.policy;
        set_entries(&mut p.schedule, &o.schedule, "schedule")?;
        set_entries(&mut p.q_max, &o.q_max, "qmax")?;
        set_entries(&mut p.q_max_c, &o.q_max_c, "qmaxc")?;
        set_entries(&mut p.et_enabled, &o.et, "et")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.ebn0_list.is_empty() {
            return Err(Error::Config("ebn0_list is empty".into()));
        }
        if self.ebn0_list.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("ebn0_list must be finite".into()));
        }
        if self.max_frames == 0
            || self.min_frame_errors == 0
            || self.workers == 0
            || self.batch_frames == 0
        {
            return Err(Error::Config(
                "max_frames, min_frame_errors, workers and batch_frames must be positive".into(),
            ));
        }
        if let Some(QuantizerStep::Fixed(s)) = self.quantizer_step {
            if s.is_nan() || s <= 0.0 {
                return Err(Error::Config("quantizer_step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One CSV row: statistics of one iteration at one SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub ebn0_db: f64,
    /// 1-based; SISO iterations first, then HIHO iterations.
    pub iteration: usize,
    pub ber: f64,
    pub avg_q_main: f64,
    pub avg_q_total: f64,
    pub competitor_rate: f64,
    pub frames: u64,
    pub frame_errors: u64,
}

impl ResultRow {
    pub fn from_stats(ebn0_db: f64, iteration: usize, s: &IterationStats) -> Self {
        Self {
            ebn0_db,
            iteration,
            ber: s.ber(),
            avg_q_main: s.avg_q_main(),
            avg_q_total: s.avg_q_total(),
            competitor_rate: s.competitor_rate(),
            frames: s.frames,
            frame_errors: s.frame_errors,
        }
    }
}

/// Statistics of one SNR point, kept for callers that need more than the
/// CSV columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrPoint {
    pub ebn0_db: f64,
    pub stats: PipelineStats,
}

impl SnrPoint {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.stats
            .iterations
            .iter()
            .enumerate()
            .map(|(i, s)| ResultRow::from_stats(self.ebn0_db, i + 1, s))
            .collect()
    }
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn frame_rng(seed: u64, snr_index: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(snr_index as u64 + 1)));
    rng.set_stream(frame);
    rng
}

/// Simulates one frame end to end.
pub fn simulate_frame(
    decoder: &IterativeDecoder,
    cfg: &SimConfig,
    noise: &NoiseConfig,
    snr_index: usize,
    frame: u64,
) -> PipelineStats {
    let code = decoder.code();
    let k = code.k();
    let mut rng = frame_rng(cfg.seed, snr_index, frame);
    let message: Vec<u8> = (0..k * k).map(|_| u8::from(rng.random::<bool>())).collect();
    let mut block = encode_product(&message, code).expect("message length matches");
    let symbols = modulate(&block.bits);
    let mut llrs = if cfg.noiseless {
        transmit_noiseless(&symbols, noise)
    } else {
        transmit(&symbols, noise, &mut rng)
    };
    if let Some(step) = cfg.quantizer_step {
        llrs = quantize(&llrs, step.resolve(noise)).dequantize();
    }
    block.llrs = llrs.into_inner();
    decoder.decode(&block).1
}

/// Runs every SNR point of the sweep.
pub fn run_points(cfg: &SimConfig) -> Result<Vec<SnrPoint>> {
    cfg.validate()?;
    let code = Arc::new(LinearCode::from_name_or_path(&cfg.code)?);
    let decoder = IterativeDecoder::new(code.clone(), cfg.policy.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rate = code.rate() * code.rate();
    let iterations = cfg.policy.total_iterations();
    pool.install(|| {
        cfg.ebn0_list
            .iter()
            .enumerate()
            .map(|(si, &ebn0_db)| {
                let noise = NoiseConfig { ebn0_db, code_rate: rate, seed: cfg.seed };
                let mut stats = PipelineStats::new(iterations);
                let mut done = 0u64;
                while done < cfg.max_frames && !enough_errors(&stats, cfg.min_frame_errors) {
                    let batch = cfg.batch_frames.min(cfg.max_frames - done);
                    let parts: Vec<PipelineStats> = (done..done + batch)
                        .into_par_iter()
                        .map(|f| simulate_frame(&decoder, cfg, &noise, si, f))
                        .collect();
                    for p in &parts {
                        stats.merge(p);
                    }
                    done += batch;
                }
                Ok(SnrPoint { ebn0_db, stats })
            })
            .collect()
    })
}

fn enough_errors(stats: &PipelineStats, min_frame_errors: u64) -> bool {
    stats.iterations.iter().all(|it| it.frame_errors >= min_frame_errors)
}

/// Runs the sweep and returns the CSV rows.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<ResultRow>> {
    Ok(run_points(cfg)?.iter().flat_map(SnrPoint::rows).collect())
}

pub fn emit_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.ebn0_db.to_string(),
            r.iteration.to_string(),
            format!("{:.5e}", r.ber),
            r.avg_q_main.to_string(),
            r.avg_q_total.to_string(),
            r.competitor_rate.to_string(),
            r.frames.to_string(),
            r.frame_errors.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    emit_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let bad = |field: &str| Error::Config(format!("bad CSV field {field:?}"));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let float = |i: usize| f(i).parse::<f64>().map_err(|_| bad(f(i)));
        let int = |i: usize| f(i).parse::<u64>().map_err(|_| bad(f(i)));
        rows.push(ResultRow {
            ebn0_db: float(0)?,
            iteration: int(1)? as usize,
            ber: float(2)?,
            avg_q_main: float(3)?,
            avg_q_total: float(4)?,
            competitor_rate: float(5)?,
            frames: int(6)?,
            frame_errors: int(7)?,
        });
    }
    Ok(rows)
}

/// Writes CSV to `cfg.output_path`, or to stdout when unset.
pub fn write_output(cfg: &SimConfig, rows: &[ResultRow]) -> Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|source| Error::Io { path: path.clone(), source })?;
            emit_csv(rows, file)
        }
        None => emit_csv(rows, std::io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SimConfig {
        SimConfig {
            code: "ext_hamming_32_26".into(),
            ebn0_list: vec![4.0],
            policy: IterationPolicy {
                q_max: vec![64; 3],
                q_max_c: vec![256; 3],
                ..IterationPolicy::default()
            },
            max_frames: 4,
            min_frame_errors: 1000,
            batch_frames: 2,
            ..SimConfig::default()
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(
            csv_string(&[]).unwrap(),
            "ebn0_db,iteration,ber,avg_q_main,avg_q_total,competitor_rate,frames,frame_errors\n"
        );
    }

    #[test]
    fn ber_has_six_significant_digits() {
        let row = ResultRow {
            ebn0_db: 5.5,
            iteration: 1,
            ber: 1.234_567_89e-4,
            avg_q_main: 3.25,
            avg_q_total: 10.0,
            competitor_rate: 0.5,
            frames: 10,
            frame_errors: 2,
        };
        let s = csv_string(&[row]).unwrap();
        assert!(s.lines().nth(1).unwrap().starts_with("5.5,1,1.23457e-4,3.25,10,0.5,10,2"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = run_sweep(&tiny()).unwrap();
        assert_eq!(rows.len(), 5);
        let back = parse_csv(csv_string(&rows).unwrap().as_bytes()).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.iteration, b.iteration);
            assert_eq!(a.avg_q_total, b.avg_q_total);
            assert!((a.ber - b.ber).abs() <= 1e-5 * a.ber.abs());
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = csv_string(&run_sweep(&tiny()).unwrap()).unwrap();
        let b = csv_string(&run_sweep(&tiny()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stops_at_max_frames() {
        let rows = run_sweep(&tiny()).unwrap();
        assert!(rows.iter().all(|r| r.frames == 4));
    }

    #[test]
    fn noiseless_sweep_has_no_errors() {
        let cfg = SimConfig { noiseless: true, max_frames: 1, ..tiny() };
        for r in run_sweep(&cfg).unwrap() {
            assert_eq!(r.ber, 0.0);
            assert_eq!(r.frame_errors, 0);
        }
    }

    #[test]
    fn frame_streams_differ() {
        let a: u64 = frame_rng(1, 0, 0).random();
        let b: u64 = frame_rng(1, 0, 1).random();
        let c: u64 = frame_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, frame_rng(1, 0, 0).random::<u64>());
    }

    #[test]
    fn config_file_parsing() {
        let text = r#"
            code = "ext_hamming_32_26"
            ebn0_list = [4.0, 4.5]
            schedule = ["LWO", "iLWO", "iLWO"]
            q_max = 128
            q_max_c = [512, 512, 256]
            et = true
            quantizer_step = "auto"
            seed = 7
        "#;
        let cfg = SimConfig::parse(text, Path::new("t.toml")).unwrap();
        assert_eq!(cfg.policy.q_max, vec![128; 3]);
        assert_eq!(cfg.policy.q_max_c, vec![512, 512, 256]);
        assert_eq!(cfg.policy.schedule[0], ScheduleKind::Lwo);
        assert_eq!(cfg.quantizer_step, Some(QuantizerStep::Auto));
        assert_eq!(cfg.seed, 7);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_errors() {
        assert!(SimConfig::parse("bogus = 1", Path::new("t.toml")).is_err());
        assert!(SimConfig::parse("quantizer_step = \"big\"", Path::new("t.toml")).is_err());
        let cfg = SimConfig::parse("q_max = 10\nq_max_c = 5\net = false", Path::new("t.toml"))
            .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn overrides_apply_per_iteration() {
        let mut cfg = tiny();
        let o = Overrides {
            schedule: vec![(2, ScheduleKind::Lwo)],
            q_max: vec![(3, 32)],
            et: vec![(1, false)],
            ..Overrides::default()
        };
        cfg.apply(&o).unwrap();
        assert_eq!(cfg.policy.schedule[1], ScheduleKind::Lwo);
        assert_eq!(cfg.policy.q_max[2], 32);
        assert!(!cfg.policy.et_enabled[0]);
        let bad = Overrides { q_max: vec![(4, 1)], ..Overrides::default() };
        assert!(cfg.apply(&bad).is_err());
    }
}

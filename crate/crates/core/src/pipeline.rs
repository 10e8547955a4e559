//! Iterative decoding of a square product code.
//!
//! Every bit of an `n x n` block belongs to one row and one column codeword
//! of the same component code. A SISO iteration is a row pass followed by a
//! column pass; each pass decodes every line with the competitor search and
//! replaces its soft values by the soft output. After the SISO iterations,
//! hard-input GRANDAB passes (rows, then columns) clean up residual errors.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{hard_decision, modulate, quantize, LlrVector};
use crate::code::LinearCode;
use crate::error::{Error, Result};
use crate::grand::{
    candidate_ordering, grandab_decode, orbgrand_decode_with, siso_search_with, DecodeBudget,
    DecodeResult, DecodeStatus,
};
use crate::schedule::{PatternTable, ScheduleKind};
use crate::soft::{delta, extrinsic, metric, soft_output, ScalingProfile};

/// Patterns kept in memory per schedule; larger budgets fall back to lazy
/// generation.
const TABLE_CAP: u64 = 1 << 18;

/// Transmitted block plus its received soft values, both row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBlock {
    pub n: usize,
    pub bits: Vec<u8>,
    /// Channel LLRs; unit-magnitude BPSK symbols straight after encoding.
    pub llrs: Vec<f64>,
}

impl ProductBlock {
    pub fn row(&self, r: usize) -> &[u8] {
        &self.bits[r * self.n..(r + 1) * self.n]
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        column_of(&self.bits, self.n, c)
    }
}

fn column_of<T: Copy>(m: &[T], n: usize, c: usize) -> Vec<T> {
    (0..n).map(|r| m[r * n + c]).collect()
}

/// Encodes a row-major `k x k` message matrix: rows first, then every
/// column (checks on checks). Message bits sit at the code's information
/// positions in both dimensions.
pub fn encode_product(messages: &[u8], code: &LinearCode) -> Result<ProductBlock> {
    let (n, k) = (code.n(), code.k());
    if messages.len() != k * k {
        return Err(Error::LengthMismatch { expected: k * k, actual: messages.len() });
    }
    let info = code.info_positions();
    let mut bits = vec![0u8; n * n];
    for (i, msg_row) in messages.chunks(k).enumerate() {
        let cw = code.encode(msg_row)?;
        bits[info[i] * n..(info[i] + 1) * n].copy_from_slice(&cw);
    }
    for c in 0..n {
        let msg: Vec<u8> = info.iter().map(|&r| bits[r * n + c]).collect();
        let cw = code.encode(&msg)?;
        for (r, &b) in cw.iter().enumerate() {
            bits[r * n + c] = b;
        }
    }
    let llrs = modulate(&bits);
    Ok(ProductBlock { n, bits, llrs })
}

/// Per-iteration schedules, budgets and scaling factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationPolicy {
    pub schedule: Vec<ScheduleKind>,
    pub q_max: Vec<u64>,
    pub q_max_c: Vec<u64>,
    pub et_enabled: Vec<bool>,
    pub scaling: ScalingProfile,
    pub n_siso: usize,
    pub n_hiho: usize,
    pub hiho_max_hw: usize,
    /// When false no competitor is searched and every found candidate gets
    /// the no-competitor extrinsic.
    pub competitor_search: bool,
    /// Require `q_max` and `q_max_c` to be nonincreasing over iterations.
    pub nonincreasing_budgets: bool,
    /// Re-quantize soft values to 4 bits after every half-iteration.
    pub requantize_step: Option<f64>,
}

impl Default for IterationPolicy {
    /// LWO first, iLWO afterwards, ET search with budgets 2^13 / 2^16.
    fn default() -> Self {
        Self {
            schedule: vec![ScheduleKind::Lwo, ScheduleKind::Ilwo, ScheduleKind::Ilwo],
            q_max: vec![1 << 13; 3],
            q_max_c: vec![1 << 16; 3],
            et_enabled: vec![true; 3],
            scaling: ScalingProfile::default(),
            n_siso: 3,
            n_hiho: 2,
            hiho_max_hw: 2,
            competitor_search: true,
            nonincreasing_budgets: false,
            requantize_step: None,
        }
    }
}

impl IterationPolicy {
    /// Same schedule and standard single-budget search at every iteration.
    pub fn uniform_standard(kind: ScheduleKind, q_max: u64) -> Self {
        Self {
            schedule: vec![kind; 3],
            q_max: vec![q_max; 3],
            q_max_c: vec![q_max; 3],
            et_enabled: vec![false; 3],
            ..Self::default()
        }
    }

    pub fn with_schedule(mut self, schedule: &[ScheduleKind]) -> Self {
        self.schedule = schedule.to_vec();
        self
    }

    pub fn budget(&self, iteration: usize) -> DecodeBudget {
        DecodeBudget {
            q_max: self.q_max[iteration],
            q_max_c: self.q_max_c[iteration],
            et_enabled: self.et_enabled[iteration],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_siso;
        for (name, len) in [
            ("schedule", self.schedule.len()),
            ("q_max", self.q_max.len()),
            ("q_max_c", self.q_max_c.len()),
            ("et", self.et_enabled.len()),
        ] {
            if len < n {
                return Err(Error::Config(format!("{name} has {len} entries, need {n}")));
            }
        }
        self.scaling.validate(n)?;
        for i in 0..n {
            self.budget(i)
                .validate()
                .map_err(|e| Error::Config(format!("iteration {i}: {e}")))?;
        }
        if self.nonincreasing_budgets {
            for i in 1..n {
                if self.q_max[i] > self.q_max[i - 1] || self.q_max_c[i] > self.q_max_c[i - 1] {
                    return Err(Error::Config(format!(
                        "budgets must not grow from iteration {} to {i}",
                        i - 1
                    )));
                }
            }
        }
        if let Some(step) = self.requantize_step {
            if step.is_nan() || step <= 0.0 {
                return Err(Error::Config("requantize step must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.n_siso + self.n_hiho
    }
}

/// Counters for one iteration, summed over component decodes and frames.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    pub decodes: u64,
    pub found: u64,
    pub pairs: u64,
    pub abandoned: u64,
    pub q_main_sum: u64,
    pub q_total_sum: u64,
    pub bits: u64,
    pub bit_errors: u64,
    /// Sum over frames of squared per-frame bit-error counts.
    pub bit_errors_sq: u64,
    pub frames: u64,
    pub frame_errors: u64,
}

impl IterationStats {
    fn record(&mut self, r: &DecodeResult) {
        self.decodes += 1;
        self.q_main_sum += r.q_main;
        self.q_total_sum += r.q_total;
        match r.status {
            DecodeStatus::FoundPair => {
                self.found += 1;
                self.pairs += 1;
            }
            DecodeStatus::FoundSingle => self.found += 1,
            DecodeStatus::Abandoned => self.abandoned += 1,
        }
    }

    fn record_frame(&mut self, errors: u64, bits: u64) {
        self.frames += 1;
        self.bits += bits;
        self.bit_errors += errors;
        self.bit_errors_sq += errors * errors;
        self.frame_errors += u64::from(errors > 0);
    }

    pub fn merge(&mut self, other: &Self) {
        self.decodes += other.decodes;
        self.found += other.found;
        self.pairs += other.pairs;
        self.abandoned += other.abandoned;
        self.q_main_sum += other.q_main_sum;
        self.q_total_sum += other.q_total_sum;
        self.bits += other.bits;
        self.bit_errors += other.bit_errors;
        self.bit_errors_sq += other.bit_errors_sq;
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
    }

    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn avg_q_main(&self) -> f64 {
        Self::ratio(self.q_main_sum, self.decodes)
    }

    pub fn avg_q_total(&self) -> f64 {
        Self::ratio(self.q_total_sum, self.decodes)
    }

    /// Fraction of decodes that produced a candidate and a competitor.
    pub fn competitor_rate(&self) -> f64 {
        Self::ratio(self.pairs, self.decodes)
    }

    pub fn ber(&self) -> f64 {
        Self::ratio(self.bit_errors, self.bits)
    }

    /// Standard error of the BER estimate, treating frames as the
    /// independent samples.
    pub fn ber_std_error(&self) -> f64 {
        let f = self.frames as f64;
        if self.frames < 2 {
            return 0.0;
        }
        let per_frame_bits = self.bits as f64 / f;
        let mean = self.bit_errors as f64 / f;
        let var = (self.bit_errors_sq as f64 - f * mean * mean) / (f - 1.0);
        (var.max(0.0) / f).sqrt() / per_frame_bits
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    /// SISO iterations first, then HIHO iterations.
    pub iterations: Vec<IterationStats>,
}

impl PipelineStats {
    pub fn new(iterations: usize) -> Self {
        Self { iterations: vec![IterationStats::default(); iterations] }
    }

    pub fn merge(&mut self, other: &Self) {
        if self.iterations.len() < other.iterations.len() {
            self.iterations.resize(other.iterations.len(), IterationStats::default());
        }
        for (a, b) in self.iterations.iter_mut().zip(&other.iterations) {
            a.merge(b);
        }
    }

    pub fn final_iteration(&self) -> &IterationStats {
        self.iterations.last().expect("no iterations")
    }
}

/// Soft output for an abandoned decode: the input, unchanged.
pub fn handle_abandonment(
    y_in: &[f64],
    result: &DecodeResult,
    _iteration: usize,
    _prof: &ScalingProfile,
) -> LlrVector {
    debug_assert_eq!(result.status, DecodeStatus::Abandoned);
    LlrVector(y_in.to_vec())
}

/// Decoder for one code and policy, with the pattern tables it needs.
#[derive(Clone, Debug)]
pub struct IterativeDecoder {
    code: Arc<LinearCode>,
    policy: IterationPolicy,
    lwo: Option<Arc<PatternTable>>,
    ilwo: Option<Arc<PatternTable>>,
}

impl IterativeDecoder {
    pub fn new(code: Arc<LinearCode>, policy: IterationPolicy) -> Result<Self> {
        policy.validate()?;
        let n = code.n();
        let longest = |kind: ScheduleKind| {
            (0..policy.n_siso)
                .filter(|&i| policy.schedule[i] == kind)
                .map(|i| policy.q_max_c[i].max(policy.q_max[i]))
                .max()
        };
        let cap = if n < 63 { TABLE_CAP.min(1 << n) } else { TABLE_CAP };
        let build = |len: Option<u64>, kind| {
            len.map(|l| Arc::new(PatternTable::new(kind, n, l.min(cap) as usize)))
        };
        let lwo = build(longest(ScheduleKind::Lwo), ScheduleKind::Lwo);
        let ilwo = build(longest(ScheduleKind::Ilwo), ScheduleKind::Ilwo);
        Ok(Self { code, policy, lwo, ilwo })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn policy(&self) -> &IterationPolicy {
        &self.policy
    }

    fn table(&self, kind: ScheduleKind) -> &PatternTable {
        match kind {
            ScheduleKind::Lwo => self.lwo.as_deref(),
            ScheduleKind::Ilwo => self.ilwo.as_deref(),
        }
        .expect("pattern table built for every scheduled kind")
    }

    /// One SISO component decode: returns the new soft line and the raw
    /// decoder result.
    pub fn decode_line(&self, y_in: &[f64], y_channel: &[f64], iteration: usize) -> (Vec<f64>, DecodeResult) {
        let p = &self.policy;
        let table = self.table(p.schedule[iteration]);
        let budget = p.budget(iteration);
        let result = if p.competitor_search {
            candidate_ordering(siso_search_with(y_in, &self.code, table, budget), y_in)
        } else {
            let limit = if budget.et_enabled { budget.q_max } else { budget.q_max_c };
            orbgrand_decode_with(y_in, &self.code, table, limit)
        };
        let out = match (&result.x_hat, &result.x_hat_c) {
            (None, _) => handle_abandonment(y_in, &result, iteration, &p.scaling).into_inner(),
            (Some(x), competitor) => {
                let d = competitor
                    .as_ref()
                    .map_or(0.0, |c| delta(metric(x, y_in), metric(c, y_in)));
                let eps = extrinsic(x, competitor.as_deref(), d, y_in, iteration, &p.scaling);
                soft_output(y_channel, &eps, iteration, &p.scaling).into_inner()
            }
        };
        (out, result)
    }

    /// Decodes a received block; `block.bits` is the reference for error
    /// counting.
    pub fn decode(&self, block: &ProductBlock) -> (Vec<u8>, PipelineStats) {
        let n = block.n;
        assert_eq!(n, self.code.n(), "block size must match the component code");
        assert_eq!(block.llrs.len(), n * n);
        let p = &self.policy;
        let mut stats = PipelineStats::new(p.total_iterations());
        let channel = &block.llrs;
        let mut soft = channel.clone();

        for i in 0..p.n_siso {
            let it = &mut stats.iterations[i];
            // rows
            let rows: Vec<(Vec<f64>, DecodeResult)> = (0..n)
                .into_par_iter()
                .map(|r| {
                    let span = r * n..(r + 1) * n;
                    self.decode_line(&soft[span.clone()], &channel[span], i)
                })
                .collect();
            for (r, (line, res)) in rows.into_iter().enumerate() {
                soft[r * n..(r + 1) * n].copy_from_slice(&line);
                it.record(&res);
            }
            self.maybe_requantize(&mut soft);
            // columns
            let cols: Vec<(Vec<f64>, DecodeResult)> = (0..n)
                .into_par_iter()
                .map(|c| self.decode_line(&column_of(&soft, n, c), &column_of(channel, n, c), i))
                .collect();
            for (c, (line, res)) in cols.into_iter().enumerate() {
                for (r, v) in line.into_iter().enumerate() {
                    soft[r * n + c] = v;
                }
                it.record(&res);
            }
            self.maybe_requantize(&mut soft);
            let errors = count_errors(&hard_decision(&soft), &block.bits);
            it.record_frame(errors, (n * n) as u64);
        }

        let mut hard = hard_decision(&soft);
        for h in 0..p.n_hiho {
            let it = &mut stats.iterations[p.n_siso + h];
            self.hiho_rows(&mut hard, it);
            transpose_in_place(&mut hard, n);
            self.hiho_rows(&mut hard, it);
            transpose_in_place(&mut hard, n);
            it.record_frame(count_errors(&hard, &block.bits), (n * n) as u64);
        }
        (hard, stats)
    }

    fn hiho_rows(&self, hard: &mut [u8], it: &mut IterationStats) {
        let n = self.code.n();
        let results: Vec<DecodeResult> = hard
            .par_chunks(n)
            .map(|row| grandab_decode(row, &self.code, self.policy.hiho_max_hw))
            .collect();
        for (row, res) in hard.chunks_mut(n).zip(results) {
            it.record(&res);
            if let Some(x) = &res.x_hat {
                row.copy_from_slice(x);
            }
        }
    }

    fn maybe_requantize(&self, soft: &mut [f64]) {
        if let Some(step) = self.policy.requantize_step {
            let q = quantize(soft, step).dequantize();
            soft.copy_from_slice(&q);
        }
    }
}

/// Convenience wrapper building an [`IterativeDecoder`] for a single block.
pub fn decode_iterative(
    block: &ProductBlock,
    policy: &IterationPolicy,
    code: &LinearCode,
) -> Result<(Vec<u8>, PipelineStats)> {
    let decoder = IterativeDecoder::new(Arc::new(code.clone()), policy.clone())?;
    Ok(decoder.decode(block))
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn transpose_in_place(m: &mut [u8], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            m.swap(r * n + c, c * n + r);
        }
    }
}

/// Number of rows and of columns that are not codewords.
pub fn unsatisfied_lines(bits: &[u8], code: &LinearCode) -> (usize, usize) {
    let n = code.n();
    let rows = bits.chunks(n).filter(|r| !code.is_codeword(r)).count();
    let cols = (0..n).filter(|&c| !code.is_codeword(&column_of(bits, n, c))).count();
    (rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit, NoiseConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hamming32() -> LinearCode {
        LinearCode::extended_hamming(5).unwrap()
    }

    fn random_block(code: &LinearCode, rng: &mut impl Rng) -> ProductBlock {
        let k = code.k();
        let msg: Vec<u8> = (0..k * k).map(|_| rng.random_range(0..2u8)).collect();
        encode_product(&msg, code).unwrap()
    }

    fn small_policy() -> IterationPolicy {
        IterationPolicy {
            q_max: vec![256; 3],
            q_max_c: vec![1024; 3],
            ..IterationPolicy::default()
        }
    }

    #[test]
    fn zero_message_gives_zero_block() {
        let code = hamming32();
        let b = encode_product(&vec![0; 26 * 26], &code).unwrap();
        assert!(b.bits.iter().all(|&x| x == 0));
        assert!(encode_product(&[0; 10], &code).is_err());
    }

    #[test]
    fn rows_and_columns_are_codewords() {
        for code in [hamming32(), LinearCode::hamming(4).unwrap()] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..10 {
                let b = random_block(&code, &mut rng);
                assert_eq!(unsatisfied_lines(&b.bits, &code), (0, 0));
                let info = code.info_positions();
                let _ = info;
            }
        }
    }

    #[test]
    fn columns_first_encoding_agrees() {
        let code = hamming32();
        let (n, k) = (code.n(), code.k());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let msg: Vec<u8> = (0..k * k).map(|_| rng.random_range(0..2u8)).collect();
        let rows_first = encode_product(&msg, &code).unwrap();
        // encode columns of the message first, then all rows
        let info = code.info_positions();
        let mut bits = vec![0u8; n * n];
        for j in 0..k {
            let col: Vec<u8> = (0..k).map(|i| msg[i * k + j]).collect();
            let cw = code.encode(&col).unwrap();
            for (r, &b) in cw.iter().enumerate() {
                bits[r * n + info[j]] = b;
            }
        }
        for r in 0..n {
            let m: Vec<u8> = info.iter().map(|&c| bits[r * n + c]).collect();
            let cw = code.encode(&m).unwrap();
            bits[r * n..(r + 1) * n].copy_from_slice(&cw);
        }
        assert_eq!(bits, rows_first.bits);
    }

    #[test]
    fn noiseless_block_decodes_in_one_query() {
        let code = hamming32();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut b = random_block(&code, &mut rng);
        b.llrs.iter_mut().for_each(|v| *v *= 6.0);
        let (out, stats) = decode_iterative(&b, &small_policy(), &code).unwrap();
        assert_eq!(out, b.bits);
        let it0 = &stats.iterations[0];
        assert_eq!(it0.avg_q_main(), 1.0);
        assert_eq!(it0.bit_errors, 0);
        assert_eq!(stats.final_iteration().ber(), 0.0);
    }

    #[test]
    fn decode_counts_are_conserved() {
        let code = hamming32();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut b = random_block(&code, &mut rng);
        let cfg = NoiseConfig { ebn0_db: 4.0, code_rate: 0.66, seed: 0 };
        b.llrs = transmit(&b.llrs, &cfg, &mut rng).into_inner();
        let (_, stats) = decode_iterative(&b, &small_policy(), &code).unwrap();
        assert_eq!(stats.iterations.len(), 5);
        for it in &stats.iterations {
            assert_eq!(it.decodes, 2 * 32);
            assert_eq!(it.frames, 1);
            assert!(it.q_main_sum <= it.q_total_sum);
        }
    }

    #[test]
    fn abandonment_is_pass_through() {
        let r = DecodeResult {
            status: DecodeStatus::Abandoned,
            x_hat: None,
            x_hat_c: None,
            q_main: 5,
            q_total: 5,
        };
        let y = [0.5, -1.5, 2.0];
        let out = handle_abandonment(&y, &r, 0, &ScalingProfile::default());
        assert_eq!(&out[..], &y);
        assert_eq!(hard_decision(&out), hard_decision(&y));
    }

    #[test]
    fn abandoned_rows_still_get_column_decodes() {
        // budget of one query: noisy rows are abandoned, columns still run
        let code = hamming32();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = random_block(&code, &mut rng);
        let cfg = NoiseConfig { ebn0_db: 2.0, code_rate: 0.66, seed: 0 };
        b.llrs = transmit(&b.llrs, &cfg, &mut rng).into_inner();
        let policy = IterationPolicy {
            q_max: vec![1; 3],
            q_max_c: vec![1; 3],
            et_enabled: vec![false; 3],
            ..IterationPolicy::default()
        };
        let (_, stats) = decode_iterative(&b, &policy, &code).unwrap();
        assert!(stats.iterations[0].abandoned > 0);
        assert_eq!(stats.iterations[0].decodes, 64);
    }

    #[test]
    fn hiho_row_pass_never_adds_failing_rows() {
        let code = hamming32();
        let dec = IterativeDecoder::new(Arc::new(code.clone()), small_policy()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let b = random_block(&code, &mut rng);
            let mut hard = b.bits.clone();
            for _ in 0..40 {
                let j = rng.random_range(0..hard.len());
                hard[j] ^= 1;
            }
            let before = unsatisfied_lines(&hard, &code).0;
            let mut it = IterationStats::default();
            dec.hiho_rows(&mut hard, &mut it);
            assert!(unsatisfied_lines(&hard, &code).0 <= before);
        }
    }

    #[test]
    fn policy_validation() {
        assert!(IterationPolicy::default().validate().is_ok());
        let mut p = IterationPolicy::default();
        p.q_max.pop();
        assert!(p.validate().is_err());
        let p = IterationPolicy {
            q_max: vec![1 << 13, 1 << 13, 1 << 14],
            nonincreasing_budgets: true,
            ..IterationPolicy::default()
        };
        assert!(p.validate().is_err());
        let p = IterationPolicy {
            q_max: vec![1 << 13, 1 << 13, 1 << 12],
            q_max_c: vec![1 << 16, 1 << 16, 5 << 13],
            nonincreasing_budgets: true,
            ..IterationPolicy::default()
        };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn transpose_roundtrip() {
        let mut m: Vec<u8> = (0..9).collect();
        transpose_in_place(&mut m, 3);
        assert_eq!(m, vec![0, 3, 6, 1, 4, 7, 2, 5, 8]);
    }
}

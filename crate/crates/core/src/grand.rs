//! GRAND-family decoders.
//!
//! Every decoder tests candidate words `HD(y) ^ e` against the code by
//! syndrome. One such test is one *query*. The syndrome of `HD(y)` is
//! computed once and each query XORs the `H` columns of the flipped
//! positions into it, which gives the same answers (and the same query
//! counts) as testing every candidate word from scratch.

use crate::code::{Codeword, LinearCode, SyndromeWord};
use crate::error::{Error, Result};
use crate::schedule::{GeneratorSource, PatternSource, PatternTable, ScheduleKind};
use crate::soft::metric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    /// Both a best candidate and a distinct competitor were found.
    FoundPair,
    FoundSingle,
    Abandoned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    pub x_hat: Option<Codeword>,
    pub x_hat_c: Option<Codeword>,
    /// Queries spent up to and including the one that found `x_hat`.
    pub q_main: u64,
    /// All queries spent.
    pub q_total: u64,
}

impl DecodeResult {
    fn abandoned(queries: u64) -> Self {
        Self {
            status: DecodeStatus::Abandoned,
            x_hat: None,
            x_hat_c: None,
            q_main: queries,
            q_total: queries,
        }
    }
}

/// Query budgets for the competitor search.
///
/// With early termination the search gives up unless `x_hat` shows up
/// within `q_max` queries, and may then continue up to `q_max_c` queries in
/// total. Standard search has a single budget (`q_max == q_max_c`) shared
/// by both phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeBudget {
    pub q_max: u64,
    pub q_max_c: u64,
    pub et_enabled: bool,
}

impl DecodeBudget {
    pub fn standard(q_max: u64) -> Self {
        Self { q_max, q_max_c: q_max, et_enabled: false }
    }

    pub fn early_termination(q_max: u64, q_max_c: u64) -> Self {
        Self { q_max, q_max_c, et_enabled: true }
    }

    pub fn unbounded() -> Self {
        Self::standard(u64::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_max == 0 {
            return Err(Error::Config("q_max must be at least 1".into()));
        }
        if self.q_max_c < self.q_max {
            return Err(Error::Config(format!(
                "q_max_c ({}) must not be below q_max ({})",
                self.q_max_c, self.q_max
            )));
        }
        if !self.et_enabled && self.q_max != self.q_max_c {
            return Err(Error::Config(format!(
                "standard search uses one budget; got q_max {} and q_max_c {}",
                self.q_max, self.q_max_c
            )));
        }
        Ok(())
    }

    fn main_limit(&self) -> u64 {
        if self.et_enabled {
            self.q_max
        } else {
            self.q_max_c
        }
    }
}

/// Reliability order of a soft word.
#[derive(Clone, Debug, PartialEq)]
pub struct SortContext {
    /// `permutation[s]` is the original position of sorted position `s`.
    pub permutation: Vec<usize>,
    pub sorted_magnitudes: Vec<f64>,
}

/// Stable sort of positions by ascending `|y|`.
pub fn sort_reliabilities(y: &[f64]) -> SortContext {
    let mut permutation: Vec<usize> = (0..y.len()).collect();
    permutation.sort_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()));
    let sorted_magnitudes = permutation.iter().map(|&p| y[p].abs()).collect();
    SortContext { permutation, sorted_magnitudes }
}

/// Flips `hard_bits` at the original positions named by a sorted-order pattern.
pub fn apply_pattern(
    hard_bits: &[u8],
    ctx: &SortContext,
    pattern: &crate::schedule::ErrorPattern,
) -> Vec<u8> {
    let mut out = hard_bits.to_vec();
    for &v in pattern.indices() {
        out[ctx.permutation[v]] ^= 1;
    }
    out
}

struct Found {
    pattern: Vec<u16>,
}

struct SearchOutcome {
    first: Option<Found>,
    second: Option<Found>,
    q_main: u64,
    q_total: u64,
}

/// Walks `source`, looking for `x_hat` within `main_limit` queries and, if
/// `total_limit > 0`, for a competitor until `total_limit` queries overall.
fn run_search<S: PatternSource>(
    code: &LinearCode,
    hard: &[u8],
    permutation: &[usize],
    source: &mut S,
    main_limit: u64,
    total_limit: u64,
) -> SearchOutcome {
    let s0 = code.syndrome_word_unchecked(hard);
    let sorted_cols: Vec<SyndromeWord> = permutation.iter().map(|&p| code.column(p)).collect();
    let query = |p: &[u16]| p.iter().fold(s0, |s, &v| s ^ sorted_cols[v as usize]);

    let mut q = 0u64;
    let mut first = None;
    while q < main_limit {
        let Some(p) = source.next_indices() else { break };
        q += 1;
        if query(p) == 0 {
            first = Some(Found { pattern: p.to_vec() });
            break;
        }
    }
    let q_main = q;
    let mut second = None;
    if first.is_some() {
        while q < total_limit {
            let Some(p) = source.next_indices() else { break };
            q += 1;
            if query(p) == 0 {
                second = Some(Found { pattern: p.to_vec() });
                break;
            }
        }
    }
    SearchOutcome { first, second, q_main, q_total: q }
}

fn materialize(hard: &[u8], permutation: &[usize], found: &Found) -> Codeword {
    let mut bits = hard.to_vec();
    for &v in &found.pattern {
        bits[permutation[v as usize]] ^= 1;
    }
    Codeword::new_unchecked(bits)
}

fn into_result(
    code: &LinearCode,
    hard: &[u8],
    permutation: &[usize],
    outcome: SearchOutcome,
) -> DecodeResult {
    let Some(first) = outcome.first else {
        return DecodeResult::abandoned(outcome.q_total);
    };
    let x_hat = materialize(hard, permutation, &first);
    debug_assert!(code.is_codeword(&x_hat));
    let x_hat_c = outcome.second.map(|f| materialize(hard, permutation, &f));
    debug_assert!(x_hat_c.as_ref().is_none_or(|c| code.is_codeword(c) && *c != x_hat));
    DecodeResult {
        status: if x_hat_c.is_some() {
            DecodeStatus::FoundPair
        } else {
            DecodeStatus::FoundSingle
        },
        x_hat: Some(x_hat),
        x_hat_c,
        q_main: outcome.q_main,
        q_total: outcome.q_total,
    }
}

fn check_len(code: &LinearCode, len: usize) {
    assert_eq!(len, code.n(), "input length must equal the code length");
}

/// Hard-input GRAND with abandonment: the unmodified word, then all single
/// flips, all pairs and so on up to `max_hw` flips, each weight class in
/// lexicographic order.
pub fn grandab_decode(hard_bits: &[u8], code: &LinearCode, max_hw: usize) -> DecodeResult {
    check_len(code, hard_bits.len());
    let n = code.n();
    let s0 = code.syndrome_word_unchecked(hard_bits);
    let cols = code.columns();
    let mut q = 0u64;
    let mut combo: Vec<usize> = Vec::with_capacity(max_hw);
    for hw in 0..=max_hw.min(n) {
        combo.clear();
        combo.extend(0..hw);
        loop {
            q += 1;
            let s = combo.iter().fold(s0, |s, &j| s ^ cols[j]);
            if s == 0 {
                let mut bits = hard_bits.to_vec();
                combo.iter().for_each(|&j| bits[j] ^= 1);
                return DecodeResult {
                    status: DecodeStatus::FoundSingle,
                    x_hat: Some(Codeword::new_unchecked(bits)),
                    x_hat_c: None,
                    q_main: q,
                    q_total: q,
                };
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    DecodeResult::abandoned(q)
}

/// Advances a strictly increasing index set to its lexicographic successor.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let h = combo.len();
    let Some(i) = (0..h).rev().find(|&i| combo[i] < n - h + i) else {
        return false;
    };
    combo[i] += 1;
    for j in i + 1..h {
        combo[j] = combo[j - 1] + 1;
    }
    true
}

/// Soft-input hard-output ORBGRAND: stops at the first codeword or after
/// `q_max` queries.
pub fn orbgrand_decode(y: &[f64], code: &LinearCode, kind: ScheduleKind, q_max: u64) -> DecodeResult {
    let mut source = GeneratorSource::new(kind, code.n());
    orbgrand_with_source(y, code, &mut source, q_max)
}

/// [`orbgrand_decode`] over a precomputed table, falling back to lazy
/// generation when `q_max` exceeds the table.
pub fn orbgrand_decode_with(y: &[f64], code: &LinearCode, table: &PatternTable, q_max: u64) -> DecodeResult {
    assert_eq!(table.n(), code.n(), "pattern table built for another length");
    if q_max <= table.len() as u64 {
        orbgrand_with_source(y, code, &mut table.cursor(), q_max)
    } else {
        orbgrand_decode(y, code, table.kind(), q_max)
    }
}

fn orbgrand_with_source<S: PatternSource>(
    y: &[f64],
    code: &LinearCode,
    source: &mut S,
    q_max: u64,
) -> DecodeResult {
    check_len(code, y.len());
    let hard = crate::channel::hard_decision(y);
    let ctx = sort_reliabilities(y);
    let outcome = run_search(code, &hard, &ctx.permutation, source, q_max, 0);
    into_result(code, &hard, &ctx.permutation, outcome)
}

/// Looks for `x_hat` and then for a competitor, the next distinct codeword
/// in schedule order, under `budget`. Results come back in schedule order;
/// see [`candidate_ordering`].
pub fn siso_search(y: &[f64], code: &LinearCode, kind: ScheduleKind, budget: DecodeBudget) -> DecodeResult {
    let mut source = GeneratorSource::new(kind, code.n());
    siso_with_source(y, code, &mut source, budget)
}

/// [`siso_search`] over a precomputed table, falling back to lazy
/// generation when the budget exceeds the table.
pub fn siso_search_with(y: &[f64], code: &LinearCode, table: &PatternTable, budget: DecodeBudget) -> DecodeResult {
    assert_eq!(table.n(), code.n(), "pattern table built for another length");
    if budget.q_max_c.max(budget.q_max) <= table.len() as u64 {
        siso_with_source(y, code, &mut table.cursor(), budget)
    } else {
        siso_search(y, code, table.kind(), budget)
    }
}

fn siso_with_source<S: PatternSource>(
    y: &[f64],
    code: &LinearCode,
    source: &mut S,
    budget: DecodeBudget,
) -> DecodeResult {
    check_len(code, y.len());
    debug_assert!(budget.validate().is_ok(), "invalid budget {budget:?}");
    let hard = crate::channel::hard_decision(y);
    let ctx = sort_reliabilities(y);
    let outcome = run_search(code, &hard, &ctx.permutation, source, budget.main_limit(), budget.q_max_c);
    into_result(code, &hard, &ctx.permutation, outcome)
}

/// Puts the candidate with the smaller distance metric on `y` first, so
/// that the reliability difference computed from the pair is nonnegative.
/// Equal metrics keep the schedule order.
pub fn candidate_ordering(mut result: DecodeResult, y: &[f64]) -> DecodeResult {
    if let (Some(x), Some(c)) = (&result.x_hat, &result.x_hat_c) {
        if metric(x, y) > metric(c, y) {
            std::mem::swap(&mut result.x_hat, &mut result.x_hat_c);
        }
    }
    result
}

//! Error-pattern schedules in logistic-weight order.
//!
//! A pattern is the strictly increasing list `v` of flipped positions in the
//! reliability-sorted word (position 0 is the least reliable bit). Two
//! weights order the patterns:
//!
//! * LW,  `sum (v_i + 1)`
//! * iLW, `sum (i + 1) (v_i + 1)`
//!
//! Patterns of equal weight are emitted by ascending Hamming weight, then
//! lexicographically on `v`. The null pattern always comes first.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    #[serde(rename = "LWO")]
    Lwo,
    #[serde(rename = "iLWO")]
    Ilwo,
}

impl ScheduleKind {
    /// Multiplier of `(v_i + 1)` at rank `i`.
    #[inline]
    fn coefficient(self, rank: usize) -> u64 {
        match self {
            ScheduleKind::Lwo => 1,
            ScheduleKind::Ilwo => rank as u64 + 1,
        }
    }

    /// Smallest weight of any pattern with `hw` flips.
    pub fn min_weight(self, hw: usize) -> u64 {
        (0..hw).map(|i| self.coefficient(i) * (i as u64 + 1)).sum()
    }

    /// Weight of the all-ones pattern, the heaviest one for length `n`.
    pub fn max_weight(self, n: usize) -> u64 {
        self.min_weight(n)
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Lwo => "LWO",
            ScheduleKind::Ilwo => "iLWO",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lwo" => Ok(ScheduleKind::Lwo),
            "ilwo" => Ok(ScheduleKind::Ilwo),
            other => Err(format!("unknown schedule {other:?}, expected LWO or iLWO")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorPattern {
    indices: Vec<usize>,
}

impl ErrorPattern {
    pub fn null() -> Self {
        Self::default()
    }

    /// `None` unless the indices are strictly increasing.
    pub fn new(indices: Vec<usize>) -> Option<Self> {
        indices
            .windows(2)
            .all(|w| w[0] < w[1])
            .then_some(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn hw(&self) -> usize {
        self.indices.len()
    }

    pub fn weight(&self, kind: ScheduleKind) -> u64 {
        weight_of(kind, self.indices.iter().copied())
    }
}

fn weight_of(kind: ScheduleKind, indices: impl Iterator<Item = usize>) -> u64 {
    indices
        .enumerate()
        .map(|(i, v)| kind.coefficient(i) * (v as u64 + 1))
        .sum()
}

pub fn logistic_weight(p: &ErrorPattern) -> u64 {
    p.weight(ScheduleKind::Lwo)
}

pub fn improved_weight(p: &ErrorPattern) -> u64 {
    p.weight(ScheduleKind::Ilwo)
}

/// Every pattern of exact weight `w`, in emission order.
///
/// Depth-first over the ranks with bounds on the cheapest and the most
/// expensive completion of the remaining ranks.
pub fn patterns_for_weight(kind: ScheduleKind, n: usize, w: u64) -> Vec<ErrorPattern> {
    let mut out = Vec::new();
    if w == 0 {
        out.push(ErrorPattern::null());
        return out;
    }
    let mut stack = Vec::new();
    let mut hw = 1;
    while hw <= n && kind.min_weight(hw) <= w {
        fill(kind, n, hw, 0, w, &mut stack, &mut out);
        hw += 1;
    }
    out
}

fn fill(
    kind: ScheduleKind,
    n: usize,
    hw: usize,
    min_v: usize,
    remaining: u64,
    stack: &mut Vec<usize>,
    out: &mut Vec<ErrorPattern>,
) {
    let rank = stack.len();
    let c = kind.coefficient(rank);
    if rank + 1 == hw {
        if remaining.is_multiple_of(c) {
            let v = (remaining / c) as usize;
            if v > min_v && v <= n {
                let mut indices = stack.clone();
                indices.push(v - 1);
                out.push(ErrorPattern { indices });
            }
        }
        return;
    }
    // ranks rank+1..hw at their largest admissible values
    let max_rest: u64 = (rank + 1..hw)
        .map(|j| kind.coefficient(j) * (n - hw + j + 1) as u64)
        .sum();
    for v in min_v..=n - (hw - rank) {
        let cheapest: u64 = (rank..hw)
            .map(|j| kind.coefficient(j) * (v + (j - rank) + 1) as u64)
            .sum();
        if cheapest > remaining {
            break;
        }
        if c * (v as u64 + 1) + max_rest < remaining {
            continue;
        }
        stack.push(v);
        fill(kind, n, hw, v + 1, remaining - c * (v as u64 + 1), stack, out);
        stack.pop();
    }
}

/// Lazy pattern stream; materializes one weight level at a time.
#[derive(Clone, Debug)]
pub struct PatternGenerator {
    kind: ScheduleKind,
    n: usize,
    current_weight: u64,
    level: VecDeque<ErrorPattern>,
    emitted: u64,
    exhausted: bool,
}

impl PatternGenerator {
    pub fn new(kind: ScheduleKind, n: usize) -> Self {
        Self {
            kind,
            n,
            current_weight: 0,
            level: VecDeque::from([ErrorPattern::null()]),
            emitted: 0,
            exhausted: false,
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Weight of the level currently being emitted.
    pub fn current_weight(&self) -> u64 {
        self.current_weight
    }
}

impl Iterator for PatternGenerator {
    type Item = ErrorPattern;

    fn next(&mut self) -> Option<ErrorPattern> {
        while self.level.is_empty() {
            if self.exhausted || self.current_weight >= self.kind.max_weight(self.n) {
                self.exhausted = true;
                return None;
            }
            self.current_weight += 1;
            self.level = patterns_for_weight(self.kind, self.n, self.current_weight).into();
        }
        self.emitted += 1;
        self.level.pop_front()
    }
}

/// A stream of patterns as borrowed index slices.
pub trait PatternSource {
    fn next_indices(&mut self) -> Option<&[u16]>;
}

/// Adapts a [`PatternGenerator`] to [`PatternSource`].
pub struct GeneratorSource {
    generator: PatternGenerator,
    buf: Vec<u16>,
}

impl GeneratorSource {
    pub fn new(kind: ScheduleKind, n: usize) -> Self {
        assert!(n <= u16::MAX as usize + 1, "code too long for u16 indices");
        Self {
            generator: PatternGenerator::new(kind, n),
            buf: Vec::new(),
        }
    }
}

impl PatternSource for GeneratorSource {
    fn next_indices(&mut self) -> Option<&[u16]> {
        let p = self.generator.next()?;
        self.buf.clear();
        self.buf.extend(p.indices().iter().map(|&v| v as u16));
        Some(&self.buf)
    }
}

/// The first `len` patterns of a schedule, stored flat. Immutable once
/// built, so one table can serve any number of concurrent decoders.
#[derive(Clone, Debug)]
pub struct PatternTable {
    kind: ScheduleKind,
    n: usize,
    offsets: Vec<u32>,
    indices: Vec<u16>,
}

impl PatternTable {
    pub fn new(kind: ScheduleKind, n: usize, len: usize) -> Self {
        assert!(n <= u16::MAX as usize + 1, "code too long for u16 indices");
        let mut offsets = Vec::with_capacity(len + 1);
        let mut indices = Vec::new();
        offsets.push(0u32);
        for p in PatternGenerator::new(kind, n).take(len) {
            indices.extend(p.indices().iter().map(|&v| v as u16));
            offsets.push(indices.len() as u32);
        }
        Self { kind, n, offsets, indices }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[u16] {
        &self.indices[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn cursor(&self) -> TableCursor<'_> {
        TableCursor { table: self, next: 0 }
    }
}

pub struct TableCursor<'a> {
    table: &'a PatternTable,
    next: usize,
}

impl PatternSource for TableCursor<'_> {
    #[inline]
    fn next_indices(&mut self) -> Option<&[u16]> {
        if self.next >= self.table.len() {
            return None;
        }
        let i = self.next;
        self.next += 1;
        Some(self.table.get(i))
    }
}

//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use sisogrand::code::LinearCode;
use sisogrand::schedule::ScheduleKind;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Pattern weight computed from scratch: LWO sums `v + 1`, iLWO sums
/// `(i + 1)(v + 1)` over the sorted indices `v` at rank `i`.
pub fn weight_of(kind: ScheduleKind, idx: &[usize]) -> u64 {
    idx.iter()
        .enumerate()
        .map(|(i, &v)| match kind {
            ScheduleKind::Lwo => v as u64 + 1,
            ScheduleKind::Ilwo => (i as u64 + 1) * (v as u64 + 1),
        })
        .sum()
}

/// Every subset of `0..n`, ordered by weight, then Hamming weight, then
/// lexicographically by index list.
pub fn all_subsets_sorted(kind: ScheduleKind, n: usize) -> Vec<Vec<usize>> {
    assert!(n <= 20);
    let mut all: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&b| mask >> b & 1 == 1).collect())
        .collect();
    all.sort_by(|a, b| {
        (weight_of(kind, a), a.len(), a).cmp(&(weight_of(kind, b), b.len(), b))
    });
    all
}

/// Every codeword, from sums of generator rows.
pub fn codebook(code: &LinearCode) -> HashSet<Vec<u8>> {
    let g = code.generator_matrix();
    let k = g.len();
    assert!(k <= 20);
    (0u32..1 << k)
        .map(|m| {
            let mut w = vec![0u8; code.n()];
            for (r, row) in g.iter().enumerate() {
                if m >> r & 1 == 1 {
                    w.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
                }
            }
            w
        })
        .collect()
}

/// Positions from least to most reliable, ties by position.
pub fn reliability_order(y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| {
        y[a].abs().partial_cmp(&y[b].abs()).unwrap().then(a.cmp(&b))
    });
    order
}

/// The first `count` distinct codewords met when flipping the hard
/// decision of `y` by each subset in `order`, with the query index at
/// which each was found (1-based).
pub fn first_codewords(
    y: &[f64],
    order: &[Vec<usize>],
    book: &HashSet<Vec<u8>>,
    count: usize,
) -> Vec<(Vec<u8>, u64)> {
    let hard: Vec<u8> = y.iter().map(|&v| u8::from(v < 0.0)).collect();
    let rel = reliability_order(y);
    let mut found: Vec<(Vec<u8>, u64)> = Vec::new();
    for (q, subset) in order.iter().enumerate() {
        let mut w = hard.clone();
        for &v in subset {
            w[rel[v]] ^= 1;
        }
        if book.contains(&w) && found.iter().all(|(c, _)| *c != w) {
            found.push((w, q as u64 + 1));
            if found.len() == count {
                break;
            }
        }
    }
    found
}

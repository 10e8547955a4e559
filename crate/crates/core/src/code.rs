//! Binary linear block codes.
//!
//! A [`LinearCode`] keeps its parity-check matrix as given, derives a
//! systematic generator by Gaussian elimination, and caches every column of
//! `H` as a packed syndrome word so that codebook queries reduce to XORs.
//!
//! The OFEC component code is the double-error-correcting BCH(255,239) code
//! with generator 0x18DED over GF(2^8)/0x171, extended by an overall parity
//! bit. Message bits sit at positions `0..239`, BCH parity at `239..255` and
//! the overall parity bit at 255.

use std::ops::Deref;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gf::BinaryPolynomial;

/// Packed syndrome: bit `r` is row `r` of `H·x^T`.
pub type SyndromeWord = u128;

/// Largest supported redundancy `n - k` (one syndrome word).
pub const MAX_REDUNDANCY: usize = SyndromeWord::BITS as usize;

pub const OFEC_GENERATOR: u64 = 0x18DED;

pub const OFEC_NAME: &str = "ofec_bch_256_239";
pub const EXT_HAMMING_32_26_NAME: &str = "ext_hamming_32_26";
pub const HAMMING_15_11_NAME: &str = "hamming_15_11";

/// A word that satisfies every parity check of the code it came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword(Vec<u8>);

impl Codeword {
    pub(crate) fn new_unchecked(bits: Vec<u8>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for Codeword {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Clone, Debug)]
enum Encoder {
    Matrix,
    /// Cyclic code shortened to nothing, extended by one parity bit.
    ExtendedCyclic { generator_low_bits: u32, degree: usize },
}

#[derive(Clone, Debug)]
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    generator: Vec<Vec<u8>>,
    parity_check: Vec<Vec<u8>>,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    columns: Vec<SyndromeWord>,
    encoder: Encoder,
}

impl LinearCode {
    /// Builds a code from an `(n-k) x n` parity-check matrix.
    ///
    /// `H` is reduced right to left, so when its last `n-k` columns are
    /// independent the message occupies positions `0..k`.
    pub fn from_parity_check(name: &str, n: usize, k: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidCode(format!("need 0 < k < n, got n={n} k={k}")));
        }
        let m = n - k;
        if m > MAX_REDUNDANCY {
            return Err(Error::InvalidCode(format!(
                "redundancy {m} exceeds the supported maximum of {MAX_REDUNDANCY}"
            )));
        }
        if rows.len() != m {
            return Err(Error::InvalidCode(format!(
                "expected {m} parity-check rows, got {}",
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: row.len() });
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::InvalidCode("matrix entries must be 0 or 1".into()));
            }
        }

        let mut reduced = rows.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(m);
        for col in (0..n).rev() {
            let rank = pivots.len();
            if rank == m {
                break;
            }
            let Some(found) = (rank..m).find(|&r| reduced[r][col] == 1) else {
                continue;
            };
            reduced.swap(rank, found);
            let pivot_row = reduced[rank].clone();
            for (r, row) in reduced.iter_mut().enumerate() {
                if r != rank && row[col] == 1 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push((rank, col));
        }
        if pivots.len() < m {
            return Err(Error::RankDeficient { rank: pivots.len(), expected: m });
        }

        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&(_, c)| is_pivot[c] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut parity_positions: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        parity_positions.sort_unstable();

        let generator = info_positions
            .iter()
            .map(|&c| {
                let mut g = vec![0u8; n];
                g[c] = 1;
                for &(r, p) in &pivots {
                    g[p] = reduced[r][c];
                }
                g
            })
            .collect();

        let columns = (0..n)
            .map(|c| {
                rows.iter()
                    .enumerate()
                    .fold(0, |acc, (r, row)| acc | (SyndromeWord::from(row[c]) << r))
            })
            .collect();

        Ok(Self {
            name: name.to_string(),
            n,
            k,
            generator,
            parity_check: rows,
            info_positions,
            parity_positions,
            columns,
            encoder: Encoder::Matrix,
        })
    }

    /// The extended BCH(256,239) OFEC component code.
    pub fn ofec_component() -> Result<Self> {
        Self::extended_bch(OFEC_NAME, OFEC_GENERATOR, 255)
    }

    /// Extended cyclic code of length `cyclic_len + 1` from a generator
    /// polynomial written most-significant-bit first.
    pub fn extended_bch(name: &str, generator: u64, cyclic_len: usize) -> Result<Self> {
        let g = BinaryPolynomial::from_msb_word(generator);
        let r = g
            .degree()
            .filter(|&d| d > 0 && d < cyclic_len && d < 32)
            .ok_or_else(|| Error::InvalidCode(format!("unusable generator {generator:#x}")))?;
        if !BinaryPolynomial::binomial(cyclic_len, 0).rem(&g).is_zero() {
            return Err(Error::GeneratorNotDivisor { n: cyclic_len });
        }
        let n = cyclic_len + 1;
        let k = cyclic_len - r;

        // Position p carries the coefficient of x^(cyclic_len - 1 - p); its
        // H column is x^(cyclic_len - 1 - p) mod g. Row index r - 1 - d keeps
        // the parity block as an identity.
        let mut rows = vec![vec![0u8; n]; r + 1];
        for p in 0..cyclic_len {
            let mut mono = vec![0u8; cyclic_len - p];
            mono[cyclic_len - 1 - p] = 1;
            let rem = BinaryPolynomial::from_coefficients(mono).rem(&g);
            for d in 0..r {
                rows[r - 1 - d][p] = rem.coefficient(d);
            }
        }
        // Overall parity, reduced against the BCH rows so H = [A | I].
        let mut parity = vec![1u8; n];
        for row in rows.iter().take(r) {
            parity.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
        }
        rows[r] = parity;

        let mut code = Self::from_parity_check(name, n, k, rows)?;
        debug_assert_eq!(code.info_positions, (0..k).collect::<Vec<_>>());
        let generator_low_bits = (generator & ((1u64 << r) - 1)) as u32;
        code.encoder = Encoder::ExtendedCyclic { generator_low_bits, degree: r };
        Ok(code)
    }

    /// Hamming (2^m - 1, 2^m - 1 - m) code, parity positions last.
    pub fn hamming(m: usize) -> Result<Self> {
        let n = (1usize << m) - 1;
        let columns = hamming_columns(m);
        let rows = (0..m)
            .map(|r| columns.iter().map(|&c| ((c >> r) & 1) as u8).collect())
            .collect();
        Self::from_parity_check(&format!("hamming_{}_{}", n, n - m), n, n - m, rows)
    }

    /// Hamming code extended by an overall parity bit (minimum distance 4).
    pub fn extended_hamming(m: usize) -> Result<Self> {
        let n = 1usize << m;
        let columns = hamming_columns(m);
        let mut rows: Vec<Vec<u8>> = (0..m)
            .map(|r| {
                let mut row: Vec<u8> = columns.iter().map(|&c| ((c >> r) & 1) as u8).collect();
                row.push(0);
                row
            })
            .collect();
        rows.push(vec![1u8; n]);
        Self::from_parity_check(&format!("ext_hamming_{}_{}", n, n - 1 - m), n, n - 1 - m, rows)
    }

    /// Looks up one of the built-in codes by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            OFEC_NAME => Self::ofec_component(),
            EXT_HAMMING_32_26_NAME => Self::extended_hamming(5),
            HAMMING_15_11_NAME => Self::hamming(4),
            other => Err(Error::InvalidCode(format!("unknown built-in code {other:?}"))),
        }
    }

    /// Built-in name or path to a parity-check file.
    pub fn from_name_or_path(name_or_path: &str) -> Result<Self> {
        match Self::builtin(name_or_path) {
            Ok(code) => Ok(code),
            Err(_) if Path::new(name_or_path).exists() => load_code_from_file(name_or_path),
            Err(e) => Err(e),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator_matrix(&self) -> &[Vec<u8>] {
        &self.generator
    }

    pub fn parity_check_matrix(&self) -> &[Vec<u8>] {
        &self.parity_check
    }

    /// Codeword positions carrying message bits, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Pivot columns of the reduced `H`, ascending.
    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    /// Permutation from systematic order `[message | parity]` to positions.
    pub fn systematic_permutation(&self) -> Vec<usize> {
        self.info_positions
            .iter()
            .chain(&self.parity_positions)
            .copied()
            .collect()
    }

    /// `H` column `j` as a packed syndrome word.
    pub fn column(&self, j: usize) -> SyndromeWord {
        self.columns[j]
    }

    pub fn columns(&self) -> &[SyndromeWord] {
        &self.columns
    }

    pub fn encode(&self, message: &[u8]) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, actual: message.len() });
        }
        let bits = match self.encoder {
            Encoder::Matrix => self.matrix_encode(message),
            Encoder::ExtendedCyclic { generator_low_bits, degree } => {
                lfsr_encode(message, generator_low_bits, degree)
            }
        };
        Ok(Codeword(bits))
    }

    /// `u·G` over GF(2), independent of any polynomial encoder.
    pub fn encode_with_matrix(&self, message: &[u8]) -> Result<Codeword> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, actual: message.len() });
        }
        Ok(Codeword(self.matrix_encode(message)))
    }

    fn matrix_encode(&self, message: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; self.n];
        for (row, _) in self.generator.iter().zip(message).filter(|(_, &m)| m == 1) {
            out.iter_mut().zip(row).for_each(|(o, g)| *o ^= g);
        }
        out
    }

    pub fn syndrome_word(&self, bits: &[u8]) -> Result<SyndromeWord> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: bits.len() });
        }
        Ok(self.syndrome_word_unchecked(bits))
    }

    pub(crate) fn syndrome_word_unchecked(&self, bits: &[u8]) -> SyndromeWord {
        bits.iter()
            .zip(&self.columns)
            .filter(|(&b, _)| b == 1)
            .fold(0, |acc, (_, &c)| acc ^ c)
    }

    /// `H·bits^T` as `n - k` bits.
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        let s = self.syndrome_word(bits)?;
        Ok((0..self.n - self.k).map(|r| ((s >> r) & 1) as u8).collect())
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.syndrome_word_unchecked(bits) == 0
    }

    /// Wraps `bits` as a [`Codeword`] if every check is satisfied.
    pub fn checked_codeword(&self, bits: Vec<u8>) -> Option<Codeword> {
        self.is_codeword(&bits).then_some(Codeword(bits))
    }

    /// Message bits of a codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

/// Nonzero m-bit columns with the weight-1 columns moved to the end.
fn hamming_columns(m: usize) -> Vec<u32> {
    let (mut unit, mut rest): (Vec<u32>, Vec<u32>) =
        (1u32..(1 << m)).partition(|c| c.count_ones() == 1);
    unit.sort_unstable_by(|a, b| b.cmp(a));
    rest.extend(unit);
    rest
}

fn lfsr_encode(message: &[u8], generator_low_bits: u32, degree: usize) -> Vec<u8> {
    let top = 1u32 << (degree - 1);
    let mut reg = 0u32;
    for &bit in message {
        let feedback = (bit as u32) ^ u32::from(reg & top != 0);
        reg = (reg << 1) & ((top << 1) - 1);
        if feedback == 1 {
            reg ^= generator_low_bits;
        }
    }
    let mut out = Vec::with_capacity(message.len() + degree + 1);
    out.extend_from_slice(message);
    out.extend((0..degree).rev().map(|d| ((reg >> d) & 1) as u8));
    let parity = out.iter().fold(0u8, |acc, &b| acc ^ b);
    out.push(parity);
    out
}

/// Parses the parity-check text format: a header line `n k`, then `n - k`
/// lines of `n` characters from `{0, 1}`.
pub fn parse_parity_check(name: &str, text: &str, origin: &Path) -> Result<LinearCode> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(hline, format!("bad header: {e}")))?;
    let [n, k] = dims[..] else {
        return Err(parse_err(hline, "header must be \"n k\"".into()));
    };
    if k >= n {
        return Err(parse_err(hline, format!("need k < n, got n={n} k={k}")));
    }
    let mut rows = Vec::with_capacity(n - k);
    for (lineno, line) in lines {
        if rows.len() == n - k {
            if line.is_empty() {
                continue;
            }
            return Err(parse_err(lineno, format!("more than {} matrix rows", n - k)));
        }
        if line.chars().count() != n {
            return Err(parse_err(
                lineno,
                format!("row has {} entries, expected {n}", line.chars().count()),
            ));
        }
        let row = line
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(parse_err(lineno, format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    if rows.len() != n - k {
        return Err(parse_err(
            text.lines().count(),
            format!("expected {} matrix rows, found {}", n - k, rows.len()),
        ));
    }
    LinearCode::from_parity_check(name, n, k, rows)
}

pub fn load_code_from_file(path: impl AsRef<Path>) -> Result<LinearCode> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("code");
    parse_parity_check(name, &text, path)
}

/// Renders a code's `H` in the parity-check text format.
pub fn format_parity_check(code: &LinearCode) -> String {
    let mut out = format!("{} {}\n", code.n(), code.k());
    for row in code.parity_check_matrix() {
        out.extend(row.iter().map(|&b| if b == 1 { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

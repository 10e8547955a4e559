//! GF(2^8) arithmetic and binary polynomials.
//!
//! The field is built from a degree-8 primitive polynomial, with `x` (0x02)
//! as the generator. Binary polynomials are kept as coefficient vectors,
//! lowest degree first.

use std::fmt;

/// Field polynomial x^8 + x^6 + x^5 + x^4 + 1 used by the OFEC component code.
pub const OFEC_FIELD_POLY: u16 = 0x171;

/// GF(2^8) with log/antilog tables.
#[derive(Clone)]
pub struct GaloisField256 {
    field_polynomial: u16,
    log: [u8; 256],
    antilog: [u8; 255],
}

impl GaloisField256 {
    /// Builds the field tables from a 9-bit primitive polynomial.
    ///
    /// Panics if the polynomial is not of degree 8 or `x` does not generate
    /// the full multiplicative group.
    pub fn new(field_polynomial: u16) -> Self {
        assert!(
            field_polynomial >> 8 == 1,
            "field polynomial must have degree 8"
        );
        let mut log = [0u8; 256];
        let mut antilog = [0u8; 255];
        let mut value: u16 = 1;
        for (exp, slot) in antilog.iter_mut().enumerate() {
            *slot = value as u8;
            log[value as usize] = exp as u8;
            value <<= 1;
            if value & 0x100 != 0 {
                value ^= field_polynomial;
            }
            assert!(
                value != 1 || exp == 254,
                "field polynomial {field_polynomial:#x} is not primitive"
            );
        }
        Self {
            field_polynomial,
            log,
            antilog,
        }
    }

    pub fn ofec() -> Self {
        Self::new(OFEC_FIELD_POLY)
    }

    pub fn field_polynomial(&self) -> u16 {
        self.field_polynomial
    }

    /// Discrete logarithm base `x`. `a` must be nonzero.
    pub fn log(&self, a: u8) -> u8 {
        debug_assert!(a != 0, "log of zero");
        self.log[a as usize]
    }

    /// `x^e`, with the exponent taken mod 255.
    pub fn exp(&self, e: usize) -> u8 {
        self.antilog[e % 255]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.antilog[e % 255]
    }

    pub fn pow(&self, a: u8, e: usize) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        self.antilog[(self.log[a as usize] as usize * e) % 255]
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse");
        self.antilog[(255 - self.log[a as usize] as usize) % 255]
    }

    /// Evaluates a binary polynomial at a field element (Horner).
    pub fn eval(&self, poly: &BinaryPolynomial, at: u8) -> u8 {
        poly.coefficients
            .iter()
            .rev()
            .fold(0u8, |acc, &c| self.mul(acc, at) ^ c)
    }
}

impl fmt::Debug for GaloisField256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField256")
            .field("field_polynomial", &format_args!("{:#x}", self.field_polynomial))
            .finish()
    }
}

/// Polynomial over GF(2), coefficients lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BinaryPolynomial {
    coefficients: Vec<u8>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coefficients(mut coefficients: Vec<u8>) -> Self {
        assert!(coefficients.iter().all(|&c| c <= 1), "coefficients must be bits");
        while coefficients.last() == Some(&0) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    /// Reads a hex constant with the most significant bit as the highest degree,
    /// e.g. 0x18DED = x^16 + x^15 + x^11 + ... + 1.
    pub fn from_msb_word(word: u64) -> Self {
        let coefficients = (0..64).map(|i| ((word >> i) & 1) as u8).collect();
        Self::from_coefficients(coefficients)
    }

    /// x^a + x^b (or 0 when a == b).
    pub fn binomial(a: usize, b: usize) -> Self {
        let mut c = vec![0u8; a.max(b) + 1];
        c[a] ^= 1;
        c[b] ^= 1;
        Self::from_coefficients(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn coefficients(&self) -> &[u8] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize) -> u8 {
        self.coefficients.get(i).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        let c = (0..len)
            .map(|i| self.coefficient(i) ^ other.coefficient(i))
            .collect();
        Self::from_coefficients(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0u8; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, &a) in self.coefficients.iter().enumerate() {
            if a == 1 {
                for (j, &b) in other.coefficients.iter().enumerate() {
                    c[i + j] ^= b;
                }
            }
        }
        Self::from_coefficients(c)
    }

    /// Remainder of long division by `divisor`.
    pub fn rem(&self, divisor: &Self) -> Self {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut r = self.coefficients.clone();
        while r.len() > dd {
            let top = r.len() - 1;
            if r[top] == 1 {
                let shift = top - dd;
                for (j, &b) in divisor.coefficients.iter().enumerate() {
                    r[shift + j] ^= b;
                }
            }
            r.pop();
        }
        Self::from_coefficients(r)
    }
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c == 1)
            .map(|(i, _)| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

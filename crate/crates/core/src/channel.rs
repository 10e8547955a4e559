//! BPSK over AWGN, LLR computation, 4-bit quantization and hard decisions.
//!
//! Bit 0 maps to +1 and bit 1 to -1, so a positive LLR favours 0.

use std::ops::{Deref, DerefMut};

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Smallest and largest code of the 4-bit two's-complement quantizer.
pub const QUANT_MIN: i8 = -8;
pub const QUANT_MAX: i8 = 7;

/// Per-bit log-likelihood ratios (natural log).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LlrVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LlrVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for LlrVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedLlrVector {
    pub values: Vec<i8>,
    pub step: f64,
}

impl QuantizedLlrVector {
    /// Reconstruction `q * step`.
    pub fn dequantize(&self) -> LlrVector {
        LlrVector(self.values.iter().map(|&q| q as f64 * self.step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub ebn0_db: f64,
    pub code_rate: f64,
    pub seed: u64,
}

impl NoiseConfig {
    /// Noise variance per real dimension for unit-energy BPSK.
    pub fn sigma2(&self) -> f64 {
        assert!(
            self.code_rate > 0.0 && self.code_rate <= 1.0,
            "code rate must lie in (0, 1]"
        );
        1.0 / (2.0 * self.code_rate * 10f64.powf(self.ebn0_db / 10.0))
    }

    /// Mean channel LLR magnitude, `2 / sigma^2`.
    pub fn mean_llr(&self) -> f64 {
        2.0 / self.sigma2()
    }
}

pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
}

/// Adds N(0, sigma^2) noise and converts to LLRs `2 (s + n) / sigma^2`.
pub fn transmit<R: Rng + ?Sized>(symbols: &[f64], cfg: &NoiseConfig, rng: &mut R) -> LlrVector {
    let sigma2 = cfg.sigma2();
    let noise = Normal::new(0.0, sigma2.sqrt()).expect("finite sigma");
    LlrVector(
        symbols
            .iter()
            .map(|&s| 2.0 * (s + noise.sample(rng)) / sigma2)
            .collect(),
    )
}

/// Noiseless reception: `2 s / sigma^2`.
pub fn transmit_noiseless(symbols: &[f64], cfg: &NoiseConfig) -> LlrVector {
    let scale = 2.0 / cfg.sigma2();
    LlrVector(symbols.iter().map(|&s| scale * s).collect())
}

/// Uniform mid-tread quantizer, rounding half away from zero, saturating
/// at the 4-bit range.
pub fn quantize(y: &[f64], step: f64) -> QuantizedLlrVector {
    assert!(step > 0.0, "quantizer step must be positive");
    let values = y
        .iter()
        .map(|&v| (v / step).round().clamp(QUANT_MIN as f64, QUANT_MAX as f64) as i8)
        .collect();
    QuantizedLlrVector { values, step }
}

/// 0 for nonnegative LLRs, 1 for negative ones.
pub fn hard_decision(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| u8::from(v < 0.0)).collect()
}

/// Standard normal upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Uncoded BPSK bit error probability at the given Eb/N0 and code rate.
pub fn raw_ber(cfg: &NoiseConfig) -> f64 {
    q_function((1.0 / cfg.sigma2()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn modulate_maps_zero_to_plus_one() {
        assert_eq!(modulate(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        assert!(modulate(&[0; 8]).iter().all(|&s| s == 1.0));
        let bits = vec![1, 0, 0, 1, 1];
        assert_eq!(hard_decision(&modulate(&bits)), bits);
    }

    #[test]
    fn hard_decision_examples() {
        assert_eq!(hard_decision(&[3.2, -0.1, 0.0, -0.0]), vec![0, 1, 0, 0]);
    }

    #[test]
    fn quantize_examples() {
        let step = 0.75;
        assert_eq!(quantize(&[0.0], step).values, vec![0]);
        assert_eq!(quantize(&[100.0 * step], step).values, vec![7]);
        assert_eq!(quantize(&[-100.0 * step], step).values, vec![-8]);
        assert_eq!(quantize(&[-1.4 * step], step).values, vec![-1]);
        assert_eq!(quantize(&[2.5 * step, -2.5 * step], 1.0 * step).values, vec![3, -3]);
    }

    #[test]
    fn transmit_is_seed_deterministic() {
        let cfg = NoiseConfig { ebn0_db: 4.0, code_rate: 0.5, seed: 9 };
        let s = modulate(&[0, 1, 1, 0, 1, 0, 0, 0]);
        let a = transmit(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        let b = transmit(&s, &cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        assert_eq!(a, b);
        let bits_a: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u64> = b.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }

    #[test]
    fn high_snr_sign_matches_symbol() {
        let cfg = NoiseConfig { ebn0_db: 60.0, code_rate: 1.0, seed: 0 };
        let bits: Vec<u8> = (0..500).map(|i| (i % 3 == 0) as u8).collect();
        let y = transmit(&modulate(&bits), &cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(hard_decision(&y), bits);
        assert_eq!(hard_decision(&transmit_noiseless(&modulate(&bits), &cfg)), bits);
    }

    #[test]
    fn llr_mean_matches_closed_form() {
        let cfg = NoiseConfig { ebn0_db: 6.0, code_rate: 0.87, seed: 0 };
        let n = 100_000;
        let y = transmit(&vec![1.0; n], &cfg, &mut ChaCha8Rng::seed_from_u64(2024));
        let mean = y.iter().sum::<f64>() / n as f64;
        // LLR std is 2 / sigma
        let se = 2.0 / cfg.sigma2().sqrt() / (n as f64).sqrt();
        assert!((mean - cfg.mean_llr()).abs() < 3.0 * se, "mean {mean} vs {}", cfg.mean_llr());
    }

    #[test]
    fn q_function_reference_values() {
        // Q(1) and Q(3) from tables
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(q_function(1.0), 0.158_655_253_931_457_05) < 1e-9);
        assert!(rel(q_function(3.0), 1.349_898_031_630_094_6e-3) < 1e-9);
        assert_eq!(q_function(0.0), 0.5);
    }

    #[test]
    fn raw_ber_matches_monte_carlo() {
        let cfg = NoiseConfig { ebn0_db: 3.0, code_rate: 0.8, seed: 0 };
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let y = transmit(&vec![1.0; n], &cfg, &mut rng);
        let errors = y.iter().filter(|&&v| v < 0.0).count() as f64;
        let p = raw_ber(&cfg);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((errors / n as f64 - p).abs() < 3.0 * se);
    }

    proptest! {
        #[test]
        fn quantization_error_bounded(v in -50.0f64..50.0, step in 0.05f64..4.0) {
            let q = quantize(&[v], step);
            prop_assert!((QUANT_MIN..=QUANT_MAX).contains(&q.values[0]));
            let clamped = v.clamp(QUANT_MIN as f64 * step, QUANT_MAX as f64 * step);
            prop_assert!((q.dequantize()[0] - clamped).abs() <= step / 2.0 + 1e-12);
        }
    }
}

//! Soft output from a candidate/competitor pair.
//!
//! With `y_in` the soft input of iteration `i` and `y` the channel LLRs:
//!
//! ```text
//! M      = 2 * sum |y_in_j|  over j where x_j != HD(y_in)_j
//! delta  = (M_c - M) / 2
//! eps_j  = gamma_i * delta * (1 - 2 x_j)        competitor agrees at j
//!        = delta * (1 - 2 x_j) - y_in_j         competitor differs at j
//!        = beta_i * (1 - 2 x_j)                 no competitor
//! out_j  = y_j + alpha_i * eps_j
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::LlrVector;
use crate::error::{Error, Result};

/// Per-iteration scaling factors.
///
/// The defaults are placeholders in the usual turbo-product style ramp;
/// tune them per code and operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingProfile {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for ScalingProfile {
    fn default() -> Self {
        Self {
            alpha: vec![0.3, 0.5, 0.7],
            beta: vec![0.2, 0.4, 0.6],
            gamma: vec![0.5, 0.5, 0.5],
        }
    }
}

impl ScalingProfile {
    pub fn validate(&self, iterations: usize) -> Result<()> {
        for (name, v) in [("alpha", &self.alpha), ("beta", &self.beta), ("gamma", &self.gamma)] {
            if v.len() < iterations {
                return Err(Error::Config(format!(
                    "{name} has {} entries, need {iterations}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Multiplies every beta by `factor`, e.g. to express it in LLR units.
    pub fn with_beta_scaled(mut self, factor: f64) -> Self {
        self.beta.iter_mut().for_each(|b| *b *= factor);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtrinsicVector(pub Vec<f64>);

impl std::ops::Deref for ExtrinsicVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[inline]
fn sign_of_bit(b: u8) -> f64 {
    1.0 - 2.0 * b as f64
}

/// Distance metric between a candidate and the hard decision of `y_in`.
pub fn metric(candidate: &[u8], y_in: &[f64]) -> f64 {
    assert_eq!(candidate.len(), y_in.len());
    2.0 * candidate
        .iter()
        .zip(y_in)
        .filter(|(&x, &y)| x != u8::from(y < 0.0))
        .map(|(_, y)| y.abs())
        .sum::<f64>()
}

pub fn delta(m: f64, m_c: f64) -> f64 {
    (m_c - m) / 2.0
}

pub fn extrinsic(
    x_hat: &[u8],
    x_hat_c: Option<&[u8]>,
    d: f64,
    y_in: &[f64],
    iteration: usize,
    prof: &ScalingProfile,
) -> ExtrinsicVector {
    assert_eq!(x_hat.len(), y_in.len());
    let values = match x_hat_c {
        Some(c) => {
            assert_eq!(c.len(), x_hat.len());
            let gamma = prof.gamma[iteration];
            x_hat
                .iter()
                .zip(c)
                .zip(y_in)
                .map(|((&x, &xc), &y)| {
                    if x == xc {
                        gamma * d * sign_of_bit(x)
                    } else {
                        d * sign_of_bit(x) - y
                    }
                })
                .collect()
        }
        None => {
            let beta = prof.beta[iteration];
            x_hat.iter().map(|&x| beta * sign_of_bit(x)).collect()
        }
    };
    ExtrinsicVector(values)
}

/// Channel LLRs plus scaled extrinsic information.
pub fn soft_output(
    y_channel: &[f64],
    eps: &ExtrinsicVector,
    iteration: usize,
    prof: &ScalingProfile,
) -> LlrVector {
    assert_eq!(y_channel.len(), eps.len());
    let alpha = prof.alpha[iteration];
    LlrVector(y_channel.iter().zip(eps.iter()).map(|(y, e)| y + alpha * e).collect())
}

//! Soft-output GRAND decoding of product codes.
//!
//! The building blocks are a binary linear component code ([`code`]), a
//! BPSK/AWGN channel ([`channel`]), ordered error-pattern schedules
//! ([`schedule`]), GRAND decoders with a competitor search ([`grand`]), and
//! the soft-output rule ([`soft`]). [`pipeline`] turns these into an
//! iterative product decoder and [`sim`] drives Monte-Carlo sweeps.

pub mod channel;
pub mod code;
pub mod error;
pub mod gf;
pub mod grand;
pub mod pipeline;
pub mod schedule;
pub mod sim;
pub mod soft;

pub use code::{Codeword, LinearCode, SyndromeWord};
pub use error::{Error, Result};
pub use grand::{DecodeBudget, DecodeResult, DecodeStatus};
pub use pipeline::{IterationPolicy, IterativeDecoder, PipelineStats, ProductBlock};
pub use schedule::{ErrorPattern, ScheduleKind};
pub use soft::ScalingProfile;

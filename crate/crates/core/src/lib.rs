//! Link adaptation for a cooperative-ARQ relay channel with adaptive
//! modulation and coding.
//!
//! The crate models a source, a relay and a destination over independent
//! Rayleigh links. Each node picks a modulation mode from the instantaneous
//! SNR; when the destination drops a packet the relay retransmits it. The
//! library computes spectral efficiency and average power in closed form,
//! optimizes the switching thresholds, power control and target-PER split,
//! and checks the analysis with a packet-level Monte Carlo simulator.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod amc;
pub mod channel;
pub mod config;
pub mod constpower;
pub mod error;
pub mod numeric;
pub mod perf;
pub mod report;
pub mod sim;
pub mod units;

pub use amc::{hiperlan2, AmcMode, AmcModeTable};
pub use channel::{Link, LinkModel, ThresholdVector};
pub use error::{Error, Result};
pub use perf::{AdaptationPolicy, OmegaVariant, PerformanceReport, PowerControl, Scenario};

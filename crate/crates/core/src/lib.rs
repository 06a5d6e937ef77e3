//! Monte Carlo simulator and analysis toolkit for multi-stream opportunistic
//! network decoupling (MS-OND) in the multi-antenna K×N×K relay channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: small dense complex matrices, Haar unitaries, subspace splits.
//! - [`channel`]: network configuration and block-fading channel draws.
//! - [`selection`]: beamforming setup, scheduling metrics and the timer-based
//!   relay-set selection.
//! - [`transmission`]: hop SINRs, the zero-forcing equalizer, rates and a
//!   symbol-level slot simulator.
//! - [`analysis`]: metric CDFs, order-statistic bounds and estimators.
//! - [`experiment`] and [`config`]: the seeded parallel sweep driver, canned
//!   experiments and their configuration.

pub mod analysis;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod selection;
pub mod transmission;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

//! Throughput, expected-rate and ergodic capacity of block Rayleigh fading
//! multiple-antenna channels, with Monte Carlo oracles for every closed
//! form.
//!
//! All rates are in nats.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod channel;
pub mod dist_antenna;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod rates_mimo;
pub mod rates_miso;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

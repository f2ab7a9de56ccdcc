//! One-shot single-bit coding over noisy classical channels.
//!
//! Computes the optimal probability of transmitting one uniformly random bit
//! through a single use of a finite channel, without assistance, with
//! non-signaling assistance, and with low-dimensional entanglement
//! assistance, together with the certificates that back each value:
//! Chebyshev centers, dual lower bounds, witness encoder pairs, and exact
//! protocol simulations.

pub mod assist;
pub mod channels;
pub mod cli;
pub mod error;
pub mod hermitian;
pub mod correlations;
pub mod lp;
pub mod protocol;
pub mod radius;

pub use error::{Error, Result};

//! Simulation and pulse-sequence compilation for a three-spin Ising chain.
//!
//! The crate builds pulse programs that realize trilinear propagators
//! `exp(−i·2πκ·I1z I2z I3z)` and the indirect SWAP(1,3) gate, turns them into
//! offset-robust variants, and propagates them exactly on an 8×8 Hilbert
//! space. See the `trispin` binary for table and curve generation.

pub mod broadband;
pub mod cli;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod pulseprog;
pub mod sequences;
pub mod spinsys;

pub use error::{Error, Result};

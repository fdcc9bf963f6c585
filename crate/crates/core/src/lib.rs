//! Simulation and verification toolkit for a single-qubit remote-state-preparation
//! protocol over a shared two-qubit resource, together with the coherence witness
//! that certifies the preparation from local populations alone.
//!
//! Layout:
//! - [`qmat`]: validated states, unitaries, and small-matrix helpers
//! - [`optics`]: Jones matrices for the waveplate realization of the protocol
//! - [`protocol`]: the preparation itself, operational and closed form
//! - [`witness`]: witness, payoff, enhancement, verdicts, geometric discord
//! - [`noise`]: the noisy singlet family and payoff surfaces
//! - [`harness`]: sampling, tables, and the command-level entry points

pub mod error;
pub mod harness;
pub mod noise;
pub mod optics;
pub mod protocol;
pub mod qmat;
pub mod witness;

pub use error::{Error, Result};

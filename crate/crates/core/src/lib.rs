//! Gateway control and Hamiltonian tomography for spin networks.
//!
//! The crate decides whether a network is controllable from a small
//! accessible gateway (graph infection plus dynamical Lie-algebra closure),
//! simulates gateway measurement records and reconstructs every coupling and
//! field from them, lifts spectral degeneracies with gateway-supported
//! perturbations, and synthesizes gateway pulses for swap gates on free-fermion
//! chains.

pub mod control;
pub mod degeneracy;
pub mod error;
pub mod infection;
pub mod lie;
pub mod linalg;
pub mod network;
pub mod pauli;
pub mod tomography;

pub use error::{Error, Refusal, Result};

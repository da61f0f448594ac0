//! Simulation and analysis toolkit for microwave-controlled Rydberg polaritons.
//!
//! The modules follow the experimental pipeline: blockade and interaction
//! scales ([`units`]), Rydberg level structure ([`structure`]), collective
//! Dicke rotations ([`collective`]), interacting-polariton Hamiltonians and
//! their dynamics ([`interactions`]), the stochastic store/retrieve protocol
//! with photon-correlation analysis ([`protocol`]) and least-squares model
//! fitting ([`fitting`]).

pub mod collective;
pub mod error;
pub mod fitting;
pub mod interactions;
pub mod protocol;
pub mod rng;
pub mod structure;
pub mod units;

pub use error::{Error, Result};

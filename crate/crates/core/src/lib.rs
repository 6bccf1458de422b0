//! Simulation and analysis toolkit for traffic-flow-secure quantum routing.
//!
//! Nodes exchange photonic packets on a shared clock. Besides payload (Type 1)
//! slots, every node pair runs secret message-integrity decoys (Type 2,
//! BB84-style) and path-integrity decoys (Type 3, a photon split between the
//! sender's enclave and the link). An eavesdropper who reads propagation
//! modes destroys Type 3 interference; one who reads payloads disturbs
//! Type 2 outcomes.
//!
//! Modules:
//! - [`quantum`], [`channel`], [`adversary`], [`protocol`], [`simulation`]:
//!   the Monte-Carlo protocol simulator.
//! - [`security`]: closed-form disturbance, entropy and leaked-fraction curves.
//! - [`overhead`]: overhead accounting and escape probabilities.
//! - [`constraints`]: matrix-level checks on eavesdropper unitaries.

// range checks are written as `!(lo <= x)` on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod channel;
pub mod constraints;
pub mod error;
pub mod overhead;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod security;
pub mod simulation;

pub use error::{Error, Result};

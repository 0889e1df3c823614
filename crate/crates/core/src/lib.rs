//! Sequential auditing of approximate differential privacy by betting.
//!
//! The auditor consumes paired output streams of a black-box mechanism run on
//! two neighboring datasets and accumulates betting wealth against the null
//! hypothesis that the mechanism satisfies a claimed (ε, δ) guarantee. The
//! null is phrased through the kernel MMD: an (ε, δ)-DP mechanism keeps the
//! MMD between the two output distributions below a closed-form threshold
//! τ(ε, δ), so observing wealth above 1/α refutes the claim with anytime
//! Type-I error at most α (Ville's inequality).
//!
//! Crate layout:
//!
//! - [`kernel`]: RBF kernel, median-heuristic bandwidth, cross-kernel blocks.
//! - [`bounds`]: privacy parameters, MMD thresholds, Hockey-Stick oracle.
//! - [`learners`]: Online Newton Step (betting fraction), kernelized online
//!   gradient ascent (witness function), log-wealth maximization.
//! - [`seq_test`]: the two sequential engines (supermartingale and
//!   e-process), audit driver, and multi-ε lower-bound sweeper.
//! - [`mechanisms`]: benchmark mean mechanisms, canary streams, and the
//!   synthetic stream families.
//! - [`rng`]: splittable, counter-based randomness shared by all samplers.
//!
//! The crate is `no_std`-compatible (`alloc` required); the default `std`
//! feature only selects the platform math intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod kernel;
pub mod learners;
pub mod mechanisms;
pub mod rng;

mod math;

pub use error::{Error, Result};

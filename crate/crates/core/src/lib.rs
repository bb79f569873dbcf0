//! Simulation and certification of multistage photonic entanglement swapping.
//!
//! The crate builds chains of polarization-entangled photon pairs, joins
//! neighbouring pairs with post-selected Bell-state measurements, and checks
//! the resulting end-to-end pair with an entanglement witness, the Wootters
//! concurrence and two-qubit tomography. The [`experiment`] module runs
//! Monte Carlo coincidence counting on top of the exact model.

pub mod analysis;
mod error;
pub mod experiment;
pub mod hilbert;
pub mod noise;
pub mod protocol;
pub mod rng;
pub mod states;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/swapping.md")]
    mod swapping {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

//! Numerics for discriminating one incoherent point source from two
//! half-brightness sources.
//!
//! The crate is `no_std` (with `alloc`). It covers point-spread functions and
//! their overlap functions, the single-sample outcome statistics of the
//! binary SPADE and SLIVER receivers, classical and quantum Chernoff
//! exponents, truncated Fock-space density matrices with Helstrom error
//! probabilities, and seeded Monte Carlo receivers.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chernoff;
pub mod error;
pub mod montecarlo;
pub mod optimize;
pub mod psf;
pub mod quad;
pub mod scenario;
pub mod special;
pub mod states;

pub use error::{Error, Result};
pub use psf::{PsfFamily, PsfModel};
pub use scenario::{
    DerivedParams, DetectionScenario, Hypothesis, MeasurementKind, Outcome, OutcomeDistribution,
    Priors,
};

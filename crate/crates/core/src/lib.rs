//! Simulate quantum information transfer between two coupled subsystems.
//!
//! A small subsystem A, maximally entangled with an inert reference copy,
//! decays into a large subsystem B through product-operator interaction
//! pathways. The crate computes the exact unitary dynamics side by side
//! with first-order perturbation theory: decay probabilities, subsystem
//! entropies, mutual-information transfer, decay-time sweeps against the
//! coupling strength, and the additivity of rates over pathways.
//!
//! - [`quantum`]: dense complex linear algebra and state primitives.
//! - [`model`]: composite systems with fixed spectra and Haar-random
//!   eigenbases, plus JSON model configs.
//! - [`perturb`]: first-order amplitudes, golden-rule rates, and the
//!   closed-form two-level entropy model.
//! - [`experiment`]: time series, decay times, coupling sweeps, fits.
//! - [`io`]: CSV and metadata files.

pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod perturb;
pub mod quantum;

pub use error::{Error, Result};

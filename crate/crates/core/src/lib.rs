//! Quantum state diffusion for the driven, damped double-well Duffing
//! oscillator.
//!
//! The crate integrates single stochastic pure-state trajectories in a
//! truncated, moving Fock basis ([`qsd`]), checks ensembles of them against a
//! dense master-equation integrator ([`lindblad`]), integrates the classical
//! Duffing equation as a reference ([`classical`]) and turns trajectories into
//! Poincaré sections, low-frequency spectra and interwell-event lists
//! ([`diagnostics`]). [`runner`] ties these together behind presets and
//! deterministic, checksummed CSV output.

pub mod classical;
pub mod diagnostics;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod model;
pub mod qsd;
pub mod runner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

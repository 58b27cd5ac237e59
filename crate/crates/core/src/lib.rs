//! Narrow-band photon pairs from four-wave mixing in a cold double-Λ atomic
//! ensemble with electromagnetically induced transparency.
//!
//! The pipeline is
//! `medium` (susceptibilities, wave numbers, characteristic scales) →
//! `phasematch` (Δk and the longitudinal detuning function Φ) →
//! `biphoton` (κΦ spectrum, ψ(τ), G2, rates, histograms) →
//! `regimes` (closed-form limits, classification, comparison).
//!
//! All frequencies are angular (rad/s) detunings unless a name says otherwise.

pub mod biphoton;
pub mod error;
pub mod grid;
pub mod medium;
pub mod phasematch;
pub mod regimes;

pub use error::{Error, Result};
pub use grid::{ComplexSpectrum, OmegaGrid, TauGrid, Waveform};
pub use medium::{DriveParams, Geometry, MediumParams, SPEED_OF_LIGHT};

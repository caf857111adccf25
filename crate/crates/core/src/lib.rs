//! Sampled-time models of a cryogenic SNSPD readout and feed-forward chain.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical
//! models: waveforms and linear filtering, detector pulse generation,
//! amplifier and laser-link stages, the Schmitt-trigger discriminator logic,
//! the electro-optic modulator, and the experiment scenarios that tie them
//! together. File formats and the command line live in the `cryochain` crate.

#![no_std]

extern crate alloc;

pub mod analog;
pub mod error;
pub mod experiments;
pub mod modulator;
pub mod rng;
pub mod signal;
pub mod snspd;
pub mod trigger;

pub use error::{Error, Result};
pub use signal::Waveform;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

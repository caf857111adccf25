//! Linear amplifier stages, stage cascades, and the laser-diode optical
//! readout link.
//!
//! Stages are scalar frequency-response envelopes: a first-order high-pass
//! at `f_low` cascaded with a first-order low-pass at `f_high`, scaled by the
//! midband gain. Reflection and isolation are carried as metadata only.

mod chain;
mod jitter;
mod laser;
mod stage;

pub use chain::{cascade, Chain};
pub use jitter::{readout_jitter, JitterEstimate, JitterSetup, ReadoutKind};
pub use laser::{transduce_optical, LaserLink, OpticalReadout};
pub use stage::{apply_linear_stage, colored_noise, first_stage, BandPassStage, PowerMode};

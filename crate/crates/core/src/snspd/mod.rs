//! Phenomenological SNSPD models.
//!
//! A detection produces a double-exponential voltage pulse across the load.
//! The rise time constant shrinks with the number of simultaneously absorbed
//! photons (`n` hotspots in series), which is what makes the edge slopes
//! carry photon-number information. The multiplexed array wires several
//! pixels in parallel so the summed amplitude counts fired pixels.

mod array;
pub(crate) mod detection;
mod model;

pub use array::{array_event, array_event_with, array_waveform, MultiplexedArray};
pub use detection::{count_detections, sample_detections, DetectionEvent, PhotonSource};
pub use model::{pulse_waveform, BiasPoint, SnspdModel};

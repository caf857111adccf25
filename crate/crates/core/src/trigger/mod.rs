//! Schmitt-trigger discrimination, gate-level selection logic, and the
//! modulator driver.

mod digital;
mod discriminator;
mod driver;
mod gates;
mod schmitt;

pub use digital::{DigitalWaveform, Level};
pub use discriminator::{
    digital_path_delay, window_discriminator, window_logic, window_network, GateSet, TriggerPair, WindowSignals,
};
pub use driver::{modulator_driver, ModulatorDriver};
pub use gates::{gate_eval, GateKind, GateModel};
pub use schmitt::{
    effective_threshold, trigger_response, trigger_response_noisy, SchmittTrigger, DEFAULT_FEEDBACK_RESISTANCE,
    MIN_SAMPLES_PER_TAU,
};

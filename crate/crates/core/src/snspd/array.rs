use alloc::vec::Vec;
use rand::Rng;

use super::{DetectionEvent, SnspdModel};
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;
use crate::signal::{sample_count, Waveform};

/// Pixels wired in parallel: the summed pulse height counts fired pixels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MultiplexedArray {
    pub n_pixels: u32,
    /// Detector-referred peak of one pixel's pulse (V).
    pub unit_amplitude: f64,
    /// Probability that a firing pixel triggers a given idle pixel.
    pub crosstalk_prob: f64,
    /// Probability that one extra pixel fires late.
    pub switch_over_prob: f64,
    /// Delay of the late pixel (s).
    pub switch_over_delay: f64,
}

impl Default for MultiplexedArray {
    fn default() -> Self {
        Self {
            n_pixels: 4,
            // gives ~25 mV per pixel behind three high-power first stages
            unit_amplitude: 28.4e-6,
            crosstalk_prob: 0.13,
            switch_over_prob: 0.01,
            switch_over_delay: 2e-9,
        }
    }
}

impl MultiplexedArray {
    pub fn validate(&self) -> Result<()> {
        if self.n_pixels < 1 {
            return Err(invalid!("array.n_pixels must be at least 1"));
        }
        for (name, p) in [
            ("crosstalk_prob", self.crosstalk_prob),
            ("switch_over_prob", self.switch_over_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid!("array.{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.unit_amplitude > 0.0) {
            return Err(invalid!("array.unit_amplitude must be positive"));
        }
        if !(self.switch_over_delay >= 0.0) {
            return Err(invalid!("array.switch_over_delay must be non-negative"));
        }
        Ok(())
    }
}

/// Fires the array for `n_incident` photons using `rng`.
///
/// Photons land on uniformly chosen pixels; every hit pixel fires. Each
/// firing pixel then recruits each idle pixel with `crosstalk_prob`
/// (one round). With `switch_over_prob`, one further idle pixel fires late
/// and the event is flagged. Returns `None` when nothing fires.
pub fn array_event_with<R: Rng + ?Sized>(
    array: &MultiplexedArray,
    n_incident: u32,
    rng: &mut R,
) -> Option<DetectionEvent> {
    if n_incident == 0 {
        return None;
    }
    let n = array.n_pixels as usize;
    let mut fired: Vec<bool> = alloc::vec![false; n];
    for _ in 0..n_incident {
        fired[rng.random_range(0..n)] = true;
    }
    let primary = fired.iter().filter(|&&f| f).count();
    for f in fired.iter_mut().filter(|f| !**f) {
        for _ in 0..primary {
            if rng.random::<f64>() < array.crosstalk_prob {
                *f = true;
                break;
            }
        }
    }
    let mut count = fired.iter().filter(|&&f| f).count() as u32;
    let mut switch_over = false;
    if rng.random::<f64>() < array.switch_over_prob && (count as usize) < n {
        switch_over = true;
        count += 1;
    }
    Some(DetectionEvent {
        t0: 0.0,
        n_photons: n_incident,
        pixel_count: count,
        switch_over,
    })
}

/// Seeded form of [`array_event_with`]; the event has `t0 = 0`.
pub fn array_event(array: &MultiplexedArray, n_incident: u32, seed: u64) -> Result<Option<DetectionEvent>> {
    array.validate()?;
    Ok(array_event_with(array, n_incident, &mut rng_from_seed(seed)))
}

/// Detector-level waveform of an array event: one single-photon pulse of
/// peak `unit_amplitude` per prompt pixel at `event.t0`, plus one delayed by
/// `switch_over_delay` for a switch-over event.
pub fn array_waveform(
    array: &MultiplexedArray,
    event: &DetectionEvent,
    model: &SnspdModel,
    duration: f64,
    sample_rate: f64,
) -> Result<Waveform> {
    if event.pixel_count == 0 {
        return Err(invalid!("array waveform needs at least one fired pixel"));
    }
    array.validate()?;
    model.validate()?;
    let mut w = Waveform::from_samples(sample_rate, 0.0, alloc::vec![0.0; sample_count(duration, sample_rate)])?;
    let scale = array.unit_amplitude / model.peak_voltage(1);
    let prompt = event.pixel_count - event.switch_over as u32;
    model.add_pulse(&mut w, 1, event.t0, scale * prompt as f64);
    if event.switch_over {
        model.add_pulse(&mut w, 1, event.t0 + array.switch_over_delay, scale);
    }
    Ok(w)
}

use super::stage::colored_noise;
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;
use crate::signal::filter::{cascade_process, Section};
use crate::signal::Waveform;

/// Cryogenic laser diode driven by the amplified detector signal, a fibre
/// to a room-temperature photodiode, and a low-pass readout filter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LaserLink {
    /// Diode bias current (A).
    pub bias_current: f64,
    /// Lasing threshold current (A).
    pub threshold_current: f64,
    /// Converts drive current to drive voltage at the diode (ohm).
    pub drive_impedance: f64,
    /// Optical power per volt above threshold (W/V).
    pub slope_efficiency: f64,
    /// RMS of the intensity noise, referred to the drive voltage (V).
    pub link_noise_sigma: f64,
    /// Centre of the intensity-noise band (Hz).
    pub noise_center: f64,
    /// Width of the intensity-noise band (Hz).
    pub noise_bandwidth: f64,
    /// Natural frequency of the under-damped response that produces the
    /// overswing on falling edges (Hz).
    pub overswing_frequency: f64,
    pub overswing_damping: f64,
    /// Photodiode conversion (V/W).
    pub photodiode_gain: f64,
    /// Readout low-pass corner (Hz).
    pub lowpass_cutoff: f64,
}

impl Default for LaserLink {
    fn default() -> Self {
        Self {
            bias_current: 10e-3,
            threshold_current: 5e-3,
            drive_impedance: 50.0,
            slope_efficiency: 0.05,
            link_noise_sigma: 0.0,
            noise_center: 500e6,
            noise_bandwidth: 150e6,
            overswing_frequency: 80e6,
            overswing_damping: 0.5,
            photodiode_gain: 20.0,
            lowpass_cutoff: 45e6,
        }
    }
}

/// Photodiode signal before and after the readout filter.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalReadout {
    pub filtered: Waveform,
    pub unfiltered: Waveform,
    /// Some drive sample pushed the diode below threshold.
    pub clipped: bool,
}

impl LaserLink {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope_efficiency > 0.0) {
            return Err(invalid!("laser.slope_efficiency must be positive"));
        }
        if !(self.lowpass_cutoff > 0.0) {
            return Err(invalid!("laser.lowpass_cutoff must be positive"));
        }
        if !(self.link_noise_sigma >= 0.0) {
            return Err(invalid!("laser.link_noise_sigma must be non-negative"));
        }
        if !(self.bias_current > self.threshold_current) || !(self.threshold_current >= 0.0) {
            return Err(invalid!("laser.bias_current must exceed laser.threshold_current"));
        }
        if !(self.drive_impedance > 0.0) || !(self.photodiode_gain > 0.0) {
            return Err(invalid!("laser drive impedance and photodiode gain must be positive"));
        }
        if !(self.noise_center > 0.0) || !(self.noise_bandwidth > 0.0) {
            return Err(invalid!("laser noise band must be positive"));
        }
        if !(self.overswing_frequency > 0.0) || !(self.overswing_damping > 0.0) {
            return Err(invalid!("laser overswing parameters must be positive"));
        }
        Ok(())
    }

    /// Drive-voltage equivalent of the bias above threshold (V).
    pub fn bias_offset(&self) -> f64 {
        (self.bias_current - self.threshold_current) * self.drive_impedance
    }

    /// Small-signal gain from drive voltage to photodiode voltage.
    pub fn link_gain(&self) -> f64 {
        self.slope_efficiency * self.photodiode_gain
    }
}

/// Sends `drive` over the link. Optical power is
/// `slope_efficiency * max(drive + noise + bias_offset, 0)` behind the
/// diode's resonant response; the photodiode output has its dark baseline
/// removed, so a small drive comes back scaled by [`LaserLink::link_gain`].
pub fn transduce_optical(link: &LaserLink, drive: &Waveform, seed: u64) -> Result<OpticalReadout> {
    link.validate()?;
    let fs = drive.sample_rate();
    let hi = link.noise_center + link.noise_bandwidth / 2.0;
    if hi >= fs / 2.0 || link.lowpass_cutoff >= fs / 2.0 || link.overswing_frequency >= fs / 2.0 {
        return Err(invalid!("sample rate {fs} Hz too low for the laser link"));
    }
    let reso = Section::resonant_low_pass(link.overswing_frequency, link.overswing_damping, fs);
    let mut v = reso.process(drive.samples());
    if link.link_noise_sigma > 0.0 {
        let band = [Section::band_pass(link.noise_center, link.noise_bandwidth, fs)];
        let noise = colored_noise(&band, v.len(), link.link_noise_sigma, &mut rng_from_seed(seed));
        for (x, e) in v.iter_mut().zip(noise) {
            *x += e;
        }
    }
    let offset = link.bias_offset();
    let mut clipped = false;
    let pd: alloc::vec::Vec<f64> = v
        .iter()
        .map(|&x| {
            let above = x + offset;
            if above < 0.0 {
                clipped = true;
            }
            link.photodiode_gain * link.slope_efficiency * (above.max(0.0) - offset)
        })
        .collect();
    let filtered = cascade_process(&[Section::low_pass(link.lowpass_cutoff, fs)], &pd);
    Ok(OpticalReadout {
        filtered: drive.with_samples(filtered),
        unfiltered: drive.with_samples(pd),
        clipped,
    })
}

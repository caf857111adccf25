#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use super::SnspdModel;
use crate::error::{invalid, Result};
use crate::rng::sub_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionEvent {
    /// Absorption time (s).
    pub t0: f64,
    /// Simultaneously detected photons.
    pub n_photons: u32,
    /// Fired pixels (1 for a single-pixel detector), including a switch-over pixel.
    pub pixel_count: u32,
    /// One of the fired pixels fired late, after the array's switch-over delay.
    pub switch_over: bool,
}

/// Pulsed coherent illumination.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PhotonSource {
    /// Laser repetition rate (Hz).
    pub rep_rate: f64,
    /// Mean photon number per pulse at the detector.
    pub mean_photon_number: f64,
}

impl Default for PhotonSource {
    fn default() -> Self {
        Self {
            rep_rate: 1e6,
            mean_photon_number: 2.0,
        }
    }
}

impl PhotonSource {
    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate > 0.0) {
            return Err(invalid!("source.rep_rate must be positive"));
        }
        if !(self.mean_photon_number >= 0.0) || !self.mean_photon_number.is_finite() {
            return Err(invalid!("source.mean_photon_number must be non-negative"));
        }
        Ok(())
    }

    /// Number of laser pulses in `window` seconds; pulse `k` fires at `k / rep_rate`.
    pub fn pulses_in(&self, window: f64) -> u64 {
        (window * self.rep_rate + 1e-9).floor() as u64
    }
}

/// Poisson draw that tolerates a zero mean.
pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Detection events over `window` seconds of pulsed illumination.
///
/// Each laser pulse yields Poisson(mu * eta(i_bias)) detected photons;
/// pulses with none produce no event. Dark counts (n = 1) are a Poisson
/// process at the bias-dependent dark rate, drawn from a separate
/// sub-stream so they do not depend on the illumination. A latched detector
/// produces nothing. Events are sorted by time.
pub fn sample_detections(
    model: &SnspdModel,
    source: &PhotonSource,
    window: f64,
    seed: u64,
) -> Result<Vec<DetectionEvent>> {
    model.validate()?;
    source.validate()?;
    if !(window >= 0.0) {
        return Err(invalid!("window must be non-negative"));
    }
    let bias = model.efficiency_at_bias(model.i_bias)?;
    if bias.latched {
        return Ok(Vec::new());
    }
    let mut events = Vec::new();
    let mean = source.mean_photon_number * bias.efficiency;
    if mean > 0.0 {
        let mut rng = sub_rng(seed, 0);
        let dist = Poisson::new(mean).expect("finite positive mean");
        for k in 0..source.pulses_in(window) {
            let n = dist.sample(&mut rng) as u32;
            if n > 0 {
                events.push(DetectionEvent {
                    t0: k as f64 / source.rep_rate,
                    n_photons: n,
                    pixel_count: 1,
                    switch_over: false,
                });
            }
        }
    }
    let mut rng = sub_rng(seed, 1);
    let n_dark = poisson(bias.dark_rate * window, &mut rng);
    for _ in 0..n_dark {
        events.push(DetectionEvent {
            t0: rng.random::<f64>() * window,
            n_photons: 1,
            pixel_count: 1,
            switch_over: false,
        });
    }
    events.sort_by(|a, b| a.t0.total_cmp(&b.t0));
    Ok(events)
}

/// Number of detections [`sample_detections`] would report, drawn directly:
/// Binomial(pulses, 1 - e^{-mu eta}) lit pulses plus Poisson dark counts.
/// Suited to long counting windows.
pub fn count_detections(model: &SnspdModel, source: &PhotonSource, window: f64, seed: u64) -> Result<u64> {
    model.validate()?;
    source.validate()?;
    if !(window >= 0.0) {
        return Err(invalid!("window must be non-negative"));
    }
    let bias = model.efficiency_at_bias(model.i_bias)?;
    if bias.latched {
        return Ok(0);
    }
    let p = 1.0 - (-source.mean_photon_number * bias.efficiency).exp();
    let lit = Binomial::new(source.pulses_in(window), p)
        .expect("probability in [0, 1]")
        .sample(&mut sub_rng(seed, 0));
    Ok(lit + poisson(bias.dark_rate * window, &mut sub_rng(seed, 1)))
}

//! Electro-optic modulator: band-limited electrode response and the
//! interferometric transmission curve.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::signal::filter::Section;
use crate::signal::Waveform;

/// Extinction ratios are reported up to this value (dB).
pub const EXTINCTION_CAP_DB: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EoModulator {
    /// Half-wave voltage (V).
    pub v_pi: f64,
    /// Electrical -3 dB bandwidth (Hz).
    pub bandwidth: f64,
    pub insertion_loss_db: f64,
    /// Drive voltage of minimum transmission (V).
    pub bias_point: f64,
}

impl Default for EoModulator {
    fn default() -> Self {
        Self {
            v_pi: 3.8,
            bandwidth: 230e6,
            insertion_loss_db: 0.0,
            bias_point: 0.0,
        }
    }
}

impl EoModulator {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0) {
            return Err(invalid!("modulator.v_pi must be positive"));
        }
        if !(self.bandwidth > 0.0) {
            return Err(invalid!("modulator.bandwidth must be positive"));
        }
        if !(self.insertion_loss_db >= 0.0) {
            return Err(invalid!("modulator.insertion_loss_db must be non-negative"));
        }
        Ok(())
    }

    /// Step-response 10-90 % rise time of the first-order electrode model (s).
    pub fn rise_time(&self) -> f64 {
        9f64.ln() / (2.0 * PI * self.bandwidth)
    }

    /// Transmission without insertion loss at drive `v`.
    pub fn transmission(&self, v: f64) -> f64 {
        let s = (PI * (v - self.bias_point) / (2.0 * self.v_pi)).sin();
        s * s
    }

    /// Transmission including the insertion loss.
    pub fn transmission_with_loss(&self, v: f64) -> f64 {
        self.transmission(v) * 10f64.powf(-self.insertion_loss_db / 10.0)
    }

    /// Electrode voltage: `drive` through a first-order low-pass at `bandwidth`,
    /// starting settled at the first drive sample.
    pub fn drive_response(&self, drive: &Waveform) -> Result<Waveform> {
        self.validate()?;
        if drive.sample_rate() < 10.0 * self.bandwidth {
            return Err(invalid!(
                "drive sampled at {} Hz, need at least ten times the {} Hz bandwidth",
                drive.sample_rate(),
                self.bandwidth
            ));
        }
        let lp = Section::low_pass(self.bandwidth, drive.sample_rate());
        let s = drive.samples();
        let v0 = s.first().copied().unwrap_or(0.0);
        let y = lp.process(&s.iter().map(|v| v - v0).collect::<alloc::vec::Vec<_>>());
        Ok(drive.with_samples(y.into_iter().map(|v| v + v0).collect()))
    }

    /// Transmission trace for `drive` (no insertion loss).
    pub fn transmission_trace(&self, drive: &Waveform) -> Result<Waveform> {
        Ok(self.drive_response(drive)?.map(|v| self.transmission(v)))
    }

    /// `10 log10(T_max / T_min)` over the filtered drive, capped at
    /// [`EXTINCTION_CAP_DB`].
    pub fn extinction_ratio(&self, drive: &Waveform) -> Result<f64> {
        let (lo, hi) = (drive.min().1, drive.max().1);
        if drive.is_empty() || hi - lo <= 1e-12 * hi.abs().max(1.0) {
            return Err(invalid!("extinction ratio needs a drive with distinct high and low levels"));
        }
        let t = self.transmission_trace(drive)?;
        let (tmin, tmax) = (t.min().1, t.max().1);
        if tmax <= 0.0 {
            return Ok(0.0);
        }
        if tmin <= tmax * 10f64.powf(-EXTINCTION_CAP_DB / 10.0) {
            return Ok(EXTINCTION_CAP_DB);
        }
        Ok(10.0 * (tmax / tmin).log10())
    }
}

pub fn transmission(m: &EoModulator, v: f64) -> f64 {
    m.transmission(v)
}

pub fn drive_response(m: &EoModulator, drive: &Waveform) -> Result<Waveform> {
    m.drive_response(drive)
}

pub fn extinction_ratio(m: &EoModulator, drive: &Waveform) -> Result<f64> {
    m.extinction_ratio(drive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{rise_time_10_90, tone_amplitude};

    fn step(fs: f64, v: f64) -> Waveform {
        Waveform::from_fn(fs, 0.0, 10000, |t| if t >= 20e-9 { v } else { 0.0 }).unwrap()
    }

    #[test]
    fn step_rise_time() {
        let m = EoModulator::default();
        let r = rise_time_10_90(&m.drive_response(&step(100e9, 3.6)).unwrap()).unwrap();
        let expect = 0.35 / 230e6;
        assert!((r / expect - 1.0).abs() < 0.05, "{r}");
        assert!((r - 1.52e-9).abs() < 0.03e-9);
    }

    #[test]
    fn dc_passes() {
        let w = Waveform::from_samples(10e9, 0.0, alloc::vec![1.7; 500]).unwrap();
        let out = EoModulator::default().drive_response(&w).unwrap();
        assert!(out.samples().iter().all(|&v| (v - 1.7).abs() < 1e-12));
    }

    #[test]
    fn corner_gain() {
        let m = EoModulator::default();
        let w = Waveform::from_fn(10e9, 0.0, 40000, |t| (2.0 * PI * 230e6 * t).sin()).unwrap();
        let a = tone_amplitude(&m.drive_response(&w).unwrap(), 230e6, 100e-9);
        assert!((a / core::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.02, "{a}");
    }

    #[test]
    fn undersampled_rejected() {
        let w = Waveform::from_samples(1e9, 0.0, alloc::vec![0.0; 10]).unwrap();
        assert!(EoModulator::default().drive_response(&w).is_err());
    }

    #[test]
    fn transmission_points() {
        let m = EoModulator::default();
        assert_eq!(m.transmission(0.0), 0.0);
        assert!((m.transmission(3.8) - 1.0).abs() < 1e-15);
        let expect = (PI * 3.6 / 7.6).sin().powi(2);
        assert!((m.transmission(3.6) - expect).abs() < 1e-15);
        assert!(expect < 1.0 && expect > 0.99);
    }

    #[test]
    fn extinction() {
        let m = EoModulator::default();
        let sq = |hi: f64, width: f64| {
            Waveform::from_fn(10e9, 0.0, 3000, move |t| if (50e-9..50e-9 + width).contains(&t) { hi } else { 0.0 }).unwrap()
        };
        assert_eq!(m.extinction_ratio(&sq(3.8, 150e-9)).unwrap(), EXTINCTION_CAP_DB);
        assert_eq!(m.extinction_ratio(&sq(3.6, 150e-9)).unwrap(), EXTINCTION_CAP_DB);
        let full = m.transmission_trace(&sq(3.6, 150e-9)).unwrap().max().1;
        let short = m.transmission_trace(&sq(3.6, 0.5e-9)).unwrap().max().1;
        assert!(short < 0.5 * full);
        let flat = Waveform::from_samples(10e9, 0.0, alloc::vec![1.0; 100]).unwrap();
        assert!(m.extinction_ratio(&flat).is_err());
    }
}


#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use crate::error::{invalid, Result};
use crate::signal::{sample_count, Waveform};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SnspdModel {
    /// Bias current (A).
    pub i_bias: f64,
    /// Kinetic inductance (H).
    pub kinetic_inductance: f64,
    /// Resistance of one hotspot (ohm).
    pub hotspot_resistance: f64,
    /// Readout load impedance (ohm).
    pub load_impedance: f64,
    /// Above this bias the detector latches (A).
    pub latch_current: f64,
    /// Dark count rate at `plateau_end` (1/s).
    pub dark_rate: f64,
    /// Bias increase that multiplies the dark rate by e (A).
    pub dark_current_scale: f64,
    /// Detection efficiency on the plateau.
    pub efficiency_mid: f64,
    /// Bias where the efficiency turn-on completes (A).
    pub plateau_onset: f64,
    /// Bias where dark counts reach `dark_rate` and start to dominate (A).
    pub plateau_end: f64,
}

impl Default for SnspdModel {
    fn default() -> Self {
        Self {
            i_bias: 10.5e-6,
            kinetic_inductance: 500e-9,
            hotspot_resistance: 1e3,
            load_impedance: 50.0,
            latch_current: 12.5e-6,
            dark_rate: 100.0,
            dark_current_scale: 0.35e-6,
            efficiency_mid: 0.9,
            plateau_onset: 6e-6,
            plateau_end: 11e-6,
        }
    }
}

/// Detector state at one bias current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    pub efficiency: f64,
    /// Dark count rate (1/s).
    pub dark_rate: f64,
    pub latched: bool,
}

fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

impl SnspdModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("i_bias", self.i_bias),
            ("kinetic_inductance", self.kinetic_inductance),
            ("hotspot_resistance", self.hotspot_resistance),
            ("load_impedance", self.load_impedance),
            ("latch_current", self.latch_current),
            ("dark_current_scale", self.dark_current_scale),
            ("plateau_onset", self.plateau_onset),
            ("plateau_end", self.plateau_end),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid!("detector.{name} must be positive, got {v}"));
            }
        }
        if !(self.efficiency_mid > 0.0 && self.efficiency_mid <= 1.0) {
            return Err(invalid!("detector.efficiency_mid must lie in (0, 1]"));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(invalid!("detector.dark_rate must be non-negative"));
        }
        if !(self.plateau_onset < self.plateau_end && self.plateau_end <= self.latch_current) {
            return Err(invalid!(
                "detector needs plateau_onset < plateau_end <= latch_current"
            ));
        }
        Ok(())
    }

    /// Rise time constant `L_k / (n R_hs + Z)` for `n` photons.
    pub fn rise_tau(&self, n: u32) -> f64 {
        self.kinetic_inductance / (n as f64 * self.hotspot_resistance + self.load_impedance)
    }

    /// Fall time constant `L_k / Z`.
    pub fn fall_tau(&self) -> f64 {
        self.kinetic_inductance / self.load_impedance
    }

    /// Peak of the `n`-photon pulse: the bias current diverted into the load,
    /// `i_bias Z n R_hs / (n R_hs + Z)`.
    pub fn peak_voltage(&self, n: u32) -> f64 {
        let r = n as f64 * self.hotspot_resistance;
        self.i_bias * self.load_impedance * r / (r + self.load_impedance)
    }

    /// Time from absorption to the pulse maximum.
    pub fn peak_time(&self, n: u32) -> f64 {
        let (tr, tf) = (self.rise_tau(n), self.fall_tau());
        tf * tr / (tf - tr) * (tf / tr).ln()
    }

    /// Prefactor `A(n)` of `A (e^{-t/tau_f} - e^{-t/tau_r})`.
    pub fn amplitude(&self, n: u32) -> f64 {
        let (tr, tf) = (self.rise_tau(n), self.fall_tau());
        let tp = self.peak_time(n);
        self.peak_voltage(n) / ((-tp / tf).exp() - (-tp / tr).exp())
    }

    /// Closed-form pulse value `dt` seconds after absorption.
    pub fn pulse_value(&self, n: u32, dt: f64) -> f64 {
        if dt < 0.0 {
            return 0.0;
        }
        self.amplitude(n) * ((-dt / self.fall_tau()).exp() - (-dt / self.rise_tau(n)).exp())
    }

    /// Adds `scale` times the `n`-photon pulse absorbed at `t0` onto `w`.
    pub fn add_pulse(&self, w: &mut Waveform, n: u32, t0: f64, scale: f64) {
        let (tr, tf) = (self.rise_tau(n), self.fall_tau());
        let a = self.amplitude(n) * scale;
        let fs = w.sample_rate();
        let wt0 = w.t0();
        let first = ((t0 - wt0) * fs).ceil().max(0.0) as usize;
        let dt = 1.0 / fs;
        let mut tt = wt0 + first as f64 * dt - t0;
        // both exponentials decay geometrically sample to sample
        let (rf, rr) = ((-dt / tf).exp(), (-dt / tr).exp());
        let (mut ef, mut er) = ((-tt / tf).exp(), (-tt / tr).exp());
        for (k, v) in w.samples_mut().iter_mut().enumerate().skip(first) {
            if (k - first).is_multiple_of(256) {
                // resynchronise to limit drift of the running products
                ef = (-tt / tf).exp();
                er = (-tt / tr).exp();
            }
            *v += a * (ef - er);
            ef *= rf;
            er *= rr;
            tt += dt;
            if ef < 1e-18 {
                break;
            }
        }
    }

    /// Detector state at bias `i`.
    pub fn efficiency_at_bias(&self, i: f64) -> Result<BiasPoint> {
        if !(i >= 0.0) {
            return Err(invalid!("bias current must be non-negative, got {i}"));
        }
        if i > self.latch_current {
            return Ok(BiasPoint {
                efficiency: 0.0,
                dark_rate: 0.0,
                latched: true,
            });
        }
        let efficiency = if i < self.plateau_onset {
            self.efficiency_mid * smootherstep(i / self.plateau_onset)
        } else {
            self.efficiency_mid
        };
        Ok(BiasPoint {
            efficiency,
            dark_rate: self.dark_rate * ((i - self.plateau_end) / self.dark_current_scale).exp(),
            latched: false,
        })
    }

    /// The detector as seen through a readout that couples rms noise
    /// current `noise_current` back into the nanowire: switching happens
    /// three standard deviations early, lowering both the latch current and
    /// the onset of dark counts.
    pub fn with_readout_noise(&self, noise_current: f64) -> Self {
        let shift = 3.0 * noise_current;
        Self {
            latch_current: self.latch_current - shift,
            plateau_end: self.plateau_end - shift,
            ..self.clone()
        }
    }
}

/// `n`-photon pulse absorbed at `t0` on a zero waveform of `duration`
/// seconds at `sample_rate`.
pub fn pulse_waveform(
    model: &SnspdModel,
    n: u32,
    t0: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<Waveform> {
    if n < 1 {
        return Err(invalid!("photon number must be at least 1"));
    }
    model.validate()?;
    if !(t0 >= 0.0) || t0 + model.peak_time(n) >= duration {
        return Err(invalid!(
            "pulse at t0 = {t0} s does not reach its peak within {duration} s"
        ));
    }
    let mut w = Waveform::from_samples(sample_rate, 0.0, alloc::vec![0.0; sample_count(duration, sample_rate)])?;
    model.add_pulse(&mut w, n, t0, 1.0);
    Ok(w)
}

impl SnspdModel {
    pub fn pulse_waveform(&self, n: u32, t0: f64, duration: f64, sample_rate: f64) -> Result<Waveform> {
        pulse_waveform(self, n, t0, duration, sample_rate)
    }
}

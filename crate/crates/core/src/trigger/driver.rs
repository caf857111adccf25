use super::digital::DigitalWaveform;
use crate::error::{invalid, Result};
use crate::signal::{sample_count, Waveform};

/// CMOS inverter/buffer stage driving the modulator electrode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ModulatorDriver {
    pub v_low: f64,
    pub v_high: f64,
    /// 10-90 % transition time of the linear ramp (s).
    pub rise_10_90: f64,
}

impl Default for ModulatorDriver {
    fn default() -> Self {
        Self {
            v_low: 0.0,
            v_high: 3.6,
            rise_10_90: 1e-9,
        }
    }
}

impl ModulatorDriver {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_high > self.v_low) {
            return Err(invalid!("driver v_high must exceed v_low"));
        }
        if !(self.rise_10_90 >= 0.0) {
            return Err(invalid!("driver rise time must be non-negative"));
        }
        Ok(())
    }

    /// Slew rate of the output ramp (V/s); infinite for an ideal driver.
    pub fn slew_rate(&self) -> f64 {
        (self.v_high - self.v_low) * 0.8 / self.rise_10_90
    }

    /// Output tracking `input` with slew-limited ramps, sampled over
    /// `[t0, t0 + duration)`. A ramp starts at its transition time.
    pub fn drive(&self, input: &DigitalWaveform, t0: f64, duration: f64, sample_rate: f64) -> Result<Waveform> {
        self.validate()?;
        let n = sample_count(duration, sample_rate);
        let target = |l: super::Level| if l.is_high() { self.v_high } else { self.v_low };
        let slew = self.slew_rate();
        let tr = input.transitions();
        // piecewise state: value `v` at time `tl`, ramping toward `goal`
        let mut v = target(input.initial());
        let mut tl = f64::NEG_INFINITY;
        let mut goal = v;
        let at = |v: f64, tl: f64, goal: f64, t: f64| {
            let reach = if slew.is_finite() { slew * (t - tl) } else { f64::INFINITY };
            if goal > v {
                (v + reach).min(goal)
            } else {
                (v - reach).max(goal)
            }
        };
        let mut k = 0;
        Waveform::from_fn(sample_rate, t0, n.max(1), |t| {
            while k < tr.len() && tr[k].0 <= t {
                v = if tl.is_finite() { at(v, tl, goal, tr[k].0) } else { goal };
                tl = tr[k].0;
                goal = target(tr[k].1);
                k += 1;
            }
            if tl.is_finite() {
                at(v, tl, goal, t)
            } else {
                goal
            }
        })
    }
}

/// [`ModulatorDriver::drive`] with the default 0-3.6 V, 1 ns driver.
pub fn modulator_driver(input: &DigitalWaveform, t0: f64, duration: f64, sample_rate: f64) -> Result<Waveform> {
    ModulatorDriver::default().drive(input, t0, duration, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::super::Level;
    use super::*;

    #[test]
    fn constant_levels() {
        let hi = modulator_driver(&DigitalWaveform::constant(Level::High), 0.0, 10e-9, 10e9).unwrap();
        assert!(hi.samples().iter().all(|&v| v == 3.6));
        let lo = modulator_driver(&DigitalWaveform::constant(Level::Low), 0.0, 10e-9, 10e9).unwrap();
        assert!(lo.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pulse_tracks_input() {
        let d = DigitalWaveform::from_pulses(&[(10e-9, 30e-9)]).unwrap();
        let w = modulator_driver(&d, 0.0, 50e-9, 100e9).unwrap();
        assert_eq!(w.max().1, 3.6);
        let half = crate::signal::threshold_crossings(&w, 1.8, crate::signal::Direction::Rising)[0].time;
        let fall = crate::signal::threshold_crossings(&w, 1.8, crate::signal::Direction::Falling)[0].time;
        assert!(((fall - half) - 20e-9).abs() < 0.01e-9);
        let t10 = crate::signal::threshold_crossings(&w, 0.36, crate::signal::Direction::Rising)[0].time;
        let t90 = crate::signal::threshold_crossings(&w, 3.24, crate::signal::Direction::Rising)[0].time;
        assert!(((t90 - t10) - 1e-9).abs() < 0.02e-9);
        assert!(t10 > 10e-9);
    }

    #[test]
    fn short_pulse_does_not_reach_full_swing() {
        let d = DigitalWaveform::from_pulses(&[(10e-9, 10.5e-9)]).unwrap();
        let w = modulator_driver(&d, 0.0, 20e-9, 100e9).unwrap();
        assert!(w.max().1 < 2.0);
    }
}

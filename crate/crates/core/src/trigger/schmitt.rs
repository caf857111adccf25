#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::digital::{DigitalWaveform, Level};
use crate::error::{invalid, Result};
use crate::signal::Waveform;

/// Minimum samples per feedback time constant accepted by the scan.
pub const MIN_SAMPLES_PER_TAU: f64 = 20.0;

/// Comparator with capacitively coupled positive feedback.
///
/// On switching, the divider injects `feedback_fraction * (output_high -
/// output_low)` through the feedback capacitor, with the sign of the
/// output step; the injected voltage then decays with `feedback_tau`. The
/// output therefore stays high for a time set by the RC rather than by the
/// input pulse.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SchmittTrigger {
    /// Trigger level (V).
    pub threshold: f64,
    /// Divider ratio of the feedback path.
    pub feedback_fraction: f64,
    /// Feedback resistor times capacitor (s).
    pub feedback_tau: f64,
    pub output_high: f64,
    pub output_low: f64,
    /// Input-to-output delay (s).
    pub comparator_delay: f64,
}

/// Feedback resistor of the default triggers (ohm).
pub const DEFAULT_FEEDBACK_RESISTANCE: f64 = 330.0;

impl Default for SchmittTrigger {
    fn default() -> Self {
        Self::with_capacitor(0.05, DEFAULT_FEEDBACK_RESISTANCE, 30e-12)
    }
}

impl SchmittTrigger {
    /// Default trigger at `threshold` with feedback RC `r * c`.
    pub fn with_capacitor(threshold: f64, r: f64, c: f64) -> Self {
        Self {
            threshold,
            feedback_fraction: 0.5,
            feedback_tau: r * c,
            output_high: 3.3,
            output_low: 0.0,
            comparator_delay: 4e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_high > self.output_low) {
            return Err(invalid!("trigger output_high must exceed output_low"));
        }
        if !(self.feedback_tau > 0.0) || !self.feedback_tau.is_finite() {
            return Err(invalid!("trigger feedback_tau must be positive"));
        }
        if !(self.feedback_fraction > 0.0 && self.feedback_fraction < 1.0) {
            return Err(invalid!("trigger feedback_fraction must lie in (0, 1)"));
        }
        if !(self.comparator_delay >= 0.0) || !self.threshold.is_finite() {
            return Err(invalid!("trigger delay must be non-negative and threshold finite"));
        }
        Ok(())
    }

    /// Feedback injected on a switching event (V).
    pub fn feedback_step(&self) -> f64 {
        self.feedback_fraction * (self.output_high - self.output_low)
    }

    /// Output width for an input that rises above threshold and then sits
    /// at `tail` (below threshold) before the feedback has decayed.
    pub fn expected_width(&self, tail: f64) -> Option<f64> {
        let margin = self.threshold - tail;
        if !(margin > 0.0) || margin >= self.feedback_step() {
            return None;
        }
        Some(self.feedback_tau * (self.feedback_step() / margin).ln())
    }

    fn check_resolution(&self, w: &Waveform) -> Result<()> {
        self.validate()?;
        if self.feedback_tau * w.sample_rate() < MIN_SAMPLES_PER_TAU {
            return Err(invalid!(
                "sample rate {} Hz does not resolve feedback_tau {} s",
                w.sample_rate(),
                self.feedback_tau
            ));
        }
        Ok(())
    }
}

/// The scan shared by the plain and noisy responses. `offset(i)` perturbs
/// the threshold at sample `i`.
fn scan(trig: &SchmittTrigger, w: &Waveform, mut offset: impl FnMut(usize) -> f64, mut fb_trace: Option<&mut [f64]>) -> DigitalWaveform {
    let s = w.samples();
    let dt = w.dt();
    let decay = (-dt / trig.feedback_tau).exp();
    let step = trig.feedback_step();
    let mut out = DigitalWaveform::constant(Level::Low);
    let mut high = false;
    let mut vfb = 0.0;
    let mut prev_margin = f64::NAN;
    for (i, &v) in s.iter().enumerate() {
        let margin = v + vfb - (trig.threshold + offset(i));
        let switch = if high { margin <= 0.0 } else { margin > 0.0 };
        if switch {
            let frac = if prev_margin.is_finite() && prev_margin != margin {
                (prev_margin / (prev_margin - margin)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let t = w.time_at(i) - (1.0 - frac) * dt;
            high = !high;
            let jump = if high { step } else { -step };
            vfb += jump;
            out.push(t + trig.comparator_delay, Level::from_bool(high));
            prev_margin = margin + jump;
        } else {
            prev_margin = margin;
        }
        if let Some(tr) = fb_trace.as_deref_mut() {
            tr[i] = vfb;
        }
        vfb *= decay;
    }
    out
}

/// Digital output of `trig` for input `w`. The trigger starts low with no
/// stored feedback.
pub fn trigger_response(trig: &SchmittTrigger, w: &Waveform) -> Result<DigitalWaveform> {
    trig.check_resolution(w)?;
    Ok(scan(trig, w, |_| 0.0, None))
}

/// [`trigger_response`] with an independent Gaussian threshold offset of
/// standard deviation `sigma` on every sample.
pub fn trigger_response_noisy<R: Rng + ?Sized>(
    trig: &SchmittTrigger,
    w: &Waveform,
    sigma: f64,
    rng: &mut R,
) -> Result<DigitalWaveform> {
    trig.check_resolution(w)?;
    let normal = Normal::new(0.0, sigma).map_err(|_| invalid!("threshold noise sigma must be non-negative"))?;
    Ok(scan(trig, w, |_| normal.sample(rng), None))
}

/// Input level needed to flip the comparator at each sample:
/// `threshold - v_fb(t)`, sampled after any switching at that sample.
pub fn effective_threshold(trig: &SchmittTrigger, w: &Waveform) -> Result<(DigitalWaveform, Waveform)> {
    trig.check_resolution(w)?;
    let mut fb = alloc::vec![0.0; w.len()];
    let out = scan(trig, w, |_| 0.0, Some(&mut fb));
    let thr = fb.iter().map(|v| trig.threshold - v).collect();
    Ok((out, w.with_samples(thr)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(width: f64, height: f64) -> Waveform {
        Waveform::from_fn(10e9, 0.0, 6000, |t| if (10e-9..10e-9 + width).contains(&t) { height } else { 0.0 }).unwrap()
    }

    #[test]
    fn below_threshold_is_silent() {
        let t = SchmittTrigger::default();
        let out = trigger_response(&t, &rect(20e-9, 0.04)).unwrap();
        assert!(out.transitions().is_empty());
    }

    #[test]
    fn width_follows_feedback() {
        let t = SchmittTrigger::default();
        let out = trigger_response(&t, &rect(10e-9, 0.1)).unwrap();
        let p = out.pulses();
        assert_eq!(p.len(), 1);
        let width = p[0].1 - p[0].0;
        let expect = t.expected_width(0.0).unwrap();
        assert!((width / expect - 1.0).abs() < 0.01, "{width} vs {expect}");
        assert!((p[0].0 - 10e-9 - t.comparator_delay).abs() < 0.2e-9);
    }

    #[test]
    fn under_resolved_tau_rejected() {
        let t = SchmittTrigger {
            feedback_tau: 1e-9,
            ..Default::default()
        };
        assert!(trigger_response(&t, &rect(10e-9, 0.1)).is_err());
    }

    #[test]
    fn hysteresis_timeline() {
        let t = SchmittTrigger::default();
        let w = rect(10e-9, 0.1);
        let (out, thr) = effective_threshold(&t, &w).unwrap();
        let (on, off) = out.pulses()[0];
        let (on, off) = (on - t.comparator_delay, off - t.comparator_delay);
        let s = thr.samples();
        let mut last = f64::NEG_INFINITY;
        for (i, &v) in s.iter().enumerate() {
            let ti = thr.time_at(i);
            if ti > on && ti < off {
                assert!(v < t.threshold);
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn noisy_with_zero_sigma_matches() {
        let t = SchmittTrigger::default();
        let w = rect(10e-9, 0.1);
        let mut rng = crate::rng::rng_from_seed(1);
        assert_eq!(trigger_response_noisy(&t, &w, 0.0, &mut rng).unwrap(), trigger_response(&t, &w).unwrap());
    }
}

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::signal::filter::{cascade_process, impulse_energy, Section};
use crate::signal::{white_noise, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PowerMode {
    High,
    Low,
}

/// One amplifier or filter as a linear two-port.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandPassStage {
    /// Midband gain (dB).
    pub gain_db: f64,
    /// Lower -3 dB corner (Hz).
    pub f_low: f64,
    /// Upper -3 dB corner (Hz).
    pub f_high: f64,
    pub inverting: bool,
    /// Static power dissipation (W).
    pub power_dissipation: f64,
    /// Representative |S11| (dB).
    pub input_return_loss_db: f64,
    /// Representative |S12| (dB).
    pub reverse_isolation_db: f64,
    /// Output-referred noise standard deviation (V).
    pub added_noise_sigma: f64,
}

/// The single-transistor first-stage amplifier in its high- or low-power bias.
pub fn first_stage(mode: PowerMode) -> BandPassStage {
    match mode {
        PowerMode::High => BandPassStage {
            gain_db: 20.0,
            f_low: 6e6,
            f_high: 600e6,
            inverting: true,
            power_dissipation: 1.3e-3,
            input_return_loss_db: -10.0,
            reverse_isolation_db: -35.0,
            added_noise_sigma: 0.0,
        },
        PowerMode::Low => BandPassStage {
            gain_db: 15.0,
            f_low: 6e6,
            f_high: 600e6,
            inverting: true,
            power_dissipation: 0.3e-3,
            input_return_loss_db: -5.0,
            reverse_isolation_db: -30.0,
            added_noise_sigma: 0.0,
        },
    }
}

impl BandPassStage {
    /// Commercial cryogenic amplifier following the first stage in the
    /// photon-number readout. Its 200 MHz lower corner acts as a high-pass.
    pub fn commercial_cryo() -> Self {
        BandPassStage {
            gain_db: 30.0,
            f_low: 200e6,
            f_high: 3e9,
            inverting: false,
            power_dissipation: 0.0,
            input_return_loss_db: -15.0,
            reverse_isolation_db: -40.0,
            added_noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_low > 0.0) || !(self.f_high > self.f_low) || !self.f_high.is_finite() {
            return Err(invalid!(
                "stage corners must satisfy 0 < f_low < f_high (got {} Hz, {} Hz)",
                self.f_low,
                self.f_high
            ));
        }
        if !self.gain_db.is_finite() {
            return Err(invalid!("stage gain must be finite"));
        }
        if !(self.power_dissipation >= 0.0) {
            return Err(invalid!("power dissipation must be non-negative"));
        }
        if !(self.added_noise_sigma >= 0.0) {
            return Err(invalid!("stage noise sigma must be non-negative"));
        }
        Ok(())
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.added_noise_sigma = sigma;
        self
    }

    /// Signed linear midband gain.
    pub fn linear_gain(&self) -> f64 {
        let g = 10f64.powf(self.gain_db / 20.0);
        if self.inverting {
            -g
        } else {
            g
        }
    }

    /// Continuous-time response at `freq`.
    pub fn response_at(&self, freq: f64) -> Result<Complex64> {
        if !(freq > 0.0) {
            return Err(invalid!("frequency must be positive, got {freq}"));
        }
        self.validate()?;
        let jf = Complex64::new(0.0, freq);
        let hp = (jf / self.f_low) / (1.0 + jf / self.f_low);
        let lp = 1.0 / (1.0 + jf / self.f_high);
        Ok(hp * lp * self.linear_gain())
    }

    /// Forward gain |S21| at `freq` in dB.
    pub fn s21_db(&self, freq: f64) -> Result<f64> {
        Ok(20.0 * self.response_at(freq)?.norm().log10())
    }

    /// Input reflection envelope: the in-band return loss, relaxing to 0 dB
    /// (full reflection) well outside the passband.
    pub fn s11_db(&self, freq: f64) -> f64 {
        let hp = 1.0 / (1.0 + (self.f_low / (4.0 * freq)).powi(2));
        let lp = 1.0 / (1.0 + (freq / (4.0 * self.f_high)).powi(2));
        self.input_return_loss_db * hp * lp
    }

    /// Reverse isolation envelope (flat).
    pub fn s12_db(&self, _freq: f64) -> f64 {
        self.reverse_isolation_db
    }

    fn check_rate(&self, sample_rate: f64) -> Result<()> {
        self.validate()?;
        if self.f_high >= sample_rate / 2.0 {
            return Err(invalid!(
                "stage corner {} Hz is not below Nyquist ({} Hz)",
                self.f_high,
                sample_rate / 2.0
            ));
        }
        Ok(())
    }

    /// Unity-gain discrete sections (high-pass, low-pass) for `sample_rate`.
    pub fn sections(&self, sample_rate: f64) -> Result<[Section; 2]> {
        self.check_rate(sample_rate)?;
        Ok([
            Section::high_pass(self.f_low, sample_rate),
            Section::low_pass(self.f_high, sample_rate),
        ])
    }

    /// Noise-free pass of `w` through the stage, from a zero initial state.
    pub fn apply(&self, w: &Waveform) -> Result<Waveform> {
        let sections = self.sections(w.sample_rate())?;
        let g = self.linear_gain();
        let y = cascade_process(&sections, w.samples());
        Ok(w.with_samples(y.into_iter().map(|v| v * g).collect()))
    }

    /// Like [`apply`](Self::apply), plus band-limited output noise with
    /// standard deviation `added_noise_sigma`.
    pub fn apply_noisy<R: Rng + ?Sized>(&self, w: &Waveform, rng: &mut R) -> Result<Waveform> {
        let mut out = self.apply(w)?;
        if self.added_noise_sigma > 0.0 {
            let n = colored_noise(&self.sections(w.sample_rate())?, w.len(), self.added_noise_sigma, rng);
            for (v, e) in out.samples_mut().iter_mut().zip(n) {
                *v += e;
            }
        }
        Ok(out)
    }
}

/// Gaussian noise shaped by `sections` and scaled to stationary standard
/// deviation `sigma`.
pub fn colored_noise<R: Rng + ?Sized>(sections: &[Section], n: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return alloc::vec![0.0; n];
    }
    let gain = impulse_energy(sections).sqrt();
    // run-in so the output starts from (approximately) the stationary state
    let settle = settle_samples(sections, n);
    let white = white_noise(n + settle, sigma / gain, rng);
    let shaped = cascade_process(sections, &white);
    shaped[settle..].to_vec()
}

fn settle_samples(sections: &[Section], n: usize) -> usize {
    // slowest pole radius sets the memory of the cascade
    let mut r_max = 0.0f64;
    for s in sections {
        let (a1, a2) = (s.a[0], s.a[1]);
        let r = if a2 == 0.0 {
            a1.abs()
        } else {
            let disc = a1 * a1 - 4.0 * a2;
            if disc >= 0.0 {
                let q = disc.sqrt();
                ((-a1 + q) / 2.0).abs().max(((-a1 - q) / 2.0).abs())
            } else {
                a2.abs().sqrt()
            }
        };
        r_max = r_max.max(r);
    }
    if r_max <= 0.0 || r_max >= 1.0 {
        return 0;
    }
    let tau = -1.0 / r_max.ln();
    ((5.0 * tau) as usize).min(4 * n.max(1)).min(1 << 20)
}

/// Passes `w` through `stage` (noise-free).
pub fn apply_linear_stage(w: &Waveform, stage: &BandPassStage) -> Result<Waveform> {
    stage.apply(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::tone_amplitude;
    use core::f64::consts::PI;

    fn stage_20db() -> BandPassStage {
        BandPassStage {
            inverting: false,
            ..first_stage(PowerMode::High)
        }
    }

    #[test]
    fn high_mode_values() {
        let s = first_stage(PowerMode::High);
        assert_eq!((s.gain_db, s.f_low, s.f_high, s.power_dissipation), (20.0, 6e6, 600e6, 1.3e-3));
        assert!(s.inverting);
        assert_eq!(s.input_return_loss_db, -10.0);
        let l = first_stage(PowerMode::Low);
        assert_eq!((l.gain_db, l.power_dissipation), (15.0, 0.3e-3));
        assert!(l.inverting);
        assert!(l.input_return_loss_db > s.input_return_loss_db);
    }

    #[test]
    fn midband_and_corners() {
        let s = first_stage(PowerMode::High);
        let mid = (6e6f64 * 600e6).sqrt();
        assert!((s.s21_db(mid).unwrap() - 20.0).abs() < 0.2);
        assert!((s.s21_db(600e6).unwrap() - 17.0).abs() < 0.2);
        assert!((s.s21_db(6e6).unwrap() - 17.0).abs() < 0.2);
        assert!(s.s21_db(1.0).unwrap() < -50.0);
        assert!(s.response_at(0.0).is_err());
        assert!(s.response_at(-5.0).is_err());
    }

    #[test]
    fn fifty_mhz_tone_gains_ten() {
        let fs = 1e10;
        let w = Waveform::from_fn(fs, 0.0, 40_000, |t| 1e-3 * (2.0 * PI * 50e6 * t).sin()).unwrap();
        let y = apply_linear_stage(&w, &stage_20db()).unwrap();
        let a = tone_amplitude(&y, 50e6, 2e-6);
        assert!((a / 1e-3 / 10.0 - 1.0).abs() < 0.02, "gain {}", a / 1e-3);
    }

    #[test]
    fn six_mhz_tone_at_corner() {
        let fs = 1e10;
        let w = Waveform::from_fn(fs, 0.0, 60_000, |t| 1e-3 * (2.0 * PI * 6e6 * t).sin()).unwrap();
        let y = stage_20db().apply(&w).unwrap();
        let a = tone_amplitude(&y, 6e6, 1.0e-6);
        // analytic first-order magnitudes at 6 MHz
        let lp = 1.0 / (1.0 + (6e6f64 / 600e6).powi(2)).sqrt();
        let expect = 10.0 * core::f64::consts::FRAC_1_SQRT_2 * lp;
        assert!((a / 1e-3 / expect - 1.0).abs() < 0.03);
    }

    #[test]
    fn dc_is_blocked() {
        let w = Waveform::from_samples(1e10, 0.0, alloc::vec![0.1; 20_000]).unwrap();
        let y = stage_20db().apply(&w).unwrap();
        assert!(y.samples()[19_999].abs() < 1e-3);
    }

    #[test]
    fn corner_at_nyquist_rejected() {
        let w = Waveform::from_samples(1e9, 0.0, alloc::vec![0.0; 10]).unwrap();
        assert!(stage_20db().apply(&w).is_err());
    }

    #[test]
    fn inverting_negates() {
        let w = Waveform::from_fn(1e10, 0.0, 5000, |t| (2.0 * PI * 60e6 * t).sin()).unwrap();
        let a = stage_20db().apply(&w).unwrap();
        let b = first_stage(PowerMode::High).apply(&w).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn colored_noise_has_requested_rms() {
        let s = stage_20db().sections(1e10).unwrap();
        let mut rng = crate::rng::rng_from_seed(5);
        let n = colored_noise(&s, 400_000, 2e-3, &mut rng);
        let rms = (n.iter().map(|v| v * v).sum::<f64>() / n.len() as f64).sqrt();
        assert!((rms / 2e-3 - 1.0).abs() < 0.05, "rms {rms}");
    }
}

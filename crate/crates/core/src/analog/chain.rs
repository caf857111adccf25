#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use super::stage::BandPassStage;
use crate::error::{invalid, Result};
use crate::signal::Waveform;

/// An ordered cascade of stages behaving as one composite two-port.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "Vec<BandPassStage>", into = "Vec<BandPassStage>")
)]
pub struct Chain {
    stages: Vec<BandPassStage>,
}

impl TryFrom<Vec<BandPassStage>> for Chain {
    type Error = crate::Error;

    fn try_from(stages: Vec<BandPassStage>) -> Result<Self> {
        Chain::new(stages)
    }
}

impl From<Chain> for Vec<BandPassStage> {
    fn from(c: Chain) -> Self {
        c.stages
    }
}

/// Builds the composite of `stages` (applied first to last).
pub fn cascade(stages: &[BandPassStage]) -> Result<Chain> {
    Chain::new(stages.to_vec())
}

impl Chain {
    pub fn new(stages: Vec<BandPassStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(invalid!("a cascade needs at least one stage"));
        }
        for s in &stages {
            s.validate()?;
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[BandPassStage] {
        &self.stages
    }

    pub fn gain_db(&self) -> f64 {
        self.stages.iter().map(|s| s.gain_db).sum()
    }

    pub fn power_dissipation(&self) -> f64 {
        self.stages.iter().map(|s| s.power_dissipation).sum()
    }

    /// Net inversion: odd number of inverting stages.
    pub fn inverting(&self) -> bool {
        self.stages.iter().filter(|s| s.inverting).count() % 2 == 1
    }

    /// `-1.0` for a net-inverting cascade, `1.0` otherwise.
    pub fn sign(&self) -> f64 {
        if self.inverting() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn response_at(&self, freq: f64) -> Result<Complex64> {
        self.stages
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, s| Ok(acc * s.response_at(freq)?))
    }

    pub fn s21_db(&self, freq: f64) -> Result<f64> {
        Ok(20.0 * self.response_at(freq)?.norm().log10())
    }

    /// Frequency of maximum |S21| (golden-section search in log frequency
    /// between the outermost corners).
    pub fn peak_frequency(&self) -> f64 {
        let lo = self.stages.iter().map(|s| s.f_low).fold(f64::INFINITY, f64::min);
        let hi = self.stages.iter().map(|s| s.f_high).fold(0.0, f64::max);
        let mag = |lf: f64| self.response_at(lf.exp()).map(|c| c.norm()).unwrap_or(0.0);
        let (mut a, mut b) = (lo.ln(), hi.ln());
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if mag(c) > mag(d) {
                b = d;
            } else {
                a = c;
            }
        }
        (0.5 * (a + b)).exp()
    }

    /// Lower and upper frequencies where the composite falls 3 dB below
    /// its nominal midband gain.
    pub fn corner_frequencies(&self) -> (f64, f64) {
        let fp = self.peak_frequency();
        let nominal = 10f64.powf(self.gain_db() / 20.0);
        let target = nominal * core::f64::consts::FRAC_1_SQRT_2;
        let mag = |f: f64| self.response_at(f).map(|c| c.norm()).unwrap_or(0.0);
        let bisect = |mut inside: f64, mut outside: f64| {
            for _ in 0..200 {
                let mid = (inside.ln() * 0.5 + outside.ln() * 0.5).exp();
                if mag(mid) > target {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            0.5 * (inside + outside)
        };
        (bisect(fp, fp * 1e-6), bisect(fp, fp * 1e6))
    }

    /// Sequential noise-free pass through every stage.
    pub fn apply(&self, w: &Waveform) -> Result<Waveform> {
        self.stages.iter().try_fold(w.clone(), |acc, s| s.apply(&acc))
    }

    /// Sequential pass with each stage's output noise.
    pub fn apply_noisy<R: Rng + ?Sized>(&self, w: &Waveform, rng: &mut R) -> Result<Waveform> {
        self.stages.iter().try_fold(w.clone(), |acc, s| s.apply_noisy(&acc, rng))
    }

    /// Output noise of the cascade alone (zero input), `n` samples.
    pub fn output_noise<R: Rng + ?Sized>(&self, sample_rate: f64, n: usize, rng: &mut R) -> Result<Waveform> {
        let zero = Waveform::from_samples(sample_rate, 0.0, alloc::vec![0.0; n])?;
        self.apply_noisy(&zero, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::{first_stage, PowerMode};

    #[test]
    fn empty_cascade_rejected() {
        assert!(cascade(&[]).is_err());
    }

    #[test]
    fn three_stages_add_in_db_and_parity() {
        let s = first_stage(PowerMode::High);
        let c = cascade(&[s.clone(), s.clone(), s.clone()]).unwrap();
        assert_eq!(c.gain_db(), 60.0);
        assert!(c.inverting());
        assert_eq!(c.sign(), -1.0);
        assert_eq!(c.power_dissipation(), 3.0 * 1.3e-3);
        let two = cascade(&[s.clone(), s]).unwrap();
        assert!(!two.inverting());
    }

    #[test]
    fn composite_corners_tighten_by_analytic_factor() {
        let s = first_stage(PowerMode::High);
        let c = cascade(&[s.clone(), s.clone(), s]).unwrap();
        let (lo, hi) = c.corner_frequencies();
        // n identical first-order poles: f_3dB = f_c * sqrt(2^(1/n) - 1)
        let k = (2f64.powf(1.0 / 3.0) - 1.0).sqrt();
        assert!((hi / (600e6 * k) - 1.0).abs() < 0.02, "hi {hi}");
        assert!((lo / (6e6 / k) - 1.0).abs() < 0.02, "lo {lo}");
    }

    #[test]
    fn composite_response_is_product() {
        let a = first_stage(PowerMode::High);
        let b = first_stage(PowerMode::Low);
        let c = cascade(&[a.clone(), b.clone()]).unwrap();
        for &f in &[1e6, 6e6, 60e6, 600e6, 2e9] {
            let p = a.response_at(f).unwrap() * b.response_at(f).unwrap();
            assert!((c.response_at(f).unwrap() - p).norm() < 1e-9 * p.norm());
        }
    }
}

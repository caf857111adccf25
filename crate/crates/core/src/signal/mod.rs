//! Uniformly sampled waveforms and the primitives built on them.
//!
//! A [`Waveform`] is a real-valued voltage trace with an explicit sample
//! rate and start time. Sample `i` is the instantaneous value at
//! `t0 + i / sample_rate`; the duration is `len / sample_rate`.

mod edges;
mod fft;
pub mod filter;
mod noise;
mod spectrum;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

pub use crate::analog::apply_linear_stage;
pub use edges::{threshold_crossings, Direction, EdgeEvent};
pub use fft::{fft_in_place, ifft_in_place};
pub use noise::{add_gaussian_noise, add_noise_with, white_noise};
pub use spectrum::{spectrum_of, Spectrum, SpectrumKind};

/// Default simulation sample rate, 10 GSa/s.
pub const DEFAULT_SAMPLE_RATE: f64 = 10e9;

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    sample_rate: f64,
    t0: f64,
    samples: Vec<f64>,
}

/// Number of samples covering `duration` at `sample_rate`, i.e.
/// `ceil(duration * sample_rate)` with products that are integral up to
/// rounding noise treated as exact.
pub fn sample_count(duration: f64, sample_rate: f64) -> usize {
    let x = duration * sample_rate;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// A waveform of `ceil(duration * sample_rate)` samples equal to `fill`, starting at t = 0.
pub fn make_waveform(duration: f64, sample_rate: f64, fill: f64) -> Result<Waveform> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(invalid!("duration must be positive, got {duration}"));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(invalid!("sample rate must be positive, got {sample_rate}"));
    }
    let n = sample_count(duration, sample_rate).max(1);
    Ok(Waveform {
        sample_rate,
        t0: 0.0,
        samples: vec![fill; n],
    })
}

impl Waveform {
    pub fn from_samples(sample_rate: f64, t0: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(invalid!("sample rate must be positive, got {sample_rate}"));
        }
        if samples.is_empty() {
            return Err(invalid!("waveform needs at least one sample"));
        }
        if !t0.is_finite() {
            return Err(invalid!("start time must be finite"));
        }
        Ok(Self {
            sample_rate,
            t0,
            samples,
        })
    }

    /// Samples `f(t)` on the grid `t0 + i / sample_rate`, `i < n`.
    pub fn from_fn(sample_rate: f64, t0: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let dt = 1.0 / sample_rate;
        let samples = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Self::from_samples(sample_rate, t0, samples)
    }

    #[inline]
    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Instant of sample `i`.
    #[inline]
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// Instant one sample past the last one.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration()
    }

    /// Copy with the same timing and new sample values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            sample_rate: self.sample_rate,
            t0: self.t0,
            samples,
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    /// Errors unless `other` shares this waveform's rate, start time and length.
    pub fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::RateMismatch(self.sample_rate, other.sample_rate));
        }
        let tol = 1e-3 / self.sample_rate;
        if (self.t0 - other.t0).abs() > tol || self.len() != other.len() {
            return Err(Error::Misaligned(self.t0, other.t0, self.len(), other.len()));
        }
        Ok(())
    }

    /// Sample-wise `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Waveform, b: f64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Waveform) -> Result<Self> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Waveform) -> Result<Self> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// Index and value of the largest sample.
    pub fn max(&self) -> (usize, f64) {
        self.samples
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
    }

    /// Index and value of the smallest sample.
    pub fn min(&self) -> (usize, f64) {
        self.samples
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Linearly interpolated value at time `t`, clamped to the end samples.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t - self.t0) * self.sample_rate;
        if x <= 0.0 {
            return self.samples[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        let frac = x - i as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    /// Sub-waveform of the samples with `t_from <= t < t_to`.
    pub fn window(&self, t_from: f64, t_to: f64) -> Result<Self> {
        let start = ((t_from - self.t0) * self.sample_rate).ceil().max(0.0) as usize;
        let stop = (((t_to - self.t0) * self.sample_rate).ceil().max(0.0) as usize).min(self.len());
        if start >= stop {
            return Err(invalid!("window [{t_from}, {t_to}) holds no samples"));
        }
        Ok(Self {
            sample_rate: self.sample_rate,
            t0: self.time_at(start),
            samples: self.samples[start..stop].to_vec(),
        })
    }
}

/// Amplitude of the tone at `freq` in the samples at or after `t_from`,
/// from a least-squares fit of `a cos + b sin + c`.
pub fn tone_amplitude(w: &Waveform, freq: f64, t_from: f64) -> f64 {
    let omega = 2.0 * core::f64::consts::PI * freq;
    // normal equations for columns [cos, sin, 1]
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (i, &v) in w.samples().iter().enumerate() {
        let t = w.time_at(i);
        if t < t_from {
            continue;
        }
        let (s, c) = (omega * t).sin_cos();
        let basis = [c, s, 1.0];
        for a in 0..3 {
            r[a] += basis[a] * v;
            for b in 0..3 {
                m[a][b] += basis[a] * basis[b];
            }
        }
    }
    let x = solve3(m, r);
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        r.swap(col, pivot);
        let p = m[col][col];
        if p.abs() < 1e-300 {
            continue;
        }
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / p;
                for k in 0..3 {
                    m[row][k] -= f * m[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    [
        r[0] / m[0][0],
        r[1] / m[1][1],
        if m[2][2].abs() < 1e-300 { 0.0 } else { r[2] / m[2][2] },
    ]
}

/// 10 %–90 % rise time of the first upward transition between the
/// waveform's initial and final levels.
pub fn rise_time_10_90(w: &Waveform) -> Option<f64> {
    let lo = w.samples()[0];
    let hi = w.samples()[w.len() - 1];
    if hi <= lo {
        return None;
    }
    let l10 = lo + 0.1 * (hi - lo);
    let l90 = lo + 0.9 * (hi - lo);
    let t10 = threshold_crossings(w, l10, Direction::Rising).first()?.time;
    let t90 = threshold_crossings(w, l90, Direction::Rising)
        .into_iter()
        .find(|e| e.time >= t10)?
        .time;
    Some(t90 - t10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_waveform_counts_and_fill() {
        let w = make_waveform(1e-6, 1e10, 0.0).unwrap();
        assert_eq!(w.len(), 10_000);
        assert!(w.samples().iter().all(|&v| v == 0.0));
        assert_eq!(w.t0(), 0.0);

        let w = make_waveform(1e-7, 1e9, 0.5).unwrap();
        assert_eq!(w.len(), 100);
        assert!(w.samples().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn make_waveform_rejects_empty() {
        assert!(matches!(make_waveform(0.0, 1e9, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_waveform(1e-9, 0.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_waveform(-1.0, 1e9, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn partial_sample_rounds_up() {
        assert_eq!(make_waveform(1.05e-9, 1e10, 0.0).unwrap().len(), 11);
    }

    #[test]
    fn binary_ops_require_matching_grids() {
        let a = make_waveform(1e-8, 1e10, 1.0).unwrap();
        let b = make_waveform(1e-8, 5e9, 1.0).unwrap();
        assert!(matches!(a.add(&b), Err(Error::RateMismatch(..))));
        let c = a.clone().with_t0(1e-9);
        assert!(matches!(a.add(&c), Err(Error::Misaligned(..))));
        let d = a.add(&a).unwrap();
        assert!(d.samples().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn tone_fit_recovers_amplitude() {
        let w = Waveform::from_fn(1e10, 0.0, 4000, |t| {
            0.3 * (2.0 * core::f64::consts::PI * 1.7e8 * t + 0.4).sin() + 0.05
        })
        .unwrap();
        assert!((tone_amplitude(&w, 1.7e8, 0.0) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn interpolated_value() {
        let w = Waveform::from_samples(1.0, 0.0, alloc::vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(w.value_at(0.5), 1.0);
        assert_eq!(w.value_at(-3.0), 0.0);
        assert_eq!(w.value_at(9.0), 4.0);
    }
}

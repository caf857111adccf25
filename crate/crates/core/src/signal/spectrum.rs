#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::{fft_in_place, Waveform};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Peak amplitude per bin (V).
    Amplitude,
    /// Power spectral density (V^2/Hz).
    PowerDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub kind: SpectrumKind,
}

/// One-sided amplitude spectrum on the grid `k * sample_rate / N`,
/// `k = 0..=N/2`.
///
/// Scaling: the 0 Hz bin (and the Nyquist bin for even `N`) hold `|X_k| / N`,
/// every other bin holds `2 |X_k| / N`, so a bin-centred sine of amplitude `A`
/// reads `A` and a constant reads its value. Parseval then takes the form
/// `mean(x^2) = a_0^2 + a_nyq^2 + sum a_k^2 / 2`.
pub fn spectrum_of(w: &Waveform) -> Result<Spectrum> {
    let n = w.len();
    if n < 2 {
        return Err(invalid!("spectrum needs at least 2 samples, got {n}"));
    }
    let mut buf: Vec<Complex64> = w.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    let half = n / 2;
    let nf = n as f64;
    let freqs = (0..=half).map(|k| k as f64 * w.sample_rate() / nf).collect();
    let magnitude = (0..=half)
        .map(|k| {
            let a = buf[k].norm() / nf;
            if k == 0 || (n.is_multiple_of(2) && k == half) {
                a
            } else {
                2.0 * a
            }
        })
        .collect();
    Ok(Spectrum {
        freqs,
        magnitude,
        kind: SpectrumKind::Amplitude,
    })
}

impl Spectrum {
    /// Index of the bin nearest `freq`.
    pub fn bin_of(&self, freq: f64) -> usize {
        let df = self.freqs.get(1).copied().unwrap_or(1.0) - self.freqs[0];
        ((freq - self.freqs[0]) / df).round().clamp(0.0, (self.freqs.len() - 1) as f64) as usize
    }

    /// Index and magnitude of the strongest bin.
    pub fn peak(&self) -> (usize, f64) {
        self.magnitude
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a })
    }

    /// Sum of squared magnitudes over bins with `lo <= f < hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.magnitude)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(_, m)| m * m)
            .sum()
    }

    /// Mean-square value reconstructed through the Parseval relation.
    pub fn mean_square(&self, n_samples: usize) -> f64 {
        let last = self.magnitude.len() - 1;
        self.magnitude
            .iter()
            .enumerate()
            .map(|(k, m)| {
                if k == 0 || (n_samples.is_multiple_of(2) && k == last) {
                    m * m
                } else {
                    m * m / 2.0
                }
            })
            .sum()
    }
}

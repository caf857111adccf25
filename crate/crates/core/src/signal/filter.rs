//! Recursive filter sections obtained from analog prototypes by the
//! bilinear transform.
//!
//! First-order sections are prewarped so that the magnitude response below
//! `sample_rate / 10` stays within 2 % of the analog prototype for any
//! corner below Nyquist. High-pass corners up to about `sample_rate / 14`
//! land exactly; low-pass sections split the warping error over the band.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use super::Waveform;

/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

fn bilinear_k(prewarp_hz: f64, sample_rate: f64) -> f64 {
    2.0 * PI * prewarp_hz / (PI * prewarp_hz / sample_rate).tan()
}

/// Frequency whose warping ratio `tan(x)/x` is the geometric mean of the
/// ratios at 0 and at `sample_rate / 10`, found by bisection. Prewarping
/// there splits the warping error evenly over the band.
fn balanced_prewarp(sample_rate: f64) -> f64 {
    let band = sample_rate / 10.0;
    let ratio = |f: f64| {
        let x = PI * f / sample_rate;
        x.tan() / x
    };
    let target = ratio(band).sqrt();
    let (mut lo, mut hi) = (band * 1e-3, band);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Section {
    pub const IDENTITY: Section = Section {
        b: [1.0, 0.0, 0.0],
        a: [0.0, 0.0],
    };

    /// Bilinear image of `(n0 + n1 s) / (d0 + d1 s)`.
    pub fn first_order_from_analog(num: [f64; 2], den: [f64; 2], k: f64) -> Self {
        let b0 = num[0] + num[1] * k;
        let b1 = num[0] - num[1] * k;
        let a0 = den[0] + den[1] * k;
        let a1 = den[0] - den[1] * k;
        Section {
            b: [b0 / a0, b1 / a0, 0.0],
            a: [a1 / a0, 0.0],
        }
    }

    /// Bilinear image of `(n0 + n1 s + n2 s^2) / (d0 + d1 s + d2 s^2)`.
    pub fn second_order_from_analog(num: [f64; 3], den: [f64; 3], k: f64) -> Self {
        let k2 = k * k;
        let n = [
            num[0] + num[1] * k + num[2] * k2,
            2.0 * num[0] - 2.0 * num[2] * k2,
            num[0] - num[1] * k + num[2] * k2,
        ];
        let d = [
            den[0] + den[1] * k + den[2] * k2,
            2.0 * den[0] - 2.0 * den[2] * k2,
            den[0] - den[1] * k + den[2] * k2,
        ];
        Section {
            b: [n[0] / d[0], n[1] / d[0], n[2] / d[0]],
            a: [d[1] / d[0], d[2] / d[0]],
        }
    }

    /// First-order low-pass with unity DC gain.
    pub fn low_pass(corner: f64, sample_rate: f64) -> Self {
        let wc = 2.0 * PI * corner;
        let k = bilinear_k(balanced_prewarp(sample_rate), sample_rate);
        Self::first_order_from_analog([1.0, 0.0], [1.0, 1.0 / wc], k)
    }

    /// First-order high-pass with unity high-frequency gain.
    pub fn high_pass(corner: f64, sample_rate: f64) -> Self {
        let wc = 2.0 * PI * corner;
        let k = bilinear_k(corner.min(balanced_prewarp(sample_rate)), sample_rate);
        Self::first_order_from_analog([0.0, 1.0 / wc], [1.0, 1.0 / wc], k)
    }

    /// Second-order band-pass centred at `center` with unity peak gain and
    /// -3 dB bandwidth `bandwidth`.
    pub fn band_pass(center: f64, bandwidth: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * center;
        let bw = 2.0 * PI * bandwidth;
        let k = bilinear_k(center, sample_rate);
        Self::second_order_from_analog([0.0, bw, 0.0], [w0 * w0, bw, 1.0], k)
    }

    /// Second-order low-pass `w0^2 / (s^2 + 2 zeta w0 s + w0^2)`.
    pub fn resonant_low_pass(natural: f64, damping: f64, sample_rate: f64) -> Self {
        let w0 = 2.0 * PI * natural;
        let k = bilinear_k(natural.min(sample_rate / 10.0), sample_rate);
        Self::second_order_from_analog([w0 * w0, 0.0, 0.0], [w0 * w0, 2.0 * damping * w0, 1.0], k)
    }

    /// Filters `x` from a zero initial state.
    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }

    pub fn apply(&self, w: &Waveform) -> Waveform {
        w.with_samples(self.process(w.samples()))
    }

    /// Frequency response at `freq` for the given sample rate.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        num / den
    }

    /// `sqrt(sum h[n]^2)` of the impulse response, the RMS gain for white input.
    pub fn noise_gain(&self) -> f64 {
        impulse_energy(core::slice::from_ref(self)).sqrt()
    }
}

/// Energy of the impulse response of the cascade `sections`.
pub fn impulse_energy(sections: &[Section]) -> f64 {
    const BLOCK: usize = 4096;
    const MAX_BLOCKS: usize = 4096;
    let mut states = alloc::vec![[0.0f64; 4]; sections.len()];
    let mut energy = 0.0;
    let mut n = 0usize;
    for block in 0..MAX_BLOCKS {
        let mut block_energy = 0.0;
        for _ in 0..BLOCK {
            let mut v = if n == 0 { 1.0 } else { 0.0 };
            for (s, st) in sections.iter().zip(states.iter_mut()) {
                let y = s.b[0] * v + s.b[1] * st[0] + s.b[2] * st[1] - s.a[0] * st[2] - s.a[1] * st[3];
                st[1] = st[0];
                st[0] = v;
                st[3] = st[2];
                st[2] = y;
                v = y;
            }
            block_energy += v * v;
            n += 1;
        }
        energy += block_energy;
        if block > 0 && block_energy <= 1e-16 * energy {
            break;
        }
    }
    energy
}

/// Applies `sections` in order.
pub fn cascade_process(sections: &[Section], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for s in sections {
        y = s.process(&y);
    }
    y
}

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Waveform;
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// `n` independent N(0, sigma^2) draws.
pub fn white_noise<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return alloc::vec![0.0; n];
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Adds white Gaussian noise drawn from `rng`.
pub fn add_noise_with<R: Rng + ?Sized>(w: &Waveform, sigma: f64, rng: &mut R) -> Result<Waveform> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid!("noise sigma must be non-negative, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(w.clone());
    }
    let noise = white_noise(w.len(), sigma, rng);
    Ok(w.with_samples(w.samples().iter().zip(noise).map(|(v, n)| v + n).collect()))
}

/// Adds independent N(0, sigma^2) noise to every sample; identical seeds
/// give bit-identical output.
pub fn add_gaussian_noise(w: &Waveform, sigma: f64, seed: u64) -> Result<Waveform> {
    add_noise_with(w, sigma, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let w = Waveform::from_fn(1e9, 0.0, 100, |t| t * 1e6).unwrap();
        assert_eq!(add_gaussian_noise(&w, 0.0, 3).unwrap(), w);
    }

    #[test]
    fn negative_sigma_rejected() {
        let w = Waveform::from_samples(1e9, 0.0, alloc::vec![0.0; 4]).unwrap();
        assert!(add_gaussian_noise(&w, -1e-3, 0).is_err());
    }

    #[test]
    fn deterministic_and_correct_spread() {
        let w = Waveform::from_samples(1e10, 0.0, alloc::vec![0.25; 1_000_000]).unwrap();
        let a = add_gaussian_noise(&w, 1e-3, 11).unwrap();
        let b = add_gaussian_noise(&w, 1e-3, 11).unwrap();
        assert_eq!(a, b);
        let d: Vec<f64> = a.samples().iter().map(|v| v - 0.25).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() / 1e-3 - 1.0).abs() < 0.01);
    }
}

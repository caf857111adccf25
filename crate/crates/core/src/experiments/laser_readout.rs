#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use super::report::{ExperimentReport, Table};
use crate::analog::{readout_jitter, transduce_optical, JitterEstimate, JitterSetup, ReadoutKind};
use crate::error::{invalid, Result};
use crate::rng::{sub_rng, sub_seed};
use crate::signal::spectrum_of;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LaserReadoutConfig {
    pub setup: JitterSetup,
    /// Monte-Carlo trials per readout for the jitter estimates.
    pub n_trials: usize,
    /// Noisy traces whose power spectra are averaged.
    pub spectrum_traces: usize,
    /// Lower edge of the search band for the link-noise peak (Hz).
    pub noise_search_min: f64,
}

impl Default for LaserReadoutConfig {
    fn default() -> Self {
        Self {
            setup: JitterSetup::default(),
            n_trials: 2000,
            spectrum_traces: 16,
            noise_search_min: 100e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserReadoutOutcome {
    /// Laser link, conventional, cryogenic, in that order.
    pub jitter: Vec<JitterEstimate>,
    /// Fraction of laser-link trials whose edge was found in the timing gate.
    pub success_rate: f64,
    /// Strongest frequency of the unfiltered photodiode spectrum above the
    /// search edge (Hz).
    pub noise_peak: f64,
    /// Power reduction by the read-out filter above twice its cutoff (dB).
    pub filter_rejection_db: f64,
    pub freqs: Vec<f64>,
    /// Averaged amplitude spectra before and after the low-pass (V).
    pub pre_filter: Vec<f64>,
    pub post_filter: Vec<f64>,
}

/// The optical readout study: one reconstructed click trace, averaged
/// spectra before and after the read-out filter, edge-finding success and
/// the jitter of all three readouts.
pub fn run_laser_readout(cfg: &LaserReadoutConfig, seed: u64) -> Result<(LaserReadoutOutcome, ExperimentReport)> {
    cfg.setup.validate()?;
    if cfg.spectrum_traces == 0 {
        return Err(invalid!("laser_readout.spectrum_traces must be positive"));
    }
    let s = &cfg.setup;
    let sign = s.cryo_chain.sign();
    let trace = |k: u64| -> Result<_> {
        let mut rng = sub_rng(sub_seed(seed, 1), k);
        let mut w = crate::Waveform::from_samples(
            s.sample_rate,
            0.0,
            alloc::vec![0.0; crate::signal::sample_count(s.window, s.sample_rate)],
        )?;
        s.detector.add_pulse(&mut w, 1, s.pulse_time, 1.0);
        let drive = s.cryo_chain.apply_noisy(&w, &mut rng)?.scale(sign);
        let link_seed = rng.random();
        Ok((drive.clone(), transduce_optical(&s.laser, &drive, link_seed)?))
    };

    let mut pre_power: Vec<f64> = Vec::new();
    let mut post_power: Vec<f64> = Vec::new();
    let mut freqs = Vec::new();
    for k in 0..cfg.spectrum_traces as u64 {
        let (_, r) = trace(k)?;
        let a = spectrum_of(&r.unfiltered)?;
        let b = spectrum_of(&r.filtered)?;
        if pre_power.is_empty() {
            pre_power = alloc::vec![0.0; a.magnitude.len()];
            post_power = alloc::vec![0.0; b.magnitude.len()];
            freqs = a.freqs.clone();
        }
        for (p, m) in pre_power.iter_mut().zip(&a.magnitude) {
            *p += m * m;
        }
        for (p, m) in post_power.iter_mut().zip(&b.magnitude) {
            *p += m * m;
        }
    }
    let n = cfg.spectrum_traces as f64;
    let pre_filter: Vec<f64> = pre_power.iter().map(|p| (p / n).sqrt()).collect();
    let post_filter: Vec<f64> = post_power.iter().map(|p| (p / n).sqrt()).collect();
    let noise_peak = freqs
        .iter()
        .zip(&pre_filter)
        .filter(|(f, _)| **f >= cfg.noise_search_min)
        .fold((0.0, f64::NEG_INFINITY), |a, (&f, &m)| if m > a.1 { (f, m) } else { a })
        .0;
    let edge = 2.0 * s.laser.lowpass_cutoff;
    let band = |v: &[f64]| freqs.iter().zip(v).filter(|(f, _)| **f >= edge).map(|(_, m)| m * m).sum::<f64>();
    let filter_rejection_db = 10.0 * (band(&pre_filter) / band(&post_filter)).log10();

    let jitter = ReadoutKind::ALL
        .iter()
        .map(|&k| readout_jitter(s, k, cfg.n_trials, sub_seed(seed, 2)))
        .collect::<Result<Vec<_>>>()?;
    let laser = jitter[0];
    let success_rate = laser.detected as f64 / laser.trials as f64;

    let mut report = ExperimentReport::new("laser_readout", seed);
    report.param("n_trials", cfg.n_trials);
    report.param("spectrum_traces", cfg.spectrum_traces);
    report.param("link_noise_sigma_v", s.laser.link_noise_sigma);
    report.param("lowpass_cutoff_hz", s.laser.lowpass_cutoff);

    let (drive, r) = trace(0)?;
    let mut t = Table::new("trace", &["time_ns", "drive_v", "unfiltered_v", "filtered_v"]);
    for i in 0..drive.len() {
        t.push(alloc::vec![
            drive.time_at(i) * 1e9,
            drive.samples()[i],
            r.unfiltered.samples()[i],
            r.filtered.samples()[i]
        ])?;
    }
    report.tables.push(t);

    let mut t = Table::new("spectra", &["freq_hz", "pre_filter_v", "post_filter_v"]);
    for i in 0..freqs.len() {
        t.push(alloc::vec![freqs[i], pre_filter[i], post_filter[i]])?;
    }
    report.tables.push(t);

    let mut t = Table::new("jitter", &["jitter_ps", "mean_offset_ps", "detected", "trials"]);
    for j in &jitter {
        t.push_labeled(
            j.kind.name(),
            alloc::vec![
                j.std * 1e12,
                j.mean_offset * 1e12,
                j.detected as f64,
                j.trials as f64,
            ],
        )?;
        report.metric(&format!("jitter_{}", j.kind.name()), "ps", j.std * 1e12);
    }
    report.tables.push(t);
    report.metric("edge_success_rate", "fraction", success_rate);
    report.metric("noise_peak", "Hz", noise_peak);
    report.metric("filter_cutoff", "Hz", s.laser.lowpass_cutoff);
    report.metric("filter_rejection", "dB", filter_rejection_db);

    let outcome = LaserReadoutOutcome {
        jitter,
        success_rate,
        noise_peak,
        filter_rejection_db,
        freqs,
        pre_filter,
        post_filter,
    };
    Ok((outcome, report))
}

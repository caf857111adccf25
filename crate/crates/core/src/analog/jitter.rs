#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use core::str::FromStr;

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::chain::Chain;
use super::laser::{transduce_optical, LaserLink};
use super::stage::{first_stage, BandPassStage, PowerMode};
use crate::error::{invalid, Error, Result};
use crate::rng::sub_rng;
use crate::signal::{sample_count, threshold_crossings, Direction, Waveform};
use crate::snspd::SnspdModel;

/// The three detector readouts compared for timing jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ReadoutKind {
    /// Amplifiers at the detector stage, electrical line out.
    CryoAmplified,
    /// Passive line out to a room-temperature amplifier.
    Conventional,
    /// Cryogenic amplifier driving a laser diode, photodiode at room temperature.
    LaserLink,
}

impl ReadoutKind {
    pub const ALL: [ReadoutKind; 3] = [ReadoutKind::LaserLink, ReadoutKind::Conventional, ReadoutKind::CryoAmplified];

    pub fn name(self) -> &'static str {
        match self {
            ReadoutKind::CryoAmplified => "cryo_amplified",
            ReadoutKind::Conventional => "conventional",
            ReadoutKind::LaserLink => "laser_link",
        }
    }
}

impl FromStr for ReadoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "cryo_amplified" | "cryo" => Ok(ReadoutKind::CryoAmplified),
            "conventional" => Ok(ReadoutKind::Conventional),
            "laser_link" | "laser" => Ok(ReadoutKind::LaserLink),
            _ => Err(invalid!("unknown readout configuration '{s}'")),
        }
    }
}

/// Everything needed to simulate single-photon timing through each readout.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct JitterSetup {
    pub detector: SnspdModel,
    /// Cryogenic amplifier chain, also the laser drive.
    pub cryo_chain: Chain,
    /// Room-temperature amplifier of the conventional readout.
    pub conventional_chain: Chain,
    pub laser: LaserLink,
    /// Timing threshold as a fraction of the clean pulse peak.
    pub threshold_fraction: f64,
    /// Detector timing jitter, common to all readouts (s).
    pub intrinsic_jitter: f64,
    pub sample_rate: f64,
    /// Trace length (s).
    pub window: f64,
    /// Absorption time within the trace (s).
    pub pulse_time: f64,
}

impl Default for JitterSetup {
    fn default() -> Self {
        let cryo = first_stage(PowerMode::High).with_noise(0.3e-3);
        let second = first_stage(PowerMode::High);
        let rt = BandPassStage {
            gain_db: 40.0,
            f_low: 1e6,
            f_high: 100e6,
            inverting: false,
            power_dissipation: 0.0,
            input_return_loss_db: -15.0,
            reverse_isolation_db: -40.0,
            added_noise_sigma: 8.5e-3,
        };
        Self {
            detector: SnspdModel::default(),
            cryo_chain: Chain::new(alloc::vec![cryo, second]).expect("valid stages"),
            conventional_chain: Chain::new(alloc::vec![rt]).expect("valid stage"),
            laser: LaserLink {
                link_noise_sigma: 0.08,
                ..LaserLink::default()
            },
            threshold_fraction: 0.5,
            intrinsic_jitter: 40e-12,
            sample_rate: 10e9,
            window: 200e-9,
            pulse_time: 20e-9,
        }
    }
}

/// Monte-Carlo timing statistics of one readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterEstimate {
    pub kind: ReadoutKind,
    /// Standard deviation of the crossing time about the noise-free crossing (s).
    pub std: f64,
    /// Mean offset from the noise-free crossing (s).
    pub mean_offset: f64,
    /// Noise-free crossing time (s).
    pub clean_crossing: f64,
    pub detected: usize,
    pub trials: usize,
}

impl JitterSetup {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.laser.validate()?;
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(invalid!("jitter.threshold_fraction must lie in (0, 1)"));
        }
        if !(self.intrinsic_jitter >= 0.0) {
            return Err(invalid!("jitter.intrinsic_jitter must be non-negative"));
        }
        if !(self.sample_rate > 0.0) || !(self.window > self.pulse_time) || !(self.pulse_time >= 0.0) {
            return Err(invalid!("jitter window must contain the pulse time"));
        }
        Ok(())
    }

    fn pulse(&self, t0: f64) -> Result<Waveform> {
        let mut w = Waveform::from_samples(
            self.sample_rate,
            0.0,
            alloc::vec![0.0; sample_count(self.window, self.sample_rate)],
        )?;
        self.detector.add_pulse(&mut w, 1, t0, 1.0);
        Ok(w)
    }

    /// Readout output for a pulse at `t0`, sign-corrected so the pulse is
    /// positive. `rng = None` gives the noise-free trace.
    pub fn readout<R: Rng + ?Sized>(&self, kind: ReadoutKind, t0: f64, rng: Option<&mut R>) -> Result<Waveform> {
        let w = self.pulse(t0)?;
        let cryo_sign = self.cryo_chain.sign();
        Ok(match (kind, rng) {
            (ReadoutKind::CryoAmplified, None) => self.cryo_chain.apply(&w)?.scale(cryo_sign),
            (ReadoutKind::CryoAmplified, Some(r)) => self.cryo_chain.apply_noisy(&w, r)?.scale(cryo_sign),
            (ReadoutKind::Conventional, None) => {
                let c = &self.conventional_chain;
                c.apply(&w)?.scale(c.sign())
            }
            (ReadoutKind::Conventional, Some(r)) => {
                let c = &self.conventional_chain;
                c.apply_noisy(&w, r)?.scale(c.sign())
            }
            // the drive is sign-corrected so the pulse raises the optical power
            (ReadoutKind::LaserLink, None) => {
                let drive = self.cryo_chain.apply(&w)?.scale(cryo_sign);
                let quiet = LaserLink {
                    link_noise_sigma: 0.0,
                    ..self.laser.clone()
                };
                transduce_optical(&quiet, &drive, 0)?.filtered
            }
            (ReadoutKind::LaserLink, Some(r)) => {
                let drive = self.cryo_chain.apply_noisy(&w, r)?.scale(cryo_sign);
                transduce_optical(&self.laser, &drive, r.random())?.filtered
            }
        })
    }
}

/// First rising crossing of `level` in `[from, to]`.
fn first_crossing(w: &Waveform, level: f64, from: f64, to: f64) -> Option<f64> {
    threshold_crossings(w, level, Direction::Rising)
        .into_iter()
        .map(|e| e.time)
        .find(|&t| t >= from && t <= to)
}

/// Monte-Carlo timing jitter of `kind` over `n_trials` noisy single-photon
/// pulses. Each trial shifts the absorption time by the intrinsic jitter and
/// adds fresh readout noise; the threshold is fixed at `threshold_fraction`
/// of the noise-free peak. Only crossings between the absorption time and
/// twice the noise-free time-to-peak count; trials without one are missed.
pub fn readout_jitter(setup: &JitterSetup, kind: ReadoutKind, n_trials: usize, seed: u64) -> Result<JitterEstimate> {
    setup.validate()?;
    if n_trials < 2 {
        return Err(invalid!("jitter estimation needs at least two trials"));
    }
    let clean = setup.readout::<crate::rng::SimRng>(kind, setup.pulse_time, None)?;
    let level = setup.threshold_fraction * clean.max().1;
    let t_clean = first_crossing(&clean, level, 0.0, f64::INFINITY)
        .ok_or_else(|| invalid!("noise-free {} readout never crosses its threshold", kind.name()))?;
    // timing gate: from absorption to twice the clean time-to-peak
    let t_peak = clean.time_at(clean.max().0);
    let gate_end = t_peak + (t_peak - setup.pulse_time);
    let intrinsic = Normal::new(0.0, setup.intrinsic_jitter).map_err(|_| invalid!("bad intrinsic jitter"))?;
    let mut offsets = Vec::with_capacity(n_trials);
    for k in 0..n_trials {
        let mut rng = sub_rng(seed, k as u64);
        let t0 = setup.pulse_time + intrinsic.sample(&mut rng);
        let w = setup.readout(kind, t0, Some(&mut rng))?;
        if let Some(t) = first_crossing(&w, level, setup.pulse_time, gate_end) {
            offsets.push(t - t_clean);
        }
    }
    let n = offsets.len();
    if n < 2 {
        return Err(invalid!("fewer than two {} trials crossed the threshold", kind.name()));
    }
    let mean = offsets.iter().sum::<f64>() / n as f64;
    let var = offsets.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(JitterEstimate {
        kind,
        std: var.sqrt(),
        mean_offset: mean,
        clean_crossing: t_clean,
        detected: n,
        trials: n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_kinds() {
        assert_eq!("laser-link".parse::<ReadoutKind>().unwrap(), ReadoutKind::LaserLink);
        assert_eq!("cryo_amplified".parse::<ReadoutKind>().unwrap(), ReadoutKind::CryoAmplified);
        assert!(matches!("scope".parse::<ReadoutKind>(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn noise_free_jitter_is_sub_sample() {
        let mut s = JitterSetup {
            intrinsic_jitter: 0.0,
            ..Default::default()
        };
        s.laser.link_noise_sigma = 0.0;
        let quiet = |c: &Chain| Chain::new(c.stages().iter().map(|st| st.clone().with_noise(0.0)).collect()).unwrap();
        s.cryo_chain = quiet(&s.cryo_chain);
        s.conventional_chain = quiet(&s.conventional_chain);
        for kind in ReadoutKind::ALL {
            let j = readout_jitter(&s, kind, 20, 1).unwrap();
            assert!(j.std < 1.0 / s.sample_rate, "{kind:?} {}", j.std);
        }
    }

    #[test]
    fn deterministic() {
        let s = JitterSetup::default();
        let a = readout_jitter(&s, ReadoutKind::CryoAmplified, 50, 8).unwrap();
        let b = readout_jitter(&s, ReadoutKind::CryoAmplified, 50, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_triple_is_ordered_near_targets() {
        let s = JitterSetup::default();
        let j: Vec<f64> = ReadoutKind::ALL
            .iter()
            .map(|&k| readout_jitter(&s, k, 1000, 21).unwrap().std)
            .collect();
        assert!(j[0] > j[1] && j[1] > j[2], "{j:?}");
        for (v, target) in j.iter().zip([1400e-12, 500e-12, 70e-12]) {
            assert!((v / target - 1.0).abs() < 0.3, "{v} vs {target}");
        }
    }

    #[test]
    fn quiet_link_approaches_electrical_jitter() {
        let mut s = JitterSetup::default();
        s.laser.link_noise_sigma = 0.0;
        let laser = readout_jitter(&s, ReadoutKind::LaserLink, 400, 4).unwrap().std;
        let noisy = readout_jitter(&JitterSetup::default(), ReadoutKind::LaserLink, 400, 4).unwrap().std;
        assert!(laser < 0.25 * noisy, "{laser} {noisy}");
    }
}

use super::report::{ExperimentReport, Table};
use crate::analog::{first_stage, Chain, PowerMode};
use crate::error::{invalid, Result};
use crate::modulator::EoModulator;
use crate::rng::rng_from_seed;
use crate::signal::{sample_count, threshold_crossings, Direction};
use crate::snspd::{array_waveform, DetectionEvent, MultiplexedArray, SnspdModel};
use crate::trigger::{window_network, DigitalWaveform, GateSet, ModulatorDriver, TriggerPair};
use crate::Waveform;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SimulateConfig {
    pub detector: SnspdModel,
    pub array: MultiplexedArray,
    pub chain: Chain,
    pub triggers: TriggerPair,
    pub gates: GateSet,
    pub driver: ModulatorDriver,
    pub modulator: EoModulator,
    /// Fired pixels of the simulated event; 0 simulates an empty pulse.
    pub pixel_count: u32,
    pub switch_over: bool,
    /// Add the chain's noise.
    pub noisy: bool,
    pub sample_rate: f64,
    pub window: f64,
    pub pulse_time: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let stage = first_stage(PowerMode::High);
        Self {
            detector: SnspdModel::default(),
            array: MultiplexedArray::default(),
            chain: Chain::new(alloc::vec![stage.clone().with_noise(10e-6), stage.clone(), stage]).expect("valid stages"),
            triggers: TriggerPair::default(),
            gates: GateSet::default(),
            driver: ModulatorDriver::default(),
            modulator: EoModulator::default(),
            pixel_count: 1,
            switch_over: false,
            noisy: true,
            sample_rate: 10e9,
            window: 160e-9,
            pulse_time: 5e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub chain_peak: f64,
    /// The event's peak lies between the two thresholds.
    pub in_window: bool,
    pub driver_pulses: usize,
    /// Absorption to half of the peak transmission, if the modulator switched (s).
    pub switch_delay: Option<f64>,
    pub peak_transmission: f64,
}

/// One array event followed from the detector through amplification,
/// window discrimination and the driver to the modulator transmission.
pub fn run_simulation(cfg: &SimulateConfig, seed: u64) -> Result<(SimulateOutcome, ExperimentReport)> {
    cfg.array.validate()?;
    cfg.triggers.validate()?;
    cfg.gates.validate()?;
    if cfg.pixel_count > cfg.array.n_pixels || (cfg.switch_over && cfg.pixel_count < 2) {
        return Err(invalid!(
            "simulate.pixel_count must lie in 0..={} (at least 2 with switch_over)",
            cfg.array.n_pixels
        ));
    }
    if !(cfg.window > cfg.pulse_time) || !(cfg.pulse_time >= 0.0) {
        return Err(invalid!("simulate window must contain the pulse time"));
    }
    let ev = DetectionEvent {
        t0: cfg.pulse_time,
        n_photons: cfg.pixel_count,
        pixel_count: cfg.pixel_count,
        switch_over: cfg.switch_over,
    };
    // no fired pixel leaves only the chain noise
    let raw = if cfg.pixel_count == 0 {
        Waveform::from_samples(cfg.sample_rate, 0.0, alloc::vec![0.0; sample_count(cfg.window, cfg.sample_rate)])?
    } else {
        array_waveform(&cfg.array, &ev, &cfg.detector, cfg.window, cfg.sample_rate)?.scale(cfg.chain.sign())
    };
    let amplified = if cfg.noisy {
        cfg.chain.apply_noisy(&raw, &mut rng_from_seed(seed))?
    } else {
        cfg.chain.apply(&raw)?
    };
    let chain_peak = amplified.max().1;
    let sig = window_network(&cfg.triggers, &cfg.gates, &amplified)?;
    let drive = cfg.driver.drive(&sig.output, 0.0, cfg.window, cfg.sample_rate)?;
    let electrode = cfg.modulator.drive_response(&drive)?;
    let transmission = electrode.map(|v| cfg.modulator.transmission(v));
    let peak_transmission = transmission.max().1;
    let switch_delay = if sig.output.count_rising() > 0 && peak_transmission > 0.0 {
        threshold_crossings(&transmission, 0.5 * peak_transmission, Direction::Rising)
            .first()
            .map(|e| e.time - cfg.pulse_time)
    } else {
        None
    };
    let outcome = SimulateOutcome {
        chain_peak,
        in_window: chain_peak > cfg.triggers.lower.threshold && chain_peak <= cfg.triggers.upper.threshold,
        driver_pulses: sig.output.count_rising(),
        switch_delay,
        peak_transmission,
    };

    let mut report = ExperimentReport::new("simulate", seed);
    report.param("pixel_count", cfg.pixel_count);
    report.param("switch_over", cfg.switch_over);
    report.param("lower_threshold_v", cfg.triggers.lower.threshold);
    report.param("upper_threshold_v", cfg.triggers.upper.threshold);
    report.param("noisy", cfg.noisy);
    let bit = |d: &DigitalWaveform, t: f64| d.level_at(t).is_high() as u8 as f64;
    let mut t = Table::new(
        "trace",
        &[
            "time_ns",
            "array_v",
            "chain_v",
            "lower",
            "upper",
            "select_n",
            "driver_in",
            "driver_v",
            "electrode_v",
            "transmission",
        ],
    );
    for i in 0..raw.len() {
        let ti = raw.time_at(i);
        t.push(alloc::vec![
            ti * 1e9,
            raw.samples()[i] * cfg.chain.sign(),
            amplified.samples()[i],
            bit(&sig.lower, ti),
            bit(&sig.upper, ti),
            bit(&sig.select_n, ti),
            bit(&sig.output, ti),
            drive.samples()[i],
            electrode.samples()[i],
            transmission.samples()[i],
        ])?;
    }
    report.tables.push(t);
    report.metric("chain_peak", "V", chain_peak);
    report.metric("in_window", "bool", outcome.in_window as u8 as f64);
    report.metric("driver_pulses", "count", outcome.driver_pulses as f64);
    report.metric("peak_transmission", "fraction", peak_transmission);
    if let Some(d) = switch_delay {
        report.metric("switch_delay", "ns", d * 1e9);
    }
    Ok((outcome, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_switches_the_modulator() {
        let (o, r) = run_simulation(&SimulateConfig::default(), 1).unwrap();
        assert!(o.in_window);
        assert_eq!(o.driver_pulses, 1);
        let d = o.switch_delay.unwrap();
        // digital path plus driver and electrode rise
        assert!(d > 20e-9 && d < 26e-9, "{d}");
        assert!(o.peak_transmission > 0.99);
        assert!(r.table("trace").is_some());
    }

    #[test]
    fn two_pixels_are_blocked() {
        let cfg = SimulateConfig {
            pixel_count: 2,
            ..Default::default()
        };
        let (o, _) = run_simulation(&cfg, 1).unwrap();
        assert!(!o.in_window);
        assert_eq!(o.driver_pulses, 0);
        assert!(o.switch_delay.is_none());
        assert!(o.peak_transmission < 1e-9);
    }

    #[test]
    fn empty_pulse_is_noise_only() {
        let cfg = SimulateConfig {
            pixel_count: 0,
            ..Default::default()
        };
        let (o, r) = run_simulation(&cfg, 4).unwrap();
        assert_eq!(o.driver_pulses, 0);
        let t = r.table("trace").unwrap();
        assert!(t.column("lower").unwrap().iter().all(|&b| b == 0.0));
        assert!(t.column("chain_v").unwrap().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn bad_pixel_count_rejected() {
        let cfg = SimulateConfig {
            pixel_count: 9,
            ..Default::default()
        };
        assert!(run_simulation(&cfg, 1).is_err());
    }
}

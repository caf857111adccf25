#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::Rng;

use super::plateau::{find_plateaus, Plateau};
use super::report::{ExperimentReport, Table};
use crate::analog::{first_stage, Chain, PowerMode};
use crate::error::{invalid, Result};
use crate::rng::{sub_rng, sub_seed};
use crate::snspd::{array_event_with, array_waveform, detection::poisson, DetectionEvent, MultiplexedArray, PhotonSource, SnspdModel};
use crate::trigger::{trigger_response, window_logic, DigitalWaveform, GateSet, SchmittTrigger, TriggerPair};
use crate::Waveform;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SweepConfig {
    pub detector: SnspdModel,
    pub array: MultiplexedArray,
    pub source: PhotonSource,
    /// Amplifier cascade between the array and the triggers.
    pub chain: Chain,
    /// Trigger templates; their thresholds are overridden by the grid.
    pub triggers: TriggerPair,
    pub gates: GateSet,
    pub n_pulses: usize,
    pub grid_points: usize,
    /// Lowest and highest threshold of the grid (V).
    pub threshold_min: f64,
    pub threshold_max: f64,
    /// Noise realizations simulated per event shape.
    pub pool_size: usize,
    pub sample_rate: f64,
    /// Trace length per laser pulse (s).
    pub window: f64,
    /// Absorption time within the trace (s).
    pub pulse_time: f64,
    pub plateau_tolerance: f64,
    pub plateau_min_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let stage = first_stage(PowerMode::High);
        Self {
            detector: SnspdModel::default(),
            array: MultiplexedArray::default(),
            source: PhotonSource {
                rep_rate: 1e6,
                // populates the four-pixel level well enough that the
                // sub-percent switch-over steps stay inside the 2% flatness
                mean_photon_number: 4.0,
            },
            chain: Chain::new(alloc::vec![stage.clone().with_noise(10e-6), stage.clone(), stage]).expect("valid stages"),
            triggers: TriggerPair::default(),
            gates: GateSet::default(),
            n_pulses: 10_000,
            grid_points: 50,
            threshold_min: 0.005,
            threshold_max: 0.115,
            pool_size: 64,
            sample_rate: 10e9,
            window: 160e-9,
            pulse_time: 5e-9,
            plateau_tolerance: 0.02,
            plateau_min_points: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub thresholds: Vec<f64>,
    /// Noise-free chain-output peak for 1..=n_pixels fired pixels (V).
    pub ladder: Vec<f64>,
    /// Rising edges at the lower-trigger monitor per threshold 1.
    pub lower_counts: Vec<u64>,
    /// Rising edges at the upper-trigger monitor per threshold 2.
    pub upper_counts: Vec<u64>,
    /// `driver_counts[i][j]` for threshold 1 index `i`, threshold 2 index `j`.
    pub driver_counts: Vec<Vec<u64>>,
    pub lower_plateaus: Vec<Plateau>,
    pub upper_plateaus: Vec<Plateau>,
    /// Measurement time represented by the pulses (s).
    pub duration: f64,
}

impl SweepOutcome {
    /// `max(0, lower - upper)` for a cell.
    pub fn predicted(&self, i: usize, j: usize) -> f64 {
        (self.lower_counts[i] as f64 - self.upper_counts[j] as f64).max(0.0)
    }

    /// Fraction of cells where the driver count lies within `k` Poisson
    /// standard deviations of the prediction.
    pub fn agreement(&self, k: f64) -> f64 {
        let n = self.thresholds.len();
        let mut ok = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = self.predicted(i, j);
                if (self.driver_counts[i][j] as f64 - p).abs() <= k * p.max(1.0).sqrt() {
                    ok += 1;
                }
            }
        }
        ok as f64 / (n * n) as f64
    }

    /// Number of ladder steps below `threshold`.
    pub fn level_index(&self, threshold: f64) -> usize {
        self.ladder.iter().filter(|&&p| p < threshold).count()
    }

    /// Pixel number selected alone by the cell, or `None` if the window
    /// spans zero or several amplitude levels.
    pub fn selected_pixels(&self, i: usize, j: usize) -> Option<usize> {
        let a = self.level_index(self.thresholds[i]);
        let b = self.level_index(self.thresholds[j]);
        (b == a + 1 && a < self.ladder.len()).then_some(a + 1)
    }
}

/// Event shape key: fired pixels and switch-over flag.
type Shape = (u32, bool);

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.array.validate()?;
        self.source.validate()?;
        self.triggers.lower.validate()?;
        self.triggers.upper.validate()?;
        self.gates.validate()?;
        if self.n_pulses == 0 || self.pool_size == 0 || self.grid_points < 2 {
            return Err(invalid!("sweep needs pulses, a noise pool and at least two grid points"));
        }
        if !(self.threshold_max > self.threshold_min) {
            return Err(invalid!("sweep.threshold_max must exceed sweep.threshold_min"));
        }
        if !(self.window > self.pulse_time) || !(self.pulse_time >= 0.0) {
            return Err(invalid!("sweep window must contain the pulse time"));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n)
            .map(|k| self.threshold_min + (self.threshold_max - self.threshold_min) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// Chain output for an event shape; `rng = None` is noise-free. The
    /// array is biased negatively, which flips the detector pulse so the
    /// inverting cascade delivers a positive pulse.
    pub fn shape_trace<R: Rng + ?Sized>(&self, shape: Shape, rng: Option<&mut R>) -> Result<Waveform> {
        let ev = DetectionEvent {
            t0: self.pulse_time,
            n_photons: shape.0,
            pixel_count: shape.0,
            switch_over: shape.1,
        };
        let w = array_waveform(&self.array, &ev, &self.detector, self.window, self.sample_rate)?.scale(self.chain.sign());
        match rng {
            Some(r) => self.chain.apply_noisy(&w, r),
            None => self.chain.apply(&w),
        }
    }

    /// Noise-free peaks for 1..=n_pixels fired pixels.
    pub fn ladder(&self) -> Result<Vec<f64>> {
        (1..=self.array.n_pixels)
            .map(|k| Ok(self.shape_trace::<crate::rng::SimRng>((k, false), None)?.max().1))
            .collect()
    }
}

fn with_threshold(t: &SchmittTrigger, threshold: f64) -> SchmittTrigger {
    SchmittTrigger { threshold, ..t.clone() }
}

/// Two-dimensional threshold sweep of the array readout.
///
/// Laser pulses are drawn once: photons per pulse are Poisson(mu * eta),
/// each detection fires the array, and the event is assigned one of
/// `pool_size` noise realizations of its shape. Every grid cell then
/// evaluates the same pulses, so the differences between cells stem only
/// from the thresholds.
pub fn run_threshold_sweep(cfg: &SweepConfig, seed: u64) -> Result<(SweepOutcome, ExperimentReport)> {
    cfg.validate()?;
    let ladder = cfg.ladder()?;
    if !(cfg.threshold_min < ladder[0]) || !(cfg.threshold_max > ladder[ladder.len() - 1]) {
        return Err(invalid!(
            "sweep grid [{}, {}] V does not cover the amplitude ladder [{}, {}] V",
            cfg.threshold_min,
            cfg.threshold_max,
            ladder[0],
            ladder[ladder.len() - 1]
        ));
    }
    let eta = cfg.detector.efficiency_at_bias(cfg.detector.i_bias)?;
    let mean = cfg.source.mean_photon_number * eta.efficiency;

    // multiplicity of every (shape, realization) pair
    let mut mult: BTreeMap<(Shape, usize), u64> = BTreeMap::new();
    let mut rng = sub_rng(seed, 0);
    for _ in 0..cfg.n_pulses {
        let n = poisson(mean, &mut rng) as u32;
        if let Some(ev) = array_event_with(&cfg.array, n, &mut rng) {
            let r = rng.random_range(0..cfg.pool_size);
            *mult.entry(((ev.pixel_count, ev.switch_over), r)).or_insert(0) += 1;
        }
    }

    let thresholds = cfg.thresholds();
    let n = thresholds.len();
    let mut lower: Vec<(u64, Vec<DigitalWaveform>)> = Vec::with_capacity(mult.len());
    let mut upper: Vec<Vec<DigitalWaveform>> = Vec::with_capacity(mult.len());
    for (&((pixels, so), r), &m) in &mult {
        let stream = 1 + (2 * pixels as u64 + so as u64) * cfg.pool_size as u64 + r as u64;
        let mut noise = sub_rng(sub_seed(seed, 1), stream);
        let w = cfg.shape_trace((pixels, so), Some(&mut noise))?;
        let l = thresholds
            .iter()
            .map(|&t| trigger_response(&with_threshold(&cfg.triggers.lower, t), &w))
            .collect::<Result<Vec<_>>>()?;
        let u = thresholds
            .iter()
            .map(|&t| trigger_response(&with_threshold(&cfg.triggers.upper, t), &w))
            .collect::<Result<Vec<_>>>()?;
        lower.push((m, l));
        upper.push(u);
    }

    let mut lower_counts = alloc::vec![0u64; n];
    let mut upper_counts = alloc::vec![0u64; n];
    let mut driver_counts = alloc::vec![alloc::vec![0u64; n]; n];
    for ((m, l), u) in lower.iter().zip(&upper) {
        for k in 0..n {
            lower_counts[k] += m * l[k].count_rising() as u64;
            upper_counts[k] += m * u[k].count_rising() as u64;
        }
        for i in 0..n {
            if l[i].transitions().is_empty() {
                continue;
            }
            for j in 0..n {
                let out = window_logic(&cfg.gates, &l[i], &u[j])?.output;
                driver_counts[i][j] += m * out.count_rising() as u64;
            }
        }
    }

    let as_f = |v: &[u64]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
    let lower_plateaus = find_plateaus(&as_f(&lower_counts), cfg.plateau_tolerance, cfg.plateau_min_points);
    let upper_plateaus = find_plateaus(&as_f(&upper_counts), cfg.plateau_tolerance, cfg.plateau_min_points);
    let outcome = SweepOutcome {
        thresholds,
        ladder,
        lower_counts,
        upper_counts,
        driver_counts,
        lower_plateaus,
        upper_plateaus,
        duration: cfg.n_pulses as f64 / cfg.source.rep_rate,
    };
    let report = sweep_report(cfg, &outcome, seed)?;
    Ok((outcome, report))
}

fn sweep_report(cfg: &SweepConfig, o: &SweepOutcome, seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("sweep", seed);
    report.param("n_pulses", cfg.n_pulses);
    report.param("grid_points", cfg.grid_points);
    report.param("mean_photon_number", cfg.source.mean_photon_number);
    report.param("pool_size", cfg.pool_size);
    report.param("lower_feedback_tau_s", cfg.triggers.lower.feedback_tau);
    report.param("upper_feedback_tau_s", cfg.triggers.upper.feedback_tau);
    let rate = |c: f64| c / o.duration;

    let mut t = Table::new("monitors", &["threshold_v", "lower_rate_hz", "upper_rate_hz"]);
    for k in 0..o.thresholds.len() {
        t.push(alloc::vec![
            o.thresholds[k],
            rate(o.lower_counts[k] as f64),
            rate(o.upper_counts[k] as f64)
        ])?;
    }
    report.tables.push(t);

    let mut t = Table::new(
        "driver_map",
        &["threshold1_v", "threshold2_v", "driver_rate_hz", "predicted_rate_hz", "selected_pixels"],
    );
    for i in 0..o.thresholds.len() {
        for j in 0..o.thresholds.len() {
            t.push(alloc::vec![
                o.thresholds[i],
                o.thresholds[j],
                rate(o.driver_counts[i][j] as f64),
                rate(o.predicted(i, j)),
                o.selected_pixels(i, j).map_or(0.0, |p| p as f64),
            ])?;
        }
    }
    report.tables.push(t);

    let mut t = Table::new("ladder", &["pixels", "peak_v"]);
    for (k, &p) in o.ladder.iter().enumerate() {
        t.push(alloc::vec![(k + 1) as f64, p])?;
    }
    report.tables.push(t);

    let mut t = Table::new("plateaus", &["trigger", "threshold_start_v", "threshold_end_v", "rate_hz"]);
    for (id, ps, counts) in [(1.0, &o.lower_plateaus, &o.lower_counts), (2.0, &o.upper_plateaus, &o.upper_counts)] {
        for p in ps {
            t.push(alloc::vec![id, o.thresholds[p.start], o.thresholds[p.end], rate(counts[p.start] as f64)])?;
        }
    }
    report.tables.push(t);

    report.metric("lower_plateaus", "count", o.lower_plateaus.len() as f64);
    report.metric("upper_plateaus", "count", o.upper_plateaus.len() as f64);
    report.metric("driver_agreement_3sigma", "fraction", o.agreement(3.0));
    report.metric("duration", "s", o.duration);
    Ok(report)
}

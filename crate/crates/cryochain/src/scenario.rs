//! Scenario files: TOML text describing the hardware and every
//! experiment's grid, with defaults for anything left out.

use cryochain_core::analog::{Chain, JitterSetup, LaserLink};
use cryochain_core::experiments::{
    BiasScanConfig, HeatConfig, LaserReadoutConfig, LatencyConfig, PnrConfig, SimulateConfig, SweepConfig,
};
use cryochain_core::modulator::EoModulator;
use cryochain_core::snspd::{MultiplexedArray, PhotonSource, SnspdModel};
use cryochain_core::trigger::{GateSet, ModulatorDriver, TriggerPair};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest seed a TOML integer holds.
pub const MAX_SEED: u64 = i64::MAX as u64;

/// Unknown keys are errors in strict mode and warnings in lax mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    Lax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceSection {
    /// Laser repetition rate (Hz).
    pub rep_rate: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            rep_rate: PhotonSource::default().rep_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasScanSection {
    pub mean_photon_number: f64,
    /// Bias grid `bias_min, bias_min + bias_step, ... <= bias_max` (A).
    pub bias_min: f64,
    pub bias_max: f64,
    pub bias_step: f64,
    pub cryo_noise_current: f64,
    pub conventional_noise_current: f64,
    pub window: f64,
    pub plateau_tolerance: f64,
}

impl Default for BiasScanSection {
    fn default() -> Self {
        let c = BiasScanConfig::default();
        Self {
            mean_photon_number: c.source.mean_photon_number,
            bias_min: c.bias_grid[0],
            bias_max: c.bias_grid[c.bias_grid.len() - 1],
            bias_step: c.bias_grid[1] - c.bias_grid[0],
            cryo_noise_current: c.cryo_noise_current,
            conventional_noise_current: c.conventional_noise_current,
            window: c.window,
            plateau_tolerance: c.plateau_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PnrSection {
    pub mean_photon_number: f64,
    /// Single-pixel readout: first stage plus the commercial amplifier.
    pub chain: Chain,
    pub n_pulses: usize,
    pub level: f64,
    pub projection_angle_deg: f64,
    pub sync_delay: f64,
    pub timing_jitter: f64,
    pub sample_rate: f64,
    pub window: f64,
    pub histogram_bins: usize,
    pub projection_bins: usize,
}

impl Default for PnrSection {
    fn default() -> Self {
        let c = PnrConfig::default();
        Self {
            mean_photon_number: c.source.mean_photon_number,
            chain: c.chain,
            n_pulses: c.n_pulses,
            level: c.level,
            projection_angle_deg: c.projection_angle_deg,
            sync_delay: c.sync_delay,
            timing_jitter: c.timing_jitter,
            sample_rate: c.sample_rate,
            window: c.window,
            histogram_bins: c.histogram_bins,
            projection_bins: c.projection_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    pub mean_photon_number: f64,
    pub n_pulses: usize,
    pub grid_points: usize,
    pub threshold_min: f64,
    pub threshold_max: f64,
    pub pool_size: usize,
    pub sample_rate: f64,
    pub window: f64,
    pub pulse_time: f64,
    pub plateau_tolerance: f64,
    pub plateau_min_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let c = SweepConfig::default();
        Self {
            mean_photon_number: c.source.mean_photon_number,
            n_pulses: c.n_pulses,
            grid_points: c.grid_points,
            threshold_min: c.threshold_min,
            threshold_max: c.threshold_max,
            pool_size: c.pool_size,
            sample_rate: c.sample_rate,
            window: c.window,
            pulse_time: c.pulse_time,
            plateau_tolerance: c.plateau_tolerance,
            plateau_min_points: c.plateau_min_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaserSection {
    pub cryo_chain: Chain,
    pub conventional_chain: Chain,
    pub link: LaserLink,
    pub threshold_fraction: f64,
    pub intrinsic_jitter: f64,
    pub sample_rate: f64,
    pub window: f64,
    pub pulse_time: f64,
    pub n_trials: usize,
    pub spectrum_traces: usize,
    pub noise_search_min: f64,
}

impl Default for LaserSection {
    fn default() -> Self {
        let c = LaserReadoutConfig::default();
        let s = c.setup;
        Self {
            cryo_chain: s.cryo_chain,
            conventional_chain: s.conventional_chain,
            link: s.laser,
            threshold_fraction: s.threshold_fraction,
            intrinsic_jitter: s.intrinsic_jitter,
            sample_rate: s.sample_rate,
            window: s.window,
            pulse_time: s.pulse_time,
            n_trials: c.n_trials,
            spectrum_traces: c.spectrum_traces,
            noise_search_min: c.noise_search_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencySection {
    pub trace_length_min: f64,
    pub trace_length_max: f64,
    pub velocity_factor: f64,
    pub amplifier_delay: f64,
    pub modulator_uncertainty: f64,
    pub digital_uncertainty: f64,
    pub room_temperature_cable: f64,
}

impl Default for LatencySection {
    fn default() -> Self {
        let c = LatencyConfig::default();
        Self {
            trace_length_min: c.trace_length_min,
            trace_length_max: c.trace_length_max,
            velocity_factor: c.velocity_factor,
            amplifier_delay: c.amplifier_delay,
            modulator_uncertainty: c.modulator_uncertainty,
            digital_uncertainty: c.digital_uncertainty,
            room_temperature_cable: c.room_temperature_cable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateSection {
    pub pixel_count: u32,
    pub switch_over: bool,
    pub noisy: bool,
    pub sample_rate: f64,
    pub window: f64,
    pub pulse_time: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        let c = SimulateConfig::default();
        Self {
            pixel_count: c.pixel_count,
            switch_over: c.switch_over,
            noisy: c.noisy,
            sample_rate: c.sample_rate,
            window: c.window,
            pulse_time: c.pulse_time,
        }
    }
}

/// Shared hardware plus one section per experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Output directory; the command line and `CRYOCHAIN_OUT` take precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub source: SourceSection,
    pub detector: SnspdModel,
    pub array: MultiplexedArray,
    /// Amplifier cascade behind the multiplexed array.
    pub chain: Chain,
    pub trigger: TriggerPair,
    pub gates: GateSet,
    pub driver: ModulatorDriver,
    pub modulator: EoModulator,
    pub bias_scan: BiasScanSection,
    pub pnr: PnrSection,
    pub sweep: SweepSection,
    pub laser: LaserSection,
    pub latency: LatencySection,
    pub heat: HeatConfig,
    pub simulate: SimulateSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".to_string(),
            seed: 0,
            output: None,
            source: SourceSection::default(),
            detector: SnspdModel::default(),
            array: MultiplexedArray::default(),
            chain: SweepConfig::default().chain,
            trigger: TriggerPair::default(),
            gates: GateSet::default(),
            driver: ModulatorDriver::default(),
            modulator: EoModulator::default(),
            bias_scan: BiasScanSection::default(),
            pnr: PnrSection::default(),
            sweep: SweepSection::default(),
            laser: LaserSection::default(),
            latency: LatencySection::default(),
            heat: HeatConfig::default(),
            simulate: SimulateSection::default(),
        }
    }
}

fn source(rep_rate: f64, mean_photon_number: f64) -> PhotonSource {
    PhotonSource {
        rep_rate,
        mean_photon_number,
    }
}

impl Scenario {
    pub fn bias_scan_config(&self) -> BiasScanConfig {
        let b = &self.bias_scan;
        let mut grid = Vec::new();
        if b.bias_step > 0.0 && b.bias_max >= b.bias_min {
            let n = ((b.bias_max - b.bias_min) / b.bias_step + 1e-9).floor() as usize;
            grid = (0..=n).map(|k| b.bias_min + k as f64 * b.bias_step).collect();
        }
        BiasScanConfig {
            detector: self.detector.clone(),
            source: source(self.source.rep_rate, b.mean_photon_number),
            bias_grid: grid,
            cryo_noise_current: b.cryo_noise_current,
            conventional_noise_current: b.conventional_noise_current,
            window: b.window,
            plateau_tolerance: b.plateau_tolerance,
        }
    }

    pub fn pnr_config(&self) -> PnrConfig {
        let p = &self.pnr;
        PnrConfig {
            detector: self.detector.clone(),
            source: source(self.source.rep_rate, p.mean_photon_number),
            chain: p.chain.clone(),
            n_pulses: p.n_pulses,
            level: p.level,
            projection_angle_deg: p.projection_angle_deg,
            sync_delay: p.sync_delay,
            timing_jitter: p.timing_jitter,
            sample_rate: p.sample_rate,
            window: p.window,
            histogram_bins: p.histogram_bins,
            projection_bins: p.projection_bins,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let s = &self.sweep;
        SweepConfig {
            detector: self.detector.clone(),
            array: self.array.clone(),
            source: source(self.source.rep_rate, s.mean_photon_number),
            chain: self.chain.clone(),
            triggers: self.trigger.clone(),
            gates: self.gates,
            n_pulses: s.n_pulses,
            grid_points: s.grid_points,
            threshold_min: s.threshold_min,
            threshold_max: s.threshold_max,
            pool_size: s.pool_size,
            sample_rate: s.sample_rate,
            window: s.window,
            pulse_time: s.pulse_time,
            plateau_tolerance: s.plateau_tolerance,
            plateau_min_points: s.plateau_min_points,
        }
    }

    pub fn laser_config(&self) -> LaserReadoutConfig {
        let l = &self.laser;
        LaserReadoutConfig {
            setup: JitterSetup {
                detector: self.detector.clone(),
                cryo_chain: l.cryo_chain.clone(),
                conventional_chain: l.conventional_chain.clone(),
                laser: l.link.clone(),
                threshold_fraction: l.threshold_fraction,
                intrinsic_jitter: l.intrinsic_jitter,
                sample_rate: l.sample_rate,
                window: l.window,
                pulse_time: l.pulse_time,
            },
            n_trials: l.n_trials,
            spectrum_traces: l.spectrum_traces,
            noise_search_min: l.noise_search_min,
        }
    }

    pub fn latency_config(&self) -> LatencyConfig {
        let l = &self.latency;
        LatencyConfig {
            trace_length_min: l.trace_length_min,
            trace_length_max: l.trace_length_max,
            velocity_factor: l.velocity_factor,
            amplifier_delay: l.amplifier_delay,
            modulator: self.modulator,
            modulator_uncertainty: l.modulator_uncertainty,
            triggers: self.trigger.clone(),
            gates: self.gates,
            digital_uncertainty: l.digital_uncertainty,
            room_temperature_cable: l.room_temperature_cable,
        }
    }

    pub fn heat_config(&self) -> HeatConfig {
        self.heat.clone()
    }

    pub fn simulate_config(&self) -> SimulateConfig {
        let s = &self.simulate;
        SimulateConfig {
            detector: self.detector.clone(),
            array: self.array.clone(),
            chain: self.chain.clone(),
            triggers: self.trigger.clone(),
            gates: self.gates,
            driver: self.driver,
            modulator: self.modulator,
            pixel_count: s.pixel_count,
            switch_over: s.switch_over,
            noisy: s.noisy,
            sample_rate: s.sample_rate,
            window: s.window,
            pulse_time: s.pulse_time,
        }
    }

    /// Checks every component and section without running anything.
    pub fn validate(&self) -> Result<(), CliError> {
        let v = |r: cryochain_core::Result<()>| r.map_err(|e| CliError::Validation(e.to_string()));
        if self.name.trim().is_empty() {
            return Err(CliError::Validation("name must not be empty".into()));
        }
        if self.seed > MAX_SEED {
            return Err(CliError::Validation(format!("seed must not exceed {MAX_SEED}")));
        }
        if !(self.source.rep_rate > 0.0) {
            return Err(CliError::Validation("source.rep_rate must be positive".into()));
        }
        v(self.detector.validate())?;
        v(self.array.validate())?;
        v(self.trigger.validate())?;
        v(self.gates.validate())?;
        v(self.driver.validate())?;
        v(self.modulator.validate())?;
        let b = &self.bias_scan;
        if !(b.bias_step > 0.0) || !(b.bias_min > 0.0) || !(b.bias_max >= b.bias_min) {
            return Err(CliError::Validation(
                "bias_scan needs 0 < bias_min <= bias_max and a positive bias_step".into(),
            ));
        }
        if !(b.window > 0.0) {
            return Err(CliError::Validation("bias_scan.window must be positive".into()));
        }
        if !(self.pnr.mean_photon_number > 0.0) {
            return Err(CliError::Validation("pnr.mean_photon_number must be positive".into()));
        }
        v(self.sweep_config().validate())?;
        v(self.laser_config().setup.validate())?;
        v(self.latency_config_check())?;
        if self.simulate.pixel_count > self.array.n_pixels {
            return Err(CliError::Validation(format!(
                "simulate.pixel_count must not exceed array.n_pixels ({})",
                self.array.n_pixels
            )));
        }
        Ok(())
    }

    fn latency_config_check(&self) -> cryochain_core::Result<()> {
        cryochain_core::experiments::latency_budget(&self.latency_config()).map(|_| ())
    }
}

/// 1-based line of byte offset `pos`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

/// Best-effort line of the key or table named by the dotted `path`.
fn key_line(text: &str, path: &str) -> Option<usize> {
    let last = path.rsplit('.').find(|s| s.parse::<usize>().is_err())?;
    text.lines().position(|l| {
        let t = l.trim_start();
        let key = t.strip_prefix(last).is_some_and(|rest| {
            let rest = rest.trim_start();
            rest.starts_with('=')
        });
        let header = t.starts_with('[') && t.trim_end_matches(']').trim_end_matches(']').ends_with(last);
        key || header
    })
    .map(|i| i + 1)
}

/// Parsed scenario plus the warnings of a lax parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
}

/// Parses and validates scenario text. Empty text gives the defaults.
pub fn parse_scenario(text: &str, mode: Strictness) -> Result<Parsed, CliError> {
    // The direct pass reports syntax, type and unknown-key errors with
    // positions; the merged pass makes partial nested tables fall back to
    // the defaults of their parent rather than of their own type.
    let de = toml::Deserializer::parse(text).map_err(|e| parse_error(text, &e))?;
    let mut unknown = Vec::new();
    let _: Scenario =
        serde_ignored::deserialize(de, |path| unknown.push(path.to_string())).map_err(|e| parse_error(text, &e))?;
    let user: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    let mut merged = toml::Value::try_from(Scenario::default())
        .map_err(|e| CliError::Runtime(format!("cannot serialize defaults: {e}")))?;
    merge(&mut merged, toml::Value::Table(user));
    let scenario: Scenario = merged.try_into().map_err(|e: toml::de::Error| CliError::Parse {
        line: None,
        message: e.message().to_string(),
    })?;
    let mut warnings = Vec::new();
    for key in unknown {
        let line = key_line(text, &key);
        match mode {
            Strictness::Strict => return Err(CliError::UnknownKey { key, line }),
            Strictness::Lax => warnings.push(match line {
                Some(l) => format!("line {l}: unknown key '{key}' ignored"),
                None => format!("unknown key '{key}' ignored"),
            }),
        }
    }
    scenario.validate()?;
    Ok(Parsed { scenario, warnings })
}

/// Overlays `user` on `base`; tables merge key by key, anything else
/// (including arrays) replaces.
fn merge(base: &mut toml::Value, user: toml::Value) {
    match (base, user) {
        (toml::Value::Table(b), toml::Value::Table(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_error(text: &str, e: &toml::de::Error) -> CliError {
    CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    }
}

/// TOML text that parses back to `scenario`.
pub fn to_toml(scenario: &Scenario) -> Result<String, CliError> {
    toml::to_string(scenario).map_err(|e| CliError::Runtime(format!("cannot serialize scenario: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let p = parse_scenario("", Strictness::Strict).unwrap();
        assert_eq!(p.scenario, Scenario::default());
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn unknown_key_strict_and_lax() {
        let text = "seed = 3\n[trigger.lower]\nthreshhold = 0.01\n";
        match parse_scenario(text, Strictness::Strict) {
            Err(CliError::UnknownKey { key, line }) => {
                assert_eq!(key, "trigger.lower.threshhold");
                assert_eq!(line, Some(3));
            }
            other => panic!("{other:?}"),
        }
        let p = parse_scenario(text, Strictness::Lax).unwrap();
        assert_eq!(p.scenario.seed, 3);
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].contains("line 3"));
    }

    #[test]
    fn syntax_error_has_line() {
        match parse_scenario("seed = 1\nname = \n", Strictness::Strict) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_has_line() {
        match parse_scenario("[detector]\n\ni_bias = \"high\"\n", Strictness::Strict) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn threshold_order_names_both_fields() {
        let text = "[trigger.lower]\nthreshold = 0.05\n[trigger.upper]\nthreshold = 0.02\n";
        match parse_scenario(text, Strictness::Strict) {
            Err(CliError::Validation(m)) => {
                assert!(m.contains("trigger.lower.threshold") && m.contains("trigger.upper.threshold"), "{m}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partial_table_keeps_parent_defaults() {
        let p = parse_scenario("[trigger.upper]\nthreshold = 0.04\n", Strictness::Strict).unwrap();
        let d = TriggerPair::default();
        assert_eq!(p.scenario.trigger.lower, d.lower);
        assert_eq!(p.scenario.trigger.upper.threshold, 0.04);
        assert_eq!(p.scenario.trigger.upper.feedback_tau, d.upper.feedback_tau);
    }

    #[test]
    fn defaults_round_trip() {
        let s = Scenario::default();
        let text = to_toml(&s).unwrap();
        assert_eq!(parse_scenario(&text, Strictness::Strict).unwrap().scenario, s);
    }

    #[test]
    fn seed_must_fit_toml_integer() {
        let s = Scenario { seed: MAX_SEED + 1, ..Scenario::default() };
        assert!(matches!(s.validate(), Err(CliError::Validation(_))));
    }

    #[test]
    fn empty_chain_rejected() {
        assert!(matches!(parse_scenario("chain = []\n", Strictness::Strict), Err(CliError::Parse { .. })));
    }
}

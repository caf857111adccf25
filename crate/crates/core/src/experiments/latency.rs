#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::report::{ExperimentReport, Table};
use crate::error::{invalid, Result};
use crate::modulator::EoModulator;
use crate::trigger::{digital_path_delay, GateSet, TriggerPair};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LatencyConfig {
    /// Shortest and longest estimate of wire plus trace length (m).
    pub trace_length_min: f64,
    pub trace_length_max: f64,
    /// Signal speed as a fraction of c.
    pub velocity_factor: f64,
    /// Amplifier group delay, negligible for wideband LNAs (s).
    pub amplifier_delay: f64,
    pub modulator: EoModulator,
    /// Uncertainty attached to the modulator rise time (s).
    pub modulator_uncertainty: f64,
    pub triggers: TriggerPair,
    pub gates: GateSet,
    /// Relative uncertainty of the digital path delay.
    pub digital_uncertainty: f64,
    /// Coax length of the room-temperature alternative, out and back (m).
    pub room_temperature_cable: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            trace_length_min: 0.2,
            trace_length_max: 0.3,
            velocity_factor: 2.0 / 3.0,
            amplifier_delay: 0.0,
            modulator: EoModulator::default(),
            modulator_uncertainty: 0.5e-9,
            triggers: TriggerPair::default(),
            gates: GateSet::default(),
            digital_uncertainty: 0.1,
            room_temperature_cable: 4.0,
        }
    }
}

/// One contribution to the feed-forward delay.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyItem {
    pub name: String,
    pub delay: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyBudget {
    pub items: Vec<LatencyItem>,
    /// Cabling-only delay of the room-temperature path (s).
    pub room_temperature_delay: f64,
}

impl LatencyBudget {
    pub fn total(&self) -> f64 {
        self.items.iter().map(|i| i.delay).sum()
    }

    /// Linear sum of the item uncertainties.
    pub fn uncertainty(&self) -> f64 {
        self.items.iter().map(|i| i.uncertainty).sum()
    }

    /// Every delay and uncertainty multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            items: self
                .items
                .iter()
                .map(|i| LatencyItem {
                    name: i.name.clone(),
                    delay: k * i.delay,
                    uncertainty: k * i.uncertainty,
                })
                .collect(),
            room_temperature_delay: k * self.room_temperature_delay,
        }
    }

    /// Total and uncertainty in whole nanoseconds, e.g. `23 ± 3`.
    pub fn display_ns(&self) -> String {
        alloc::format!("{} ± {}", (self.total() * 1e9).round(), (self.uncertainty() * 1e9).round())
    }
}

/// Delay of `length` metres of line at `velocity_factor` c.
pub fn cable_delay(length: f64, velocity_factor: f64) -> Result<f64> {
    if !(length >= 0.0) {
        return Err(invalid!("cable length must be non-negative, got {length}"));
    }
    if !(velocity_factor > 0.0 && velocity_factor <= 1.0) {
        return Err(invalid!("velocity_factor must lie in (0, 1]"));
    }
    Ok(length / (velocity_factor * SPEED_OF_LIGHT))
}

/// Cabling, amplifier, modulator and digital contributions to the delay
/// from absorption to the modulator switching.
pub fn latency_budget(cfg: &LatencyConfig) -> Result<LatencyBudget> {
    if !(cfg.trace_length_min <= cfg.trace_length_max) {
        return Err(invalid!("latency.trace_length_min must not exceed latency.trace_length_max"));
    }
    let lo = cable_delay(cfg.trace_length_min, cfg.velocity_factor)?;
    let hi = cable_delay(cfg.trace_length_max, cfg.velocity_factor)?;
    cfg.modulator.validate()?;
    cfg.gates.validate()?;
    cfg.triggers.lower.validate()?;
    cfg.triggers.upper.validate()?;
    if !(cfg.amplifier_delay >= 0.0) || !(cfg.modulator_uncertainty >= 0.0) || !(cfg.digital_uncertainty >= 0.0) {
        return Err(invalid!("latency delays and uncertainties must be non-negative"));
    }
    let digital = digital_path_delay(&cfg.gates, &cfg.triggers);
    let items = alloc::vec![
        LatencyItem {
            name: "cabling".to_string(),
            delay: 0.5 * (lo + hi),
            uncertainty: 0.5 * (hi - lo),
        },
        LatencyItem {
            name: "amplifiers".to_string(),
            delay: cfg.amplifier_delay,
            uncertainty: 0.0,
        },
        LatencyItem {
            name: "modulator_rise".to_string(),
            delay: cfg.modulator.rise_time(),
            uncertainty: cfg.modulator_uncertainty,
        },
        LatencyItem {
            name: "digital".to_string(),
            delay: digital,
            uncertainty: cfg.digital_uncertainty * digital,
        },
    ];
    Ok(LatencyBudget {
        items,
        room_temperature_delay: cable_delay(cfg.room_temperature_cable, cfg.velocity_factor)?,
    })
}

pub fn run_latency_budget(cfg: &LatencyConfig) -> Result<(LatencyBudget, ExperimentReport)> {
    let b = latency_budget(cfg)?;
    let mut report = ExperimentReport::new("latency", 0);
    report.param("trace_length_min_m", cfg.trace_length_min);
    report.param("trace_length_max_m", cfg.trace_length_max);
    report.param("velocity_factor", cfg.velocity_factor);
    report.param("modulator_bandwidth_hz", cfg.modulator.bandwidth);
    report.param("room_temperature_cable_m", cfg.room_temperature_cable);
    let mut t = Table::new("budget", &["delay_ns", "uncertainty_ns"]);
    for i in &b.items {
        t.push_labeled(&i.name, alloc::vec![i.delay * 1e9, i.uncertainty * 1e9])?;
        report.metric(&alloc::format!("{}_delay", i.name), "ns", i.delay * 1e9);
    }
    report.tables.push(t);
    report.metric("total_delay", "ns", b.total() * 1e9);
    report.metric("total_uncertainty", "ns", b.uncertainty() * 1e9);
    report.metric("room_temperature_cable_delay", "ns", b.room_temperature_delay * 1e9);
    Ok((b, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cabling_is_one_and_a_quarter_ns() {
        let b = latency_budget(&LatencyConfig::default()).unwrap();
        let c = &b.items[0];
        // 0.25 m at 2/3 c, half-range 0.05 m
        assert!((c.delay - 0.25 * 1.5 / SPEED_OF_LIGHT).abs() < 1e-15);
        assert!((c.uncertainty - 0.05 * 1.5 / SPEED_OF_LIGHT).abs() < 1e-15);
    }

    #[test]
    fn default_total_rounds_to_23_pm_3() {
        let b = latency_budget(&LatencyConfig::default()).unwrap();
        assert!((b.total() - 22.75e-9).abs() < 0.05e-9, "{}", b.total());
        assert!((b.uncertainty() - 2.75e-9).abs() < 0.01e-9);
        assert_eq!(b.display_ns(), "23 ± 3");
        assert!((b.room_temperature_delay - 20e-9).abs() < 0.1e-9);
    }

    #[test]
    fn negative_length_rejected() {
        let cfg = LatencyConfig {
            trace_length_min: -0.1,
            ..Default::default()
        };
        assert!(latency_budget(&cfg).is_err());
        assert!(cable_delay(-1.0, 0.66).is_err());
    }

    #[test]
    fn scaling_is_linear() {
        let b = latency_budget(&LatencyConfig::default()).unwrap();
        let s = b.scaled(3.0);
        assert!((s.total() - 3.0 * b.total()).abs() < 1e-18);
        assert!((s.uncertainty() - 3.0 * b.uncertainty()).abs() < 1e-18);
    }
}

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::report::{ExperimentReport, Table};
use crate::analog::{first_stage, PowerMode};
use crate::error::{invalid, Result};

/// A dissipating component and the cryostat stage it sits on.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatComponent {
    pub name: String,
    pub stage: String,
    /// Static dissipation (W).
    pub power: f64,
}

/// Cooling power available on a cryostat stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageBudget {
    pub name: String,
    /// W.
    pub cooling_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct HeatConfig {
    /// Bias of the first amplifier stage.
    pub first_stage_mode: PowerMode,
    pub first_stage_location: String,
    /// The 1 K stage the first amplifier is wired to.
    pub one_kelvin_stage: String,
    /// Everything except the first stage.
    pub components: Vec<HeatComponent>,
    pub stages: Vec<StageBudget>,
    /// Modulator electrode capacitance (F).
    pub modulator_capacitance: f64,
    /// Driver swing across the electrode (V).
    pub drive_voltage: f64,
    /// Modulator switching operations per second.
    pub switching_rate: f64,
    /// Stage carrying the driver's dynamic load.
    pub driver_location: String,
}

fn component(name: &str, power: f64) -> HeatComponent {
    HeatComponent {
        name: name.to_string(),
        stage: "4K".to_string(),
        power,
    }
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            first_stage_mode: PowerMode::High,
            first_stage_location: "4K".to_string(),
            one_kelvin_stage: "1K".to_string(),
            components: alloc::vec![
                component("second_stage", 1.3e-3),
                component("third_stage", 1.3e-3),
                component("lower_trigger", 6.5e-3),
                component("upper_trigger", 6.5e-3),
                component("logic", 3.1e-3),
                component("driver", 3.0e-3),
            ],
            stages: alloc::vec![
                StageBudget {
                    name: "1K".to_string(),
                    cooling_power: 500e-6,
                },
                StageBudget {
                    name: "4K".to_string(),
                    cooling_power: 1.0,
                },
            ],
            modulator_capacitance: 10e-12,
            drive_voltage: 3.6,
            switching_rate: 1e5,
            driver_location: "4K".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageLoad {
    pub name: String,
    pub load: f64,
    pub cooling_power: f64,
}

impl StageLoad {
    pub fn over_budget(&self) -> bool {
        self.load > self.cooling_power
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatBudget {
    /// All components including the first stage and the dynamic term (W).
    pub components: Vec<HeatComponent>,
    pub stages: Vec<StageLoad>,
    pub first_stage_power: f64,
    /// `C V^2 f` of switching the modulator electrode (W).
    pub dynamic_power: f64,
    /// The first stage alone fits the 1 K cooling budget.
    pub first_stage_fits_1k: bool,
}

impl HeatBudget {
    pub fn total(&self) -> f64 {
        self.components.iter().map(|c| c.power).sum()
    }
}

/// Energy per second spent charging and discharging the electrode.
pub fn switching_power(capacitance: f64, voltage: f64, rate: f64) -> f64 {
    capacitance * voltage * voltage * rate
}

pub fn heat_budget(cfg: &HeatConfig) -> Result<HeatBudget> {
    if !(cfg.modulator_capacitance >= 0.0) || !(cfg.switching_rate >= 0.0) || !cfg.drive_voltage.is_finite() {
        return Err(invalid!("heat: capacitance and switching_rate must be non-negative"));
    }
    let first_stage_power = first_stage(cfg.first_stage_mode).power_dissipation;
    let dynamic_power = switching_power(cfg.modulator_capacitance, cfg.drive_voltage, cfg.switching_rate);
    let mut components = alloc::vec![HeatComponent {
        name: "first_stage".to_string(),
        stage: cfg.first_stage_location.clone(),
        power: first_stage_power,
    }];
    components.extend(cfg.components.iter().cloned());
    components.push(HeatComponent {
        name: "modulator_switching".to_string(),
        stage: cfg.driver_location.clone(),
        power: dynamic_power,
    });
    for c in &components {
        if !(c.power >= 0.0) {
            return Err(invalid!("heat: component {} has negative power", c.name));
        }
        if !cfg.stages.iter().any(|s| s.name == c.stage) {
            return Err(invalid!("heat: component {} sits on unknown stage {}", c.name, c.stage));
        }
    }
    let stages = cfg
        .stages
        .iter()
        .map(|s| StageLoad {
            name: s.name.clone(),
            load: components.iter().filter(|c| c.stage == s.name).map(|c| c.power).sum(),
            cooling_power: s.cooling_power,
        })
        .collect();
    let one_k = cfg
        .stages
        .iter()
        .find(|s| s.name == cfg.one_kelvin_stage)
        .ok_or_else(|| invalid!("heat: no stage named {}", cfg.one_kelvin_stage))?;
    Ok(HeatBudget {
        components,
        stages,
        first_stage_power,
        dynamic_power,
        first_stage_fits_1k: first_stage_power <= one_k.cooling_power,
    })
}

pub fn run_heat_budget(cfg: &HeatConfig) -> Result<(HeatBudget, ExperimentReport)> {
    let b = heat_budget(cfg)?;
    let mut report = ExperimentReport::new("heat", 0);
    report.param("first_stage_mode", match cfg.first_stage_mode {
        PowerMode::High => "high",
        PowerMode::Low => "low",
    });
    report.param("switching_rate_hz", cfg.switching_rate);
    report.param("modulator_capacitance_f", cfg.modulator_capacitance);
    let mut t = Table::new("components", &["power_mw"]);
    for c in &b.components {
        t.push_labeled(&c.name, alloc::vec![c.power * 1e3])?;
    }
    report.tables.push(t);
    let mut t = Table::new("stages", &["load_mw", "cooling_power_mw", "over_budget"]);
    for s in &b.stages {
        t.push_labeled(&s.name, alloc::vec![s.load * 1e3, s.cooling_power * 1e3, s.over_budget() as u8 as f64])?;
    }
    report.tables.push(t);
    report.metric("total", "mW", b.total() * 1e3);
    report.metric("first_stage", "mW", b.first_stage_power * 1e3);
    report.metric("modulator_switching", "mW", b.dynamic_power * 1e3);
    report.metric("first_stage_fits_1k", "bool", b.first_stage_fits_1k as u8 as f64);
    report.metric(
        "stages_over_budget",
        "count",
        b.stages.iter().filter(|s| s.over_budget()).count() as f64,
    );
    Ok((b, report))
}

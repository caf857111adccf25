use super::digital::DigitalWaveform;
use super::gates::{gate_eval, GateKind, GateModel};
use super::schmitt::{trigger_response, SchmittTrigger, DEFAULT_FEEDBACK_RESISTANCE};
use crate::error::{invalid, Result};
use crate::signal::Waveform;

/// Gate models of the selection logic.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GateSet {
    pub not: GateModel,
    pub nand: GateModel,
    pub buffer: GateModel,
}

impl Default for GateSet {
    fn default() -> Self {
        Self {
            not: GateModel::new(GateKind::Not, 3e-9),
            nand: GateModel::new(GateKind::Nand, 3e-9),
            buffer: GateModel::new(GateKind::Buffer, 4e-9),
        }
    }
}

impl GateSet {
    pub fn validate(&self) -> Result<()> {
        for (name, g, kind) in [
            ("not", &self.not, GateKind::Not),
            ("nand", &self.nand, GateKind::Nand),
            ("buffer", &self.buffer, GateKind::Buffer),
        ] {
            g.validate()?;
            if g.kind != kind {
                return Err(invalid!("gates.{name} must be a {kind:?} gate"));
            }
        }
        Ok(())
    }

    /// Every delay multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let s = |g: GateModel| GateModel {
            propagation_delay: g.propagation_delay * k,
            ..g
        };
        Self {
            not: s(self.not),
            nand: s(self.nand),
            buffer: s(self.buffer),
        }
    }
}

/// Lower (minimum photon number) and upper (blocking) triggers. The upper
/// one carries the larger feedback capacitor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TriggerPair {
    pub lower: SchmittTrigger,
    pub upper: SchmittTrigger,
}

impl Default for TriggerPair {
    fn default() -> Self {
        Self {
            lower: SchmittTrigger::with_capacitor(0.0125, DEFAULT_FEEDBACK_RESISTANCE, 30e-12),
            upper: SchmittTrigger::with_capacitor(0.0375, DEFAULT_FEEDBACK_RESISTANCE, 82e-12),
        }
    }
}

impl TriggerPair {
    pub fn validate(&self) -> Result<()> {
        self.lower.validate()?;
        self.upper.validate()?;
        if !(self.lower.threshold < self.upper.threshold) {
            return Err(invalid!(
                "trigger.lower.threshold ({} V) must be below trigger.upper.threshold ({} V)",
                self.lower.threshold,
                self.upper.threshold
            ));
        }
        if self.upper.feedback_tau < self.lower.feedback_tau {
            return Err(invalid!(
                "trigger.upper.feedback_tau must not be shorter than trigger.lower.feedback_tau"
            ));
        }
        Ok(())
    }
}

/// Signals of the selection network. `lower_monitor` and `upper_monitor`
/// are the trigger outputs seen through the spare inverters; `output` is
/// the buffered driver input.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSignals {
    pub lower: DigitalWaveform,
    pub upper: DigitalWaveform,
    pub lower_delayed: DigitalWaveform,
    pub upper_inverted: DigitalWaveform,
    pub select_n: DigitalWaveform,
    pub output: DigitalWaveform,
}

/// Selection logic on already computed trigger outputs: the lower trigger
/// passes two inverters (one more than the upper path), the upper trigger
/// one inverter, a NAND combines them, and an inverter plus buffer drive
/// the output. The output is high while the delayed lower pulse is high and
/// the upper pulse is low.
pub fn window_logic(gates: &GateSet, lower: &DigitalWaveform, upper: &DigitalWaveform) -> Result<WindowSignals> {
    gates.validate()?;
    let d1 = gate_eval(&gates.not, &[lower])?;
    let lower_delayed = gate_eval(&gates.not, &[&d1])?;
    let upper_inverted = gate_eval(&gates.not, &[upper])?;
    let select_n = gate_eval(&gates.nand, &[&lower_delayed, &upper_inverted])?;
    let drv = gate_eval(&gates.not, &[&select_n])?;
    let output = gate_eval(&gates.buffer, &[&drv])?;
    Ok(WindowSignals {
        lower: lower.clone(),
        upper: upper.clone(),
        lower_delayed,
        upper_inverted,
        select_n,
        output,
    })
}

/// Both triggers and the selection logic on input `w`, without checking
/// the threshold ordering (a sweep visits both orderings).
pub fn window_network(triggers: &TriggerPair, gates: &GateSet, w: &Waveform) -> Result<WindowSignals> {
    let lower = trigger_response(&triggers.lower, w)?;
    let upper = trigger_response(&triggers.upper, w)?;
    window_logic(gates, &lower, &upper)
}

/// Output of the window discriminator: pulses for inputs whose peak lies
/// in `[lower.threshold, upper.threshold)`.
pub fn window_discriminator(
    lower: &SchmittTrigger,
    upper: &SchmittTrigger,
    gates: &GateSet,
    w: &Waveform,
) -> Result<DigitalWaveform> {
    let pair = TriggerPair {
        lower: lower.clone(),
        upper: upper.clone(),
    };
    pair.validate()?;
    Ok(window_network(&pair, gates, w)?.output)
}

/// Input-to-driver delay of the slower of the two trigger paths.
pub fn digital_path_delay(gates: &GateSet, triggers: &TriggerPair) -> f64 {
    let tail = gates.nand.propagation_delay + gates.not.propagation_delay + gates.buffer.propagation_delay;
    let lower = triggers.lower.comparator_delay + 2.0 * gates.not.propagation_delay + tail;
    let upper = triggers.upper.comparator_delay + gates.not.propagation_delay + tail;
    lower.max(upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigger::Level;

    #[test]
    fn default_path_is_twenty_ns() {
        let d = digital_path_delay(&GateSet::default(), &TriggerPair::default());
        assert!((d - 20e-9).abs() < 1e-15);
        let d2 = digital_path_delay(&GateSet::default().scaled(2.0), &TriggerPair::default());
        assert!((d2 - d - 16e-9).abs() < 1e-15);
    }

    #[test]
    fn zero_delays() {
        let mut t = TriggerPair::default();
        t.lower.comparator_delay = 0.0;
        t.upper.comparator_delay = 0.0;
        assert_eq!(digital_path_delay(&GateSet::default().scaled(0.0), &t), 0.0);
    }

    #[test]
    fn logic_truth_table() {
        let g = GateSet::default();
        let lo = DigitalWaveform::constant(Level::Low);
        let pulse = DigitalWaveform::from_pulses(&[(10e-9, 40e-9)]).unwrap();
        let long = DigitalWaveform::from_pulses(&[(11e-9, 100e-9)]).unwrap();
        // lower only: one output pulse
        let s = window_logic(&g, &pulse, &lo).unwrap();
        assert_eq!(s.output.count_rising(), 1);
        let (a, b) = s.output.pulses()[0];
        assert!((a - 26e-9).abs() < 1e-15 && (b - 56e-9).abs() < 1e-15);
        // lower and upper shortly after: blocked
        let s = window_logic(&g, &pulse, &long).unwrap();
        assert_eq!(s.output.count_rising(), 0);
        // nothing: nothing
        assert_eq!(window_logic(&g, &lo, &lo).unwrap().output.count_rising(), 0);
    }

    #[test]
    fn ordering_enforced() {
        let p = TriggerPair::default();
        let w = Waveform::from_samples(10e9, 0.0, alloc::vec![0.0; 100]).unwrap();
        assert!(window_discriminator(&p.upper, &p.lower, &GateSet::default(), &w).is_err());
    }
}

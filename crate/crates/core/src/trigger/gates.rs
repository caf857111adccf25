use alloc::vec::Vec;

use super::digital::{DigitalWaveform, Level};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GateKind {
    Not,
    Nand,
    Buffer,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buffer => 1,
            GateKind::Nand => 2,
        }
    }

    fn eval(self, inputs: &[Level]) -> Level {
        match self {
            GateKind::Not => !inputs[0],
            GateKind::Buffer => inputs[0],
            GateKind::Nand => Level::from_bool(!(inputs[0].is_high() && inputs[1].is_high())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GateModel {
    pub kind: GateKind,
    /// Inertial propagation delay (s).
    pub propagation_delay: f64,
    /// Logic-high output voltage (V).
    pub output_high: f64,
}

impl GateModel {
    pub fn new(kind: GateKind, propagation_delay: f64) -> Self {
        Self {
            kind,
            propagation_delay,
            output_high: 3.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.propagation_delay >= 0.0) || !self.propagation_delay.is_finite() {
            return Err(invalid!("gate propagation delay must be non-negative"));
        }
        Ok(())
    }
}

/// Event-driven evaluation with inertial delay: a change of the ideal
/// output is committed `propagation_delay` later unless the ideal output
/// reverts first, so pulses shorter than the delay never appear.
/// The output starts at the steady-state value for the initial inputs.
pub fn gate_eval(g: &GateModel, inputs: &[&DigitalWaveform]) -> Result<DigitalWaveform> {
    g.validate()?;
    if inputs.len() != g.kind.arity() {
        return Err(invalid!(
            "{:?} gate takes {} input(s), got {}",
            g.kind,
            g.kind.arity(),
            inputs.len()
        ));
    }
    let mut times: Vec<f64> = inputs.iter().flat_map(|w| w.transitions().iter().map(|&(t, _)| t)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut levels: Vec<Level> = inputs.iter().map(|w| w.initial()).collect();
    let mut cursors = alloc::vec![0usize; inputs.len()];
    let mut out = DigitalWaveform::constant(g.kind.eval(&levels));
    let mut pending: Option<(f64, Level)> = None;
    let d = g.propagation_delay;

    for t in times {
        if let Some((tc, l)) = pending {
            if tc <= t {
                out.push(tc, l);
                pending = None;
            }
        }
        for (k, w) in inputs.iter().enumerate() {
            let tr = w.transitions();
            while cursors[k] < tr.len() && tr[cursors[k]].0 <= t {
                levels[k] = tr[cursors[k]].1;
                cursors[k] += 1;
            }
        }
        let ideal = g.kind.eval(&levels);
        match pending {
            Some((_, l)) if l != ideal => pending = None,
            Some(_) => {}
            None if ideal != out.final_level() => {
                if d == 0.0 {
                    out.push(t, ideal);
                } else {
                    pending = Some((t + d, ideal));
                }
            }
            None => {}
        }
    }
    if let Some((tc, l)) = pending {
        out.push(tc, l);
    }
    Ok(out)
}

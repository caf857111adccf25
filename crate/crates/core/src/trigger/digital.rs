use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Level {
    #[default]
    Low,
    High,
}

impl Level {
    pub fn is_high(self) -> bool {
        self == Level::High
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Level::High
        } else {
            Level::Low
        }
    }
}

impl core::ops::Not for Level {
    type Output = Level;

    fn not(self) -> Level {
        match self {
            Level::Low => Level::High,
            Level::High => Level::Low,
        }
    }
}

/// A two-level signal: `initial` until the first transition, then the
/// level of each transition from its time on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DigitalWaveform {
    initial: Level,
    transitions: Vec<(f64, Level)>,
}

impl DigitalWaveform {
    pub fn constant(level: Level) -> Self {
        Self {
            initial: level,
            transitions: Vec::new(),
        }
    }

    /// Checks that times strictly increase and levels alternate starting
    /// from the opposite of `initial`.
    pub fn new(initial: Level, transitions: Vec<(f64, Level)>) -> Result<Self> {
        let mut prev_t = f64::NEG_INFINITY;
        let mut prev_l = initial;
        for &(t, l) in &transitions {
            if !(t > prev_t) || !t.is_finite() {
                return Err(invalid!("transition times must be finite and strictly increasing"));
            }
            if l == prev_l {
                return Err(invalid!("transition levels must alternate"));
            }
            prev_t = t;
            prev_l = l;
        }
        Ok(Self { initial, transitions })
    }

    /// High during each `(start, end)` interval; intervals must be ordered
    /// and disjoint.
    pub fn from_pulses(pulses: &[(f64, f64)]) -> Result<Self> {
        let mut tr = Vec::with_capacity(2 * pulses.len());
        for &(a, b) in pulses {
            tr.push((a, Level::High));
            tr.push((b, Level::Low));
        }
        Self::new(Level::Low, tr)
    }

    pub fn initial(&self) -> Level {
        self.initial
    }

    pub fn transitions(&self) -> &[(f64, Level)] {
        &self.transitions
    }

    pub fn final_level(&self) -> Level {
        self.transitions.last().map_or(self.initial, |&(_, l)| l)
    }

    /// Level at time `t` (a transition at exactly `t` has taken effect).
    pub fn level_at(&self, t: f64) -> Level {
        let k = self.transitions.partition_point(|&(tt, _)| tt <= t);
        if k == 0 {
            self.initial
        } else {
            self.transitions[k - 1].1
        }
    }

    pub fn rising_edges(&self) -> impl Iterator<Item = f64> + '_ {
        self.transitions.iter().filter(|(_, l)| l.is_high()).map(|&(t, _)| t)
    }

    /// Number of low-to-high transitions, the count a monitor port registers.
    pub fn count_rising(&self) -> usize {
        self.rising_edges().count()
    }

    /// High intervals; an interval still open at the end has `f64::INFINITY`
    /// as its end and one open from the start has `f64::NEG_INFINITY` as its start.
    pub fn pulses(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start = if self.initial.is_high() { Some(f64::NEG_INFINITY) } else { None };
        for &(t, l) in &self.transitions {
            match l {
                Level::High => start = Some(t),
                Level::Low => {
                    if let Some(s) = start.take() {
                        out.push((s, t));
                    }
                }
            }
        }
        if let Some(s) = start {
            out.push((s, f64::INFINITY));
        }
        out
    }

    /// All transitions moved by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            initial: self.initial,
            transitions: self.transitions.iter().map(|&(t, l)| (t + dt, l)).collect(),
        }
    }

    /// Appends a transition, dropping it if it does not change the level.
    /// A transition at or before the last one cancels that one instead
    /// (a zero-width pulse).
    pub(crate) fn push(&mut self, t: f64, level: Level) {
        if level == self.final_level() {
            return;
        }
        if let Some(&(tt, _)) = self.transitions.last() {
            if t <= tt {
                self.transitions.pop();
                return;
            }
        }
        self.transitions.push((t, level));
    }
}

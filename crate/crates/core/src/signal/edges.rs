use alloc::vec::Vec;

use super::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEvent {
    pub time: f64,
    pub direction: Direction,
    pub level: f64,
}

/// All crossings of `level` in `direction`, with the crossing instant
/// interpolated linearly between the bracketing samples.
///
/// A rising crossing is a sample pair with `v[i] < level <= v[i+1]`; falling
/// is `v[i] > level >= v[i+1]`.
pub fn threshold_crossings(w: &Waveform, level: f64, direction: Direction) -> Vec<EdgeEvent> {
    let s = w.samples();
    let dt = w.dt();
    let mut out = Vec::new();
    for i in 0..s.len().saturating_sub(1) {
        let (a, b) = (s[i], s[i + 1]);
        let hit = match direction {
            Direction::Rising => a < level && level <= b,
            Direction::Falling => a > level && level >= b,
        };
        if hit {
            let frac = (level - a) / (b - a);
            out.push(EdgeEvent {
                time: w.time_at(i) + frac * dt,
                direction,
                level,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_crossing_is_interpolated() {
        let w = Waveform::from_fn(1e10, 0.0, 101, |t| t / 10e-9).unwrap();
        let e = threshold_crossings(&w, 0.5, Direction::Rising);
        assert_eq!(e.len(), 1);
        assert!((e[0].time - 5e-9).abs() < 1e-10);
        assert!(threshold_crossings(&w, 0.5, Direction::Falling).is_empty());
    }

    #[test]
    fn flat_signal_has_no_crossings() {
        let w = Waveform::from_samples(1e10, 0.0, alloc::vec![0.0; 50]).unwrap();
        assert!(threshold_crossings(&w, 0.5, Direction::Rising).is_empty());
    }

    #[test]
    fn pulse_gives_rise_then_fall() {
        let w = Waveform::from_samples(1.0, 0.0, alloc::vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        let r = threshold_crossings(&w, 1.5, Direction::Rising);
        let f = threshold_crossings(&w, 1.5, Direction::Falling);
        assert_eq!((r.len(), f.len()), (1, 1));
        assert!((r[0].time - 1.5).abs() < 1e-12);
        assert!((f[0].time - 2.5).abs() < 1e-12);
    }
}

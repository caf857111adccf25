use alloc::vec::Vec;

/// Index range `[start, end]` (inclusive) of a flat run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plateau {
    pub start: usize,
    pub end: usize,
}

impl Plateau {
    /// Number of points in the run.
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }
}

fn flat(lo: f64, hi: f64, tolerance: f64) -> bool {
    hi > 0.0 && lo > 0.0 && (hi - lo) <= tolerance * hi
}

/// Maximal runs of at least `min_len` consecutive positive values whose
/// spread stays within `tolerance` relative to the run maximum. Runs are
/// grown greedily left to right and do not overlap.
pub fn find_plateaus(values: &[f64], tolerance: f64, min_len: usize) -> Vec<Plateau> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let (mut lo, mut hi) = (values[i], values[i]);
        let mut j = i;
        while j + 1 < values.len() {
            let v = values[j + 1];
            let (nlo, nhi) = (lo.min(v), hi.max(v));
            if !flat(nlo, nhi, tolerance) {
                break;
            }
            lo = nlo;
            hi = nhi;
            j += 1;
        }
        if flat(lo, hi, tolerance) && j + 1 - i >= min_len {
            out.push(Plateau { start: i, end: j });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// The longest plateau (earliest on ties).
pub fn longest_plateau(values: &[f64], tolerance: f64) -> Option<Plateau> {
    find_plateaus(values, tolerance, 1)
        .into_iter()
        .fold(None, |best: Option<Plateau>, p| match best {
            Some(b) if b.width() >= p.width() => Some(b),
            _ => Some(p),
        })
}

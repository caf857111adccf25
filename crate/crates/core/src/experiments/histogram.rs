use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Counts over a rectangular grid of bins.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram2D {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[i][j]` for x bin `i`, y bin `j`.
    pub counts: Vec<Vec<u64>>,
    /// Points that fell outside the grid.
    pub out_of_range: u64,
}

/// `n + 1` equally spaced edges over `[lo, hi]`.
pub fn linear_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn bin_of(edges: &[f64], v: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if !(v >= edges[0] && v <= edges[n]) {
        return None;
    }
    let k = edges.partition_point(|&e| e <= v);
    Some(k.saturating_sub(1).min(n - 1))
}

impl Histogram2D {
    pub fn new(x_edges: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        for e in [&x_edges, &y_edges] {
            if e.len() < 2 || e.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid!("histogram edges must be strictly increasing with at least one bin"));
            }
        }
        let counts = alloc::vec![alloc::vec![0; y_edges.len() - 1]; x_edges.len() - 1];
        Ok(Self {
            x_edges,
            y_edges,
            counts,
            out_of_range: 0,
        })
    }

    pub fn fill(&mut self, x: f64, y: f64) {
        match (bin_of(&self.x_edges, x), bin_of(&self.y_edges, y)) {
            (Some(i), Some(j)) => self.counts[i][j] += 1,
            _ => self.out_of_range += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Bin-wise sum with a histogram on the same grid.
    pub fn merge(&mut self, other: &Histogram2D) -> Result<()> {
        if self.x_edges != other.x_edges || self.y_edges != other.y_edges {
            return Err(invalid!("histograms have different grids"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.out_of_range += other.out_of_range;
        Ok(())
    }
}

/// Counts over equal-width bins in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram1D {
    /// `n_bins` bins spanning the data range.
    pub fn of(values: &[f64], n_bins: usize) -> Result<Self> {
        if values.is_empty() || n_bins == 0 {
            return Err(invalid!("histogram needs values and bins"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1e-12_f64.max(lo.abs() * 1e-9);
        }
        let edges = linear_edges(lo, hi, n_bins);
        let mut counts = alloc::vec![0; n_bins];
        for &v in values {
            if let Some(k) = bin_of(&edges, v) {
                counts[k] += 1;
            }
        }
        Ok(Self { edges, counts })
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_out_of_range() {
        let mut h = Histogram2D::new(linear_edges(0.0, 1.0, 4), linear_edges(0.0, 1.0, 2)).unwrap();
        for &(x, y) in &[(0.1, 0.1), (0.9, 0.9), (1.0, 1.0), (1.5, 0.5), (-0.1, 0.2)] {
            h.fill(x, y);
        }
        assert_eq!(h.total(), 3);
        assert_eq!(h.out_of_range, 2);
        assert_eq!(h.counts[3][1], 2);
    }

    #[test]
    fn merge_is_additive() {
        let mut a = Histogram2D::new(linear_edges(0.0, 1.0, 2), linear_edges(0.0, 1.0, 2)).unwrap();
        let mut b = a.clone();
        a.fill(0.2, 0.2);
        b.fill(0.2, 0.2);
        b.fill(0.7, 0.2);
        a.merge(&b).unwrap();
        assert_eq!(a.counts[0][0], 2);
        assert_eq!(a.total(), 3);
    }
}

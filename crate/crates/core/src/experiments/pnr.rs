#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use rand_distr::{Distribution, Normal};

use super::histogram::{linear_edges, Histogram1D, Histogram2D};
use super::report::{ExperimentReport, Table};
use crate::analog::{first_stage, BandPassStage, Chain, PowerMode};
use crate::error::{invalid, Result};
use crate::rng::sub_rng;
use crate::signal::{sample_count, threshold_crossings, Direction, Waveform};
use crate::snspd::{detection::poisson, PhotonSource, SnspdModel};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PnrConfig {
    pub detector: SnspdModel,
    pub source: PhotonSource,
    /// First stage followed by the commercial amplifier.
    pub chain: Chain,
    pub n_pulses: usize,
    /// Discrimination level for both edges at the chain output (V).
    pub level: f64,
    /// Axis of the one-dimensional projection, from the rising-delay axis (deg).
    pub projection_angle_deg: f64,
    /// Absorption time after the sync trigger (s).
    pub sync_delay: f64,
    /// Combined laser and detector timing jitter (s).
    pub timing_jitter: f64,
    pub sample_rate: f64,
    /// Recorded trace length after the sync (s).
    pub window: f64,
    pub histogram_bins: usize,
    pub projection_bins: usize,
}

impl Default for PnrConfig {
    fn default() -> Self {
        Self {
            detector: SnspdModel::default(),
            source: PhotonSource {
                rep_rate: 1e6,
                mean_photon_number: 2.0,
            },
            chain: Chain::new(alloc::vec![
                first_stage(PowerMode::High).with_noise(30e-6),
                BandPassStage::commercial_cryo().with_noise(1e-3),
            ])
            .expect("valid stages"),
            n_pulses: 10_000,
            level: 0.05,
            projection_angle_deg: 70.0,
            sync_delay: 5e-9,
            timing_jitter: 10e-12,
            sample_rate: 10e9,
            window: 25e-9,
            histogram_bins: 80,
            projection_bins: 160,
        }
    }
}

/// Edge delays of one detected pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub n_photons: u32,
    /// Rising-edge crossing relative to the sync (s).
    pub rising: f64,
    /// Falling-edge crossing relative to the sync (s).
    pub falling: f64,
    pub projection: f64,
    /// Index of the assigned photon-number class (0 is one photon).
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnrOutcome {
    pub records: Vec<EdgeRecord>,
    pub histogram: Histogram2D,
    /// Projection values separating consecutive classes, ascending.
    pub valleys: Vec<f64>,
    /// Per class, ordered by photon number: (rising, falling) centroid (s).
    pub centroids: Vec<(f64, f64)>,
    /// `confusion[n - 1][class]`; the last row collects every n beyond the classes.
    pub confusion: Vec<Vec<u64>>,
    /// Pulses with at least one detected photon whose edges were not both found.
    pub missed: usize,
    /// Pulses without a detected photon.
    pub empty: usize,
}

impl PnrOutcome {
    /// Fraction of `n`-photon events assigned to class `n - 1`, summed over `ns`.
    pub fn accuracy(&self, ns: &[u32]) -> f64 {
        let (mut ok, mut all) = (0u64, 0u64);
        for &n in ns {
            if let Some(row) = self.confusion.get(n as usize - 1) {
                all += row.iter().sum::<u64>();
                ok += row.get(n as usize - 1).copied().unwrap_or(0);
            }
        }
        if all == 0 {
            0.0
        } else {
            ok as f64 / all as f64
        }
    }
}

/// `x cos(theta) + y sin(theta)`.
pub fn project(x: f64, y: f64, angle_deg: f64) -> f64 {
    let a = angle_deg.to_radians();
    x * a.cos() + y * a.sin()
}

/// Valley positions of the distribution of `values`.
///
/// The values between the 0.2 % and 99.8 % quantiles are histogrammed into
/// `n_bins` bins and smoothed over five bins. Local maxima above 1 % of the
/// tallest are candidate peaks; neighbouring peaks are kept apart only if
/// the minimum between them is below 60 % of the smaller peak, otherwise the
/// smaller is dropped. The bin centres of the remaining minima are returned.
pub fn valley_split(values: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if values.len() < 10 || n_bins < 8 {
        return Err(invalid!("valley splitting needs at least 10 values and 8 bins"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
    let core: Vec<f64> = sorted.iter().copied().filter(|&v| v >= q(0.002) && v <= q(0.998)).collect();
    let h = Histogram1D::of(&core, n_bins)?;
    let c: Vec<f64> = h.counts.iter().map(|&v| v as f64).collect();
    let smooth: Vec<f64> = (0..n_bins)
        .map(|k| {
            let (a, b) = (k.saturating_sub(2), (k + 2).min(n_bins - 1));
            c[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect();
    let top = smooth.iter().copied().fold(0.0, f64::max);
    let mut peaks: Vec<usize> = (0..n_bins)
        .filter(|&k| {
            let left = k == 0 || smooth[k] > smooth[k - 1];
            let right = k == n_bins - 1 || smooth[k] >= smooth[k + 1];
            left && right && smooth[k] >= 0.01 * top
        })
        .collect();
    let valley_between = |a: usize, b: usize| (a..=b).min_by(|&i, &j| smooth[i].total_cmp(&smooth[j])).unwrap();
    loop {
        let mut merged = false;
        for w in 0..peaks.len().saturating_sub(1) {
            let (a, b) = (peaks[w], peaks[w + 1]);
            let v = valley_between(a, b);
            if smooth[v] >= 0.6 * smooth[a].min(smooth[b]) {
                peaks.remove(if smooth[a] < smooth[b] { w } else { w + 1 });
                merged = true;
                break;
            }
        }
        if !merged {
            break;
        }
    }
    Ok(peaks.windows(2).map(|w| h.center(valley_between(w[0], w[1]))).collect())
}

/// Rising and falling crossings of `level` around the pulse, relative to `t_sync`.
fn edge_delays(w: &Waveform, level: f64, t_sync: f64) -> Option<(f64, f64)> {
    let r = threshold_crossings(w, level, Direction::Rising).into_iter().next()?.time;
    let f = threshold_crossings(w, level, Direction::Falling)
        .into_iter()
        .find(|e| e.time > r)?
        .time;
    Some((r - t_sync, f - t_sync))
}

impl PnrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.source.mean_photon_number > 0.0) {
            return Err(invalid!("pnr.source.mean_photon_number must be positive"));
        }
        self.source.validate()?;
        self.detector.validate()?;
        if self.n_pulses == 0 || self.histogram_bins == 0 || self.projection_bins < 8 {
            return Err(invalid!("pnr needs pulses, histogram bins and at least 8 projection bins"));
        }
        if !(self.level > 0.0) || !(self.timing_jitter >= 0.0) {
            return Err(invalid!("pnr level must be positive and timing jitter non-negative"));
        }
        if !(self.window > self.sync_delay + self.detector.peak_time(1)) || !(self.sync_delay >= 0.0) {
            return Err(invalid!("pnr window must contain the pulse"));
        }
        Ok(())
    }

    /// Output for an `n`-photon pulse absorbed at `t`, polarity-corrected.
    pub fn trace<R: rand::Rng + ?Sized>(&self, n: u32, t: f64, rng: Option<&mut R>) -> Result<Waveform> {
        let mut w = Waveform::from_samples(
            self.sample_rate,
            0.0,
            alloc::vec![0.0; sample_count(self.window, self.sample_rate)],
        )?;
        self.detector.add_pulse(&mut w, n, t, 1.0);
        let out = match rng {
            Some(r) => self.chain.apply_noisy(&w, r)?,
            None => self.chain.apply(&w)?,
        };
        Ok(out.scale(self.chain.sign()))
    }

    /// Noise-free (rising, falling) delays for `n` photons.
    pub fn clean_delays(&self, n: u32) -> Result<Option<(f64, f64)>> {
        let w = self.trace::<crate::rng::SimRng>(n, self.sync_delay, None)?;
        Ok(edge_delays(&w, self.level, 0.0))
    }
}

/// Edge-delay photon-number resolution with a single pixel.
///
/// Every laser pulse delivers Poisson(mu * eta) photons; each detected
/// pulse is passed through the noisy chain and its rising and falling
/// crossings of `level` are timed against the sync. The delays are
/// projected onto the axis at `projection_angle_deg`, split into classes
/// at the valleys of the projected distribution, and the classes are
/// numbered by decreasing rising-edge centroid (slowest rise is one photon).
pub fn run_pnr_experiment(cfg: &PnrConfig, seed: u64) -> Result<(PnrOutcome, ExperimentReport)> {
    cfg.validate()?;
    let eta = cfg.detector.efficiency_at_bias(cfg.detector.i_bias)?;
    let mean = cfg.source.mean_photon_number * eta.efficiency;
    let jitter = Normal::new(0.0, cfg.timing_jitter).map_err(|_| invalid!("bad timing jitter"))?;

    let mut raw = Vec::new();
    let (mut missed, mut empty) = (0usize, 0usize);
    for k in 0..cfg.n_pulses {
        let mut rng = sub_rng(seed, k as u64);
        let n = poisson(mean, &mut rng) as u32;
        if n == 0 {
            empty += 1;
            continue;
        }
        let t = cfg.sync_delay + jitter.sample(&mut rng);
        let w = cfg.trace(n, t, Some(&mut rng))?;
        match edge_delays(&w, cfg.level, 0.0) {
            Some((r, f)) => raw.push((n, r, f)),
            None => missed += 1,
        }
    }
    if raw.len() < 10 {
        return Err(invalid!("too few pulses crossed the pnr level"));
    }

    let proj: Vec<f64> = raw.iter().map(|&(_, r, f)| project(r, f, cfg.projection_angle_deg)).collect();
    let valleys = valley_split(&proj, cfg.projection_bins)?;
    let n_classes = valleys.len() + 1;
    // classes in ascending projection order
    let region = |p: f64| valleys.partition_point(|&v| v <= p);
    let mut sums = alloc::vec![(0.0, 0.0, 0u64); n_classes];
    for (&(_, r, f), &p) in raw.iter().zip(&proj) {
        let c = region(p);
        sums[c].0 += r;
        sums[c].1 += f;
        sums[c].2 += 1;
    }
    let mut order: Vec<usize> = (0..n_classes).collect();
    let centroid = |c: usize| (sums[c].0 / sums[c].2.max(1) as f64, sums[c].1 / sums[c].2.max(1) as f64);
    order.sort_by(|&a, &b| centroid(b).0.total_cmp(&centroid(a).0));
    let mut class_of_region = alloc::vec![0; n_classes];
    for (class, &reg) in order.iter().enumerate() {
        class_of_region[reg] = class;
    }
    let centroids: Vec<(f64, f64)> = order.iter().map(|&reg| centroid(reg)).collect();

    let mut confusion = alloc::vec![alloc::vec![0u64; n_classes]; n_classes];
    let records: Vec<EdgeRecord> = raw
        .iter()
        .zip(&proj)
        .map(|(&(n, r, f), &p)| {
            let class = class_of_region[region(p)];
            confusion[(n as usize - 1).min(n_classes - 1)][class] += 1;
            EdgeRecord {
                n_photons: n,
                rising: r,
                falling: f,
                projection: p,
                class,
            }
        })
        .collect();

    let bounds = |sel: fn(&EdgeRecord) -> f64| {
        let mut v: Vec<f64> = records.iter().map(sel).collect();
        v.sort_by(f64::total_cmp);
        let lo = v[(v.len() - 1) / 1000];
        let hi = v[(v.len() - 1) - (v.len() - 1) / 1000];
        let pad = 0.05 * (hi - lo).max(1e-12);
        (lo - pad, hi + pad)
    };
    let (xl, xh) = bounds(|e| e.rising);
    let (yl, yh) = bounds(|e| e.falling);
    let mut histogram = Histogram2D::new(
        linear_edges(xl, xh, cfg.histogram_bins),
        linear_edges(yl, yh, cfg.histogram_bins),
    )?;
    for e in &records {
        histogram.fill(e.rising, e.falling);
    }

    let outcome = PnrOutcome {
        records,
        histogram,
        valleys,
        centroids,
        confusion,
        missed,
        empty,
    };
    let report = pnr_report(cfg, &outcome, &proj, seed)?;
    Ok((outcome, report))
}

fn pnr_report(cfg: &PnrConfig, o: &PnrOutcome, proj: &[f64], seed: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("pnr", seed);
    report.param("mean_photon_number", cfg.source.mean_photon_number);
    report.param("n_pulses", cfg.n_pulses);
    report.param("level_v", cfg.level);
    report.param("projection_angle_deg", cfg.projection_angle_deg);
    report.param("timing_jitter_s", cfg.timing_jitter);

    let mut t = Table::new("edge_delays", &["rising_s", "falling_s", "n_photons", "class"]);
    for e in &o.records {
        t.push(alloc::vec![e.rising, e.falling, e.n_photons as f64, e.class as f64])?;
    }
    report.tables.push(t);

    let h = &o.histogram;
    let mut t = Table::new("histogram2d", &["rising_s", "falling_s", "count"]);
    for (i, row) in h.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let x = 0.5 * (h.x_edges[i] + h.x_edges[i + 1]);
            let y = 0.5 * (h.y_edges[j] + h.y_edges[j + 1]);
            t.push(alloc::vec![x, y, c as f64])?;
        }
    }
    report.tables.push(t);

    let ph = Histogram1D::of(proj, cfg.projection_bins)?;
    let mut t = Table::new("projection", &["projection_s", "count"]);
    for (k, &c) in ph.counts.iter().enumerate() {
        t.push(alloc::vec![ph.center(k), c as f64])?;
    }
    report.tables.push(t);

    let mut t = Table::new("centroids", &["n_photons", "rising_s", "falling_s"]);
    for (k, &(r, f)) in o.centroids.iter().enumerate() {
        t.push(alloc::vec![(k + 1) as f64, r, f])?;
    }
    report.tables.push(t);

    let mut t = Table::new("confusion", &["n_true", "n_assigned", "count"]);
    for (n, row) in o.confusion.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            t.push(alloc::vec![(n + 1) as f64, (c + 1) as f64, v as f64])?;
        }
    }
    report.tables.push(t);

    report.metric("detected_pulses", "count", o.records.len() as f64);
    report.metric("missed_pulses", "count", o.missed as f64);
    report.metric("valleys", "count", o.valleys.len() as f64);
    report.metric("accuracy_n1_n2", "fraction", o.accuracy(&[1, 2]));
    report.metric("histogram_out_of_range", "count", o.histogram.out_of_range as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonpositive_mu_rejected() {
        let mut cfg = PnrConfig::default();
        cfg.source.mean_photon_number = 0.0;
        assert!(run_pnr_experiment(&cfg, 0).is_err());
    }

    #[test]
    fn clean_rising_delay_decreases_with_n() {
        let cfg = PnrConfig::default();
        let d: Vec<f64> = (1..=4).map(|n| cfg.clean_delays(n).unwrap().unwrap().0).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }

    #[test]
    fn high_pass_stage_favours_fast_pulses() {
        let cfg = PnrConfig::default();
        let peak = |n| cfg.trace::<crate::rng::SimRng>(n, 5e-9, None).unwrap().max().1;
        let raw = |n| cfg.detector.peak_voltage(n);
        assert!(peak(2) / peak(1) > raw(2) / raw(1));
    }

    #[test]
    fn valleys_of_two_bumps() {
        let mut v = Vec::new();
        for k in 0..2000 {
            let u = (k as f64 + 0.5) / 2000.0;
            v.push(u);
            v.push(3.0 + u);
        }
        let s = valley_split(&v, 40).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0] > 1.0 && s[0] < 3.0);
    }

    #[test]
    fn histogram_accounts_for_all_records() {
        let cfg = PnrConfig {
            n_pulses: 400,
            ..Default::default()
        };
        let (o, _) = run_pnr_experiment(&cfg, 5).unwrap();
        assert_eq!(o.histogram.total() + o.histogram.out_of_range, o.records.len() as u64);
        assert_eq!(o.records.len() + o.missed + o.empty, cfg.n_pulses);
    }
}

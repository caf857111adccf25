use alloc::vec::Vec;

use super::plateau::longest_plateau;
use super::report::{ExperimentReport, Table};
use crate::error::{invalid, Result};
use crate::rng::sub_seed;
use crate::snspd::{count_detections, PhotonSource, SnspdModel};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct BiasScanConfig {
    pub detector: SnspdModel,
    pub source: PhotonSource,
    /// Bias currents to visit (A).
    pub bias_grid: Vec<f64>,
    /// RMS noise current the cryogenic readout couples into the detector (A).
    pub cryo_noise_current: f64,
    /// RMS noise current of the conventional readout (A).
    pub conventional_noise_current: f64,
    /// Counting time per bias point (s).
    pub window: f64,
    /// Relative flatness defining the count-rate plateau.
    pub plateau_tolerance: f64,
}

impl Default for BiasScanConfig {
    fn default() -> Self {
        Self {
            detector: SnspdModel::default(),
            source: PhotonSource {
                rep_rate: 1e6,
                mean_photon_number: 0.5,
            },
            bias_grid: (1..=140).map(|k| k as f64 * 0.1e-6).collect(),
            cryo_noise_current: 0.05e-6,
            conventional_noise_current: 0.4e-6,
            window: 1.0,
            plateau_tolerance: 0.02,
        }
    }
}

/// One readout's scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutScan {
    pub bias: Vec<f64>,
    /// Detections per second under illumination.
    pub count_rate: Vec<f64>,
    /// Detections per second without illumination.
    pub dark_rate: Vec<f64>,
    /// Bias range of the count-rate plateau (A).
    pub plateau: Option<(f64, f64)>,
    /// First bias above the counting region with zero counts (A).
    pub latch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasScanOutcome {
    pub cryo: ReadoutScan,
    pub conventional: ReadoutScan,
}

impl BiasScanOutcome {
    /// Cryogenic plateau contains the conventional one and the cryogenic
    /// readout latches at a higher bias.
    pub fn cryo_advantage(&self) -> bool {
        match (self.cryo.plateau, self.conventional.plateau, self.cryo.latch, self.conventional.latch) {
            (Some((c0, c1)), Some((v0, v1)), Some(lc), Some(lv)) => {
                c0 <= v0 && c1 >= v1 && (c1 - c0) > (v1 - v0) && lc > lv
            }
            _ => false,
        }
    }
}

fn scan(cfg: &BiasScanConfig, detector: &SnspdModel, seed: u64) -> Result<ReadoutScan> {
    let dark_source = PhotonSource {
        mean_photon_number: 0.0,
        ..cfg.source
    };
    let mut count_rate = Vec::with_capacity(cfg.bias_grid.len());
    let mut dark_rate = Vec::with_capacity(cfg.bias_grid.len());
    for (k, &i) in cfg.bias_grid.iter().enumerate() {
        let m = SnspdModel {
            i_bias: i,
            ..detector.clone()
        };
        let lit = count_detections(&m, &cfg.source, cfg.window, sub_seed(seed, 2 * k as u64))?;
        let dark = count_detections(&m, &dark_source, cfg.window, sub_seed(seed, 2 * k as u64 + 1))?;
        count_rate.push(lit as f64 / cfg.window);
        dark_rate.push(dark as f64 / cfg.window);
    }
    let plateau = longest_plateau(&count_rate, cfg.plateau_tolerance)
        .filter(|p| p.width() >= 2)
        .map(|p| (cfg.bias_grid[p.start], cfg.bias_grid[p.end]));
    let first_counting = count_rate.iter().position(|&r| r > 0.0);
    let latch = first_counting.and_then(|f| {
        (f..count_rate.len())
            .find(|&k| count_rate[k] == 0.0 && count_rate[k..].iter().all(|&r| r == 0.0))
            .map(|k| cfg.bias_grid[k])
    });
    Ok(ReadoutScan {
        bias: cfg.bias_grid.clone(),
        count_rate,
        dark_rate,
        plateau,
        latch,
    })
}

/// Count and dark-count rates against bias for the cryogenic and the
/// conventional readout. The readouts differ only in the noise current they
/// feed back into the detector.
pub fn run_bias_scan(cfg: &BiasScanConfig, seed: u64) -> Result<(BiasScanOutcome, ExperimentReport)> {
    if cfg.bias_grid.is_empty() {
        return Err(invalid!("bias_scan.bias_grid must not be empty"));
    }
    if cfg.bias_grid.iter().any(|&i| !(i > 0.0)) {
        return Err(invalid!("bias_scan.bias_grid must hold positive currents"));
    }
    if !(cfg.window > 0.0) {
        return Err(invalid!("bias_scan.window must be positive"));
    }
    if !(cfg.cryo_noise_current >= 0.0) || !(cfg.conventional_noise_current >= 0.0) {
        return Err(invalid!("readout noise currents must be non-negative"));
    }
    cfg.detector.validate()?;
    cfg.source.validate()?;
    // both readouts see the same photon and dark-count draws, so their
    // difference reflects the readout alone
    let cryo = scan(cfg, &cfg.detector.with_readout_noise(cfg.cryo_noise_current), seed)?;
    let conventional = scan(cfg, &cfg.detector.with_readout_noise(cfg.conventional_noise_current), seed)?;
    let outcome = BiasScanOutcome { cryo, conventional };

    let mut report = ExperimentReport::new("bias_scan", seed);
    report.param("mean_photon_number", cfg.source.mean_photon_number);
    report.param("rep_rate_hz", cfg.source.rep_rate);
    report.param("window_s", cfg.window);
    report.param("cryo_noise_current_a", cfg.cryo_noise_current);
    report.param("conventional_noise_current_a", cfg.conventional_noise_current);
    let mut t = Table::new(
        "bias_scan",
        &["bias_a", "cryo_count_rate_hz", "cryo_dark_rate_hz", "conventional_count_rate_hz", "conventional_dark_rate_hz"],
    );
    for k in 0..cfg.bias_grid.len() {
        t.push(alloc::vec![
            cfg.bias_grid[k],
            outcome.cryo.count_rate[k],
            outcome.cryo.dark_rate[k],
            outcome.conventional.count_rate[k],
            outcome.conventional.dark_rate[k],
        ])?;
    }
    report.tables.push(t);
    for (label, s) in [("cryo", &outcome.cryo), ("conventional", &outcome.conventional)] {
        if let Some((a, b)) = s.plateau {
            report.metric(&alloc::format!("{label}_plateau_start"), "A", a);
            report.metric(&alloc::format!("{label}_plateau_end"), "A", b);
            report.metric(&alloc::format!("{label}_plateau_length"), "A", b - a);
        }
        if let Some(l) = s.latch {
            report.metric(&alloc::format!("{label}_latch_current"), "A", l);
        }
    }
    report.metric("cryo_advantage", "bool", outcome.cryo_advantage() as u8 as f64);
    Ok((outcome, report))
}

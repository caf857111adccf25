//! Experiment drivers. Each returns a typed outcome plus an
//! [`ExperimentReport`] holding the tables and scalar metrics.

mod bias_scan;
mod heat;
mod histogram;
mod laser_readout;
mod latency;
mod plateau;
mod pnr;
mod report;
mod simulate;
mod sweep;

pub use bias_scan::{run_bias_scan, BiasScanConfig, BiasScanOutcome, ReadoutScan};
pub use heat::{heat_budget, run_heat_budget, switching_power, HeatBudget, HeatComponent, HeatConfig, StageBudget, StageLoad};
pub use histogram::{linear_edges, Histogram1D, Histogram2D};
pub use laser_readout::{run_laser_readout, LaserReadoutConfig, LaserReadoutOutcome};
pub use latency::{cable_delay, latency_budget, run_latency_budget, LatencyBudget, LatencyConfig, LatencyItem};
pub use plateau::{find_plateaus, longest_plateau, Plateau};
pub use pnr::{project, run_pnr_experiment, valley_split, EdgeRecord, PnrConfig, PnrOutcome};
pub use report::{ExperimentReport, Metric, Table};
pub use simulate::{run_simulation, SimulateConfig, SimulateOutcome};
pub use sweep::{run_threshold_sweep, SweepConfig, SweepOutcome};

//! File formats, output writers and the command-line driver for the
//! `cryochain-core` models.

pub mod dispatch;
pub mod error;
pub mod output;
pub mod scenario;
pub mod svg;

pub use error::CliError;
pub use scenario::{parse_scenario, to_toml, Parsed, Scenario, Strictness};

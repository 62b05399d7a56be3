//! Monte Carlo simulation of a solar-powered cellular downlink with a
//! standby grid supply, CoMP user association (DPS and JT) and hourly
//! green-energy sharing between neighbouring base stations.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod plot;
pub mod power;
pub mod profile;
pub mod radio;
pub mod sweep;

pub use config::{LoadMode, LoadRedraw, ScenarioConfig};
pub use engine::{run_iteration, run_monte_carlo, RunResult};
pub use error::{Error, Result};
pub use geometry::{Layout, SiteId};
pub use radio::CompMode;

//! Solar harvesting, battery storage and inter-BS energy sharing.

mod sharing;
mod solar;
mod storage;

pub use sharing::{
    run_sharing, shareable_surplus, AlphaMap, DonorOrder, EnergyNetwork, HourInput, LedgerRow, SharingOutcome,
    SharingPolicy, SiteShare, Transfer, TransferSizing,
};
pub use solar::{SolarConfig, SpatialMode};
pub use storage::{step_storage, StorageState};

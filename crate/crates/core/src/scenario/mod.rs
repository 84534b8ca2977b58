//! Composition layer: allocate a scaled EV fleet across the network, build
//! per-timestep flexibility bounds and social-impact costs from cluster
//! statistics, run week-long baseline and flexibility OPF sequences, and
//! account curtailment displacement.

mod allocation;
mod result;
mod schedule;
mod simulate;

pub use allocation::{allocate_fleet, cluster_shares, largest_remainder, FleetAllocation};
pub use result::{read_summary, write_bundle, RunTotals, SummaryDocument, RESULT_SCHEMA};
pub use schedule::{per_unit_flex_cost, social_cost, timestep_schedule, TimestepSchedule};
pub use simulate::{
    curtailment_reduction, run_baseline, run_flex, ScenarioParams, SimulationResult,
    TimestepRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("demand is zero over the horizon; cannot distribute the fleet")]
    AllZeroDemand,
    #[error("cluster shares must sum to 1, got {0}")]
    BadClusterShares(f64),
    #[error("total EV count must be >= 1")]
    EmptyFleet,
    #[error("window {start}..{end} does not fit a horizon of {len} steps")]
    BadWindow {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("results compare different horizons: {0} vs {1} timesteps")]
    HorizonMismatch(usize, usize),
    #[error("cluster model has {model} clusters but aggregates carry {aggregates}")]
    ClusterCountMismatch { model: usize, aggregates: usize },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("opf error: {0}")]
    Opf(#[from] crate::opf_core::OpfError),
    #[error("cannot write results bundle {path}: {reason}")]
    Bundle { path: String, reason: String },
}

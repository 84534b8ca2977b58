//! Per-timestep convex-relaxed AC optimal power flow.
//!
//! The branch-flow model is realised at the balanced single-phase case:
//! squared voltages `v`, complex line flows `S = P + jQ` and squared
//! currents `l` per line, with the nonconvex coupling `v_parent * l = |S|^2`
//! relaxed to the rotated second-order cone `v_parent * l >= |S|^2`. The
//! objective prices EV demand turn-up by cluster, wind curtailment by
//! generator, and weights network losses; the relaxation is exact when
//! faking extra current is more expensive than every real alternative, and
//! an explicit per-line gap report flags any run where it is not.

mod backend;
mod conic;
pub mod conformance;
mod diagnostics;
mod dump;
mod instance;
mod solve;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use backend::{BackendError, ClarabelBackend, ConicBackend, RawSolution, RawStatus};
pub use conic::{assemble_conic, ConeSpec, ConicProgram, ConstraintCounts, VarLayout};
pub use diagnostics::{
    exactness_report, recover_operating_point, residuals, ExactnessReport, OperatingPoint,
    ResidualReport, EXACTNESS_FLAG_THRESHOLD,
};
pub use dump::write_solution_dump;
pub use instance::{build_instance, FlexEntry, OpfInstance, OpfParams, WindGen};
pub use solve::{solve, ObjectiveParts, OpfSolution, SolveStatus};

use thiserror::Error;

/// Residual bound a solution must meet to be reported `Optimal`.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum OpfError {
    #[error("timestep {t} outside horizon of {len} steps")]
    TimestepOutOfRange { t: usize, len: usize },
    #[error("flexibility bound for cluster {cluster} at bus {bus} is negative")]
    NegativeFlexBound { cluster: usize, bus: String },
    #[error(
        "curtailment cost {pi_curtail} for generator `{gen}` does not exceed the largest \
         social-impact coefficient {max_pi_flex}; curtailment must be the last resort"
    )]
    CurtailCostTooLow {
        gen: String,
        pi_curtail: f64,
        max_pi_flex: f64,
    },
    #[error("loss weight must be positive, got {0}")]
    BadLossWeight(f64),
    #[error(
        "slack voltage squared {v_slack_sq} lies outside the slack bus bounds [{v_min_sq}, {v_max_sq}]"
    )]
    BadSlackVoltage {
        v_slack_sq: f64,
        v_min_sq: f64,
        v_max_sq: f64,
    },
    #[error("social-impact coefficient must be positive, got {0}")]
    BadFlexCost(f64),
    #[error("flex entry references bus index {bus_idx} of {n_bus}")]
    BadBusIndex { bus_idx: usize, n_bus: usize },
    #[error("backend failed: {0}")]
    Backend(String),
}

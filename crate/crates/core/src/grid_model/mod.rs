//! Radial distribution network model: buses, directed lines with complex
//! impedance, generators, and demand/wind time series, with validation and
//! per-unit conversion for the OPF.

mod load;
mod per_unit;

pub use load::{load_network, NetworkDocument};
pub use per_unit::{demand_distribution, to_per_unit, to_physical, PuGenerator, PuLine, PuNetwork};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_V_MIN_PU: f64 = 0.9;
pub const DEFAULT_V_MAX_PU: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub base_kv: f64,
    #[serde(default = "default_v_min")]
    pub v_min_pu: f64,
    #[serde(default = "default_v_max")]
    pub v_max_pu: f64,
    #[serde(default)]
    pub is_slack: bool,
}

fn default_v_min() -> f64 {
    DEFAULT_V_MIN_PU
}
fn default_v_max() -> f64 {
    DEFAULT_V_MAX_PU
}

/// Oriented parent -> child after validation (parent is nearer the slack).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub s_max_mva: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    WindCurtailable,
    Firm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub kind: GeneratorKind,
    pub p_profile_mw: TimeSeries,
    /// (q_min_mvar, q_max_mvar); `None` pins reactive output to zero.
    pub q_capability: Option<(f64, f64)>,
    /// Cost per MWh of curtailed energy; must dominate every social-impact
    /// coefficient so curtailment is the last resort.
    pub curtail_cost: f64,
}

/// Uniformly sampled series; the timestep is inferred from the source CSV
/// and must be identical across all series in a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub start: DateTime<Utc>,
    pub step_minutes: u32,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, idx: usize) -> DateTime<Utc> {
        self.start + Duration::minutes(i64::from(self.step_minutes) * idx as i64)
    }

    /// Index of `t` in this series, if it lies exactly on the grid.
    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let delta = (t - self.start).num_minutes();
        if delta < 0 || self.step_minutes == 0 {
            return None;
        }
        let step = i64::from(self.step_minutes);
        if delta % step != 0 {
            return None;
        }
        let idx = (delta / step) as usize;
        (idx < self.values.len()).then_some(idx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub s_base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub demand_mw: BTreeMap<String, TimeSeries>,
}

impl Network {
    pub fn slack(&self) -> &Bus {
        self.buses
            .iter()
            .find(|b| b.is_slack)
            .expect("validated network has a slack bus")
    }

    pub fn bus_index(&self) -> BTreeMap<&str, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    /// Number of timesteps shared by all series.
    pub fn horizon_len(&self) -> usize {
        self.demand_mw
            .values()
            .map(TimeSeries::len)
            .chain(self.generators.iter().map(|g| g.p_profile_mw.len()))
            .next()
            .unwrap_or(0)
    }

    pub fn step_minutes(&self) -> u32 {
        self.demand_mw
            .values()
            .map(|s| s.step_minutes)
            .chain(self.generators.iter().map(|g| g.p_profile_mw.step_minutes))
            .next()
            .unwrap_or(0)
    }

    pub fn series_start(&self) -> Option<DateTime<Utc>> {
        self.demand_mw
            .values()
            .map(|s| s.start)
            .chain(self.generators.iter().map(|g| g.p_profile_mw.start))
            .next()
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid network document {path}: {reason}")]
    Document { path: String, reason: String },
    #[error("network has {0} slack buses, expected exactly one")]
    SlackCount(usize),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("{kind} `{id}` references unknown bus `{bus}`")]
    UnknownBus {
        kind: &'static str,
        id: String,
        bus: String,
    },
    #[error("line `{0}` connects a bus to itself")]
    SelfLoop(String),
    #[error("line `{0}` has zero impedance")]
    ZeroImpedance(String),
    #[error("network is not radial: line `{0}` closes a cycle")]
    Cycle(String),
    #[error("network is not radial: bus `{0}` is not connected to the slack")]
    Disconnected(String),
    #[error("bus `{0}` has invalid voltage bounds")]
    BadVoltageBounds(String),
    #[error("bus `{0}` has non-positive base_kv")]
    BadBaseKv(String),
    #[error("line `{0}` has non-positive s_max_mva")]
    BadThermalLimit(String),
    #[error("profile `{id}`: {reason}")]
    BadProfile { id: String, reason: String },
    #[error("series `{id}` does not match the network horizon: {reason}")]
    HorizonMismatch { id: String, reason: String },
    #[error("demand is zero over the whole horizon")]
    AllZeroDemand,
    #[error("s_base_mva must be positive")]
    BadSBase,
    #[error("generator `{0}` has non-positive curtail_cost")]
    BadCurtailCost(String),
}

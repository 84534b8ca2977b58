//! Per-unit conversion and demand-share computation.
//!
//! Impedance bases use the child-side bus voltage of each line,
//! `Z_base = base_kv^2 / s_base_mva`; powers divide by `s_base_mva`. The
//! conversion is exactly invertible.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::{Bus, Generator, GeneratorKind, Line, Network, NetworkError, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct PuLine {
    pub id: String,
    pub from_idx: usize,
    pub to_idx: usize,
    pub r_pu: f64,
    pub x_pu: f64,
    pub s_max_pu: f64,
}

impl PuLine {
    pub fn z_abs_pu(&self) -> f64 {
        (self.r_pu * self.r_pu + self.x_pu * self.x_pu).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PuGenerator {
    pub id: String,
    pub bus_idx: usize,
    pub kind: GeneratorKind,
    pub avail_pu: Vec<f64>,
    pub q_capability_pu: Option<(f64, f64)>,
    /// Still per MWh; converted to an objective coefficient at instance
    /// build time.
    pub curtail_cost_per_mwh: f64,
}

/// The validated network in solver units, indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub struct PuNetwork {
    pub s_base_mva: f64,
    pub bus_ids: Vec<String>,
    pub base_kv: Vec<f64>,
    pub v_min_sq: Vec<f64>,
    pub v_max_sq: Vec<f64>,
    pub slack_idx: usize,
    pub lines: Vec<PuLine>,
    pub generators: Vec<PuGenerator>,
    /// Per bus index, per timestep, p.u.
    pub demand_pu: Vec<Vec<f64>>,
    pub series_start: DateTime<Utc>,
    pub step_minutes: u32,
    pub horizon_len: usize,
}

impl PuNetwork {
    pub fn n_bus(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn timestamp(&self, t: usize) -> DateTime<Utc> {
        self.series_start + chrono::Duration::minutes(i64::from(self.step_minutes) * t as i64)
    }

    pub fn step_hours(&self) -> f64 {
        f64::from(self.step_minutes) / 60.0
    }
}

pub fn to_per_unit(network: &Network) -> Result<PuNetwork, NetworkError> {
    let index = network.bus_index();
    let slack_idx = network
        .buses
        .iter()
        .position(|b| b.is_slack)
        .ok_or(NetworkError::SlackCount(0))?;
    let s_base = network.s_base_mva;
    if !(s_base > 0.0) {
        return Err(NetworkError::BadSBase);
    }

    let lines = network
        .lines
        .iter()
        .map(|l| {
            let to_idx = index[l.to_bus.as_str()];
            let z_base = network.buses[to_idx].base_kv.powi(2) / s_base;
            PuLine {
                id: l.id.clone(),
                from_idx: index[l.from_bus.as_str()],
                to_idx,
                r_pu: l.r_ohm / z_base,
                x_pu: l.x_ohm / z_base,
                s_max_pu: l.s_max_mva / s_base,
            }
        })
        .collect();

    let horizon_len = network.horizon_len();
    let mut demand_pu = vec![vec![0.0; horizon_len]; network.buses.len()];
    for (bus, ts) in &network.demand_mw {
        let bi = index[bus.as_str()];
        for (t, v) in ts.values.iter().enumerate() {
            demand_pu[bi][t] += v / s_base;
        }
    }

    let generators = network
        .generators
        .iter()
        .map(|g| PuGenerator {
            id: g.id.clone(),
            bus_idx: index[g.bus.as_str()],
            kind: g.kind,
            avail_pu: g.p_profile_mw.values.iter().map(|v| v / s_base).collect(),
            q_capability_pu: g.q_capability.map(|(lo, hi)| (lo / s_base, hi / s_base)),
            curtail_cost_per_mwh: g.curtail_cost,
        })
        .collect();

    let series_start = network
        .series_start()
        .unwrap_or_else(|| DateTime::<Utc>::from_timestamp(0, 0).unwrap());

    Ok(PuNetwork {
        s_base_mva: s_base,
        bus_ids: network.buses.iter().map(|b| b.id.clone()).collect(),
        base_kv: network.buses.iter().map(|b| b.base_kv).collect(),
        v_min_sq: network.buses.iter().map(|b| b.v_min_pu * b.v_min_pu).collect(),
        v_max_sq: network.buses.iter().map(|b| b.v_max_pu * b.v_max_pu).collect(),
        slack_idx,
        lines,
        generators,
        demand_pu,
        series_start,
        step_minutes: network.step_minutes(),
        horizon_len,
    })
}

/// Inverse of [`to_per_unit`]; used to assert the conversion round-trips.
pub fn to_physical(pu: &PuNetwork) -> Network {
    let buses: Vec<Bus> = (0..pu.n_bus())
        .map(|i| Bus {
            id: pu.bus_ids[i].clone(),
            base_kv: pu.base_kv[i],
            v_min_pu: pu.v_min_sq[i].sqrt(),
            v_max_pu: pu.v_max_sq[i].sqrt(),
            is_slack: i == pu.slack_idx,
        })
        .collect();
    let lines = pu
        .lines
        .iter()
        .map(|l| {
            let z_base = pu.base_kv[l.to_idx].powi(2) / pu.s_base_mva;
            Line {
                id: l.id.clone(),
                from_bus: pu.bus_ids[l.from_idx].clone(),
                to_bus: pu.bus_ids[l.to_idx].clone(),
                r_ohm: l.r_pu * z_base,
                x_ohm: l.x_pu * z_base,
                s_max_mva: l.s_max_pu * pu.s_base_mva,
            }
        })
        .collect();
    let generators = pu
        .generators
        .iter()
        .map(|g| Generator {
            id: g.id.clone(),
            bus: pu.bus_ids[g.bus_idx].clone(),
            kind: g.kind,
            p_profile_mw: TimeSeries {
                start: pu.series_start,
                step_minutes: pu.step_minutes,
                values: g.avail_pu.iter().map(|v| v * pu.s_base_mva).collect(),
            },
            q_capability: g
                .q_capability_pu
                .map(|(lo, hi)| (lo * pu.s_base_mva, hi * pu.s_base_mva)),
            curtail_cost: g.curtail_cost_per_mwh,
        })
        .collect();
    let demand_mw = pu
        .demand_pu
        .iter()
        .enumerate()
        .filter(|(_, series)| series.iter().any(|&v| v != 0.0))
        .map(|(i, series)| {
            (
                pu.bus_ids[i].clone(),
                TimeSeries {
                    start: pu.series_start,
                    step_minutes: pu.step_minutes,
                    values: series.iter().map(|v| v * pu.s_base_mva).collect(),
                },
            )
        })
        .collect();
    Network {
        s_base_mva: pu.s_base_mva,
        buses,
        lines,
        generators,
        demand_mw,
    }
}

/// Share of total demand energy per bus over the horizon; weights sum to 1.
pub fn demand_distribution(network: &Network) -> Result<BTreeMap<String, f64>, NetworkError> {
    let mut energy: BTreeMap<String, f64> = BTreeMap::new();
    let mut total = 0.0;
    for (bus, ts) in &network.demand_mw {
        let e: f64 = ts.values.iter().sum();
        if e < 0.0 {
            return Err(NetworkError::BadProfile {
                id: bus.clone(),
                reason: "negative demand energy".into(),
            });
        }
        energy.insert(bus.clone(), e);
        total += e;
    }
    if total <= 0.0 {
        return Err(NetworkError::AllZeroDemand);
    }
    Ok(energy.into_iter().map(|(bus, e)| (bus, e / total)).collect())
}

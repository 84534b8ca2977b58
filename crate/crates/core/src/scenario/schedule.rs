//! Per-timestep flexibility bounds, baseline EV demand and social-impact
//! costs, derived from cluster statistics by time-of-day window averaging.

use chrono::Timelike;

use crate::clustering::ClusterAggregates;
use crate::grid_model::PuNetwork;
use crate::opf_core::FlexEntry;
use crate::MINUTES_PER_DAY;

use super::allocation::FleetAllocation;
use super::ScenarioError;

/// Everything the OPF needs from the fleet at one timestep.
#[derive(Debug, Clone)]
pub struct TimestepSchedule {
    pub flex_entries: Vec<FlexEntry>,
    /// Objective coefficient per cluster, per p.u. of dispatched turn-up.
    pub pi_flex: Vec<f64>,
    /// Average number of EVs already charging, `n_ev * frac_charging`
    /// (fractional by construction).
    pub n_charging: Vec<Vec<f64>>,
    /// Headroom counts `n_ev - n_charging`.
    pub n_remain: Vec<Vec<f64>>,
    /// Baseline charging load per bus, p.u.
    pub ev_baseline_pu: Vec<f64>,
}

/// Social-impact coefficient: inversely proportional to the cluster's
/// habitual charging power at this time of day, in 1/kW.
pub fn social_cost(window_mean_kw: f64, epsilon_kw: f64) -> f64 {
    1.0 / (window_mean_kw + epsilon_kw)
}

/// Converts a per-kW coefficient to the per-p.u. objective coefficient.
pub fn per_unit_flex_cost(pi_per_kw: f64, s_base_mva: f64) -> f64 {
    pi_per_kw * 1000.0 * s_base_mva
}

/// Mean of a minute-of-day curve over the window starting at `start_minute`
/// (wrapping midnight) lasting `step_minutes`.
fn window_mean(curve: &[f64], start_minute: usize, step_minutes: u32) -> f64 {
    let len = step_minutes.max(1) as usize;
    let mut sum = 0.0;
    for offset in 0..len {
        sum += curve[(start_minute + offset) % MINUTES_PER_DAY];
    }
    sum / len as f64
}

/// Builds the schedule for timestep `t`. The time-of-day window comes from
/// the series timestamps in UTC.
pub fn timestep_schedule(
    aggregates: &ClusterAggregates,
    allocation: &FleetAllocation,
    network: &PuNetwork,
    t: usize,
    epsilon_kw: f64,
) -> Result<TimestepSchedule, ScenarioError> {
    if !(epsilon_kw > 0.0) {
        return Err(ScenarioError::BadEpsilon(epsilon_kw));
    }
    let k = aggregates.k();
    let n_bus = network.n_bus();
    let stamp = network.timestamp(t);
    let start_minute = (stamp.hour() * 60 + stamp.minute()) as usize;
    let step = network.step_minutes;
    let to_pu = 1.0 / (1000.0 * network.s_base_mva);

    let mut flex_entries = Vec::new();
    let mut pi_flex = Vec::with_capacity(k);
    let mut n_charging = vec![vec![0.0; n_bus]; k];
    let mut n_remain = vec![vec![0.0; n_bus]; k];
    let mut ev_baseline_pu = vec![0.0; n_bus];

    for (cluster, stats) in aggregates.clusters.iter().enumerate() {
        let frac = window_mean(&stats.frac_charging, start_minute, step);
        let mean_kw = window_mean(&stats.centroid_profile_kw, start_minute, step);
        pi_flex.push(per_unit_flex_cost(
            social_cost(mean_kw, epsilon_kw),
            network.s_base_mva,
        ));
        for bus_idx in 0..n_bus {
            let n = allocation.n_ev[cluster][bus_idx] as f64;
            if n == 0.0 {
                continue;
            }
            let charging = n * frac;
            let remain = (n - charging).max(0.0);
            if n - charging < -1e-9 {
                log::warn!(
                    "cluster {cluster} at bus {}: charging count {charging:.3} exceeds fleet {n}",
                    allocation.bus_ids[bus_idx]
                );
            }
            n_charging[cluster][bus_idx] = charging;
            n_remain[cluster][bus_idx] = remain;
            ev_baseline_pu[bus_idx] += n * mean_kw * to_pu;
            flex_entries.push(FlexEntry {
                cluster,
                bus_idx,
                ub_pu: remain * stats.p_max_kw * to_pu,
            });
        }
    }

    Ok(TimestepSchedule {
        flex_entries,
        pi_flex,
        n_charging,
        n_remain,
        ev_baseline_pu,
    })
}

//! Week-scale baseline and flexibility runs: independent per-timestep OPF
//! solves, parallelised, with failures isolated and loudly reported.

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use crate::clustering::ClusterAggregates;
use crate::grid_model::PuNetwork;
use crate::opf_core::{
    build_instance, solve, ConicBackend, OpfParams, SolveStatus,
};

use super::allocation::FleetAllocation;
use super::schedule::timestep_schedule;
use super::ScenarioError;

#[derive(Debug, Clone)]
pub struct ScenarioParams {
    pub opf: OpfParams,
    pub epsilon_kw: f64,
    /// Add the already-charging fleet's load to bus demand.
    pub include_baseline_ev_demand: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            opf: OpfParams::default(),
            epsilon_kw: 0.01,
            include_baseline_ev_demand: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimestepRecord {
    pub t: usize,
    pub timestamp: DateTime<Utc>,
    pub status: SolveStatus,
    /// (generator id, curtailed MW)
    pub curtail_mw: Vec<(String, f64)>,
    /// (cluster, bus id, dispatched MW)
    pub flex_mw: Vec<(usize, String, f64)>,
    /// |V| per bus, p.u.
    pub v_pu: Vec<f64>,
    pub slack_mw: f64,
    pub exactness: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub bus_ids: Vec<String>,
    pub records: Vec<TimestepRecord>,
    pub failed_timesteps: Vec<usize>,
    pub step_minutes: u32,
    /// Totals over successful timesteps only.
    pub curtailment_mwh: f64,
    pub flex_energy_mwh: f64,
    pub max_v_pu: f64,
    pub max_exactness: f64,
}

impl SimulationResult {
    pub fn n_timesteps(&self) -> usize {
        self.records.len()
    }
}

/// Baseline: the fleet charges as it always has (its load can be included)
/// but offers no headroom, while wind stays curtailable.
pub fn run_baseline(
    network: &PuNetwork,
    aggregates: &ClusterAggregates,
    allocation: &FleetAllocation,
    window: std::ops::Range<usize>,
    params: &ScenarioParams,
    backend: &dyn ConicBackend,
) -> Result<SimulationResult, ScenarioError> {
    run(network, aggregates, allocation, window, params, backend, false)
}

/// Flexibility run: headroom bounds and social-impact costs active.
pub fn run_flex(
    network: &PuNetwork,
    aggregates: &ClusterAggregates,
    allocation: &FleetAllocation,
    window: std::ops::Range<usize>,
    params: &ScenarioParams,
    backend: &dyn ConicBackend,
) -> Result<SimulationResult, ScenarioError> {
    run(network, aggregates, allocation, window, params, backend, true)
}

fn run(
    network: &PuNetwork,
    aggregates: &ClusterAggregates,
    allocation: &FleetAllocation,
    window: std::ops::Range<usize>,
    params: &ScenarioParams,
    backend: &dyn ConicBackend,
    with_flex: bool,
) -> Result<SimulationResult, ScenarioError> {
    if window.end > network.horizon_len || window.start >= window.end {
        return Err(ScenarioError::BadWindow {
            start: window.start,
            end: window.end,
            len: network.horizon_len,
        });
    }
    if allocation.n_ev.len() != aggregates.k() {
        return Err(ScenarioError::ClusterCountMismatch {
            model: allocation.n_ev.len(),
            aggregates: aggregates.k(),
        });
    }

    let steps: Vec<usize> = window.collect();
    let mut records: Vec<TimestepRecord> = steps
        .par_iter()
        .map(|&t| solve_one(network, aggregates, allocation, t, params, backend, with_flex))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| r.t);

    let step_hours = network.step_hours();
    let mut curtailment_mwh = 0.0;
    let mut flex_energy_mwh = 0.0;
    let mut max_v_pu = f64::NEG_INFINITY;
    let mut max_exactness: f64 = 0.0;
    let mut failed = Vec::new();
    for record in &records {
        if record.status != SolveStatus::Optimal {
            failed.push(record.t);
            continue;
        }
        curtailment_mwh += record.curtail_mw.iter().map(|(_, mw)| mw).sum::<f64>() * step_hours;
        flex_energy_mwh += record.flex_mw.iter().map(|(_, _, mw)| mw).sum::<f64>() * step_hours;
        for &v in &record.v_pu {
            max_v_pu = max_v_pu.max(v);
        }
        max_exactness = max_exactness.max(record.exactness);
    }
    if !failed.is_empty() {
        log::warn!(
            "{} of {} timesteps failed: {:?}",
            failed.len(),
            records.len(),
            failed
        );
    }
    if !max_v_pu.is_finite() {
        max_v_pu = 0.0; // nothing solved
    }

    Ok(SimulationResult {
        bus_ids: network.bus_ids.clone(),
        records,
        failed_timesteps: failed,
        step_minutes: network.step_minutes,
        curtailment_mwh,
        flex_energy_mwh,
        max_v_pu,
        max_exactness,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_one(
    network: &PuNetwork,
    aggregates: &ClusterAggregates,
    allocation: &FleetAllocation,
    t: usize,
    params: &ScenarioParams,
    backend: &dyn ConicBackend,
    with_flex: bool,
) -> Result<TimestepRecord, ScenarioError> {
    let schedule = timestep_schedule(aggregates, allocation, network, t, params.epsilon_kw)?;
    let extra_demand = if params.include_baseline_ev_demand {
        schedule.ev_baseline_pu.clone()
    } else {
        vec![0.0; network.n_bus()]
    };
    let flex_entries = if with_flex {
        schedule.flex_entries.clone()
    } else {
        schedule
            .flex_entries
            .iter()
            .map(|e| crate::opf_core::FlexEntry { ub_pu: 0.0, ..*e })
            .collect()
    };
    let instance = build_instance(
        network,
        t,
        flex_entries,
        schedule.pi_flex.clone(),
        &extra_demand,
        params.opf,
    )?;
    let solution = solve(&instance, backend)?;

    // Interior-point answers carry harmless sub-tolerance negatives;
    // accounting treats them as zero (bound violations beyond 1e-8 were
    // already rejected by the solution checks).
    let s_base = network.s_base_mva;
    let curtail_mw = instance
        .wind
        .iter()
        .zip(&solution.curtail)
        .map(|(gen, &c)| {
            (gen.id.clone(), if c.is_finite() { (c * s_base).max(0.0) } else { 0.0 })
        })
        .collect();
    let flex_mw = instance
        .flex
        .iter()
        .zip(&solution.flex)
        .map(|(entry, &f)| {
            (
                entry.cluster,
                network.bus_ids[entry.bus_idx].clone(),
                if f.is_finite() { (f * s_base).max(0.0) } else { 0.0 },
            )
        })
        .collect();
    let v_pu = solution
        .v_sq
        .iter()
        .map(|v| if v.is_finite() { v.max(0.0).sqrt() } else { f64::NAN })
        .collect();

    // Re-assert the headroom bound outside the solver.
    if solution.status == SolveStatus::Optimal {
        for (entry, &f) in instance.flex.iter().zip(&solution.flex) {
            debug_assert!(
                f <= entry.ub_pu + 1e-8,
                "dispatch exceeds headroom at t={t}: {f} > {}",
                entry.ub_pu
            );
        }
    }

    Ok(TimestepRecord {
        t,
        timestamp: network.timestamp(t),
        status: solution.status,
        curtail_mw,
        flex_mw,
        v_pu,
        slack_mw: if solution.slack_p.is_finite() {
            solution.slack_p * s_base
        } else {
            f64::NAN
        },
        exactness: if solution.exactness.is_finite() {
            solution.exactness
        } else {
            0.0
        },
        objective: solution.objective_parts.total(),
    })
}

/// Percent of baseline curtailment displaced by the flexibility run;
/// defined as 0 when the baseline had none.
pub fn curtailment_reduction(
    baseline: &SimulationResult,
    flex: &SimulationResult,
) -> Result<f64, ScenarioError> {
    if baseline.n_timesteps() != flex.n_timesteps()
        || baseline.step_minutes != flex.step_minutes
    {
        return Err(ScenarioError::HorizonMismatch(
            baseline.n_timesteps(),
            flex.n_timesteps(),
        ));
    }
    if baseline.curtailment_mwh <= 0.0 {
        return Ok(0.0);
    }
    Ok(100.0 * (1.0 - flex.curtailment_mwh / baseline.curtailment_mwh))
}

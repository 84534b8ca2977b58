//! `flexgrid simulate`: cluster document + network -> baseline and
//! flexibility runs -> results bundle.

use std::path::Path;

use flexgrid_core::clustering::{ClusterAggregates, ClusterDocument};
use flexgrid_core::grid_model::{load_network, to_per_unit};
use flexgrid_core::opf_core::{ClarabelBackend, OpfParams};
use flexgrid_core::scenario::{
    allocate_fleet, cluster_shares, curtailment_reduction, run_baseline, run_flex, write_bundle,
    ScenarioParams,
};

use crate::config::RunConfig;
use crate::exit::{CliError, TIMESTEP_FAILURES};

pub fn run(config: &RunConfig, clusters_path: &Path) -> Result<i32, CliError> {
    if !clusters_path.exists() {
        return Err(CliError::data(format!(
            "cluster model {} does not exist",
            clusters_path.display()
        )));
    }
    let doc = ClusterDocument::load(clusters_path).map_err(|e| CliError::config(e.to_string()))?;
    let aggregates = ClusterAggregates {
        clusters: doc.aggregates.clone(),
    };

    let mut network =
        load_network(&config.paths.network).map_err(|e| CliError::data(e.to_string()))?;
    if network.step_minutes() != config.scenario.timestep_minutes {
        return Err(CliError::config(format!(
            "scenario.timestep_minutes = {} but the network series run at {} minutes",
            config.scenario.timestep_minutes,
            network.step_minutes()
        )));
    }
    if let Some(v_min) = config.opf.v_min_pu {
        for bus in &mut network.buses {
            bus.v_min_pu = v_min;
        }
    }
    if let Some(v_max) = config.opf.v_max_pu {
        for bus in &mut network.buses {
            bus.v_max_pu = v_max;
        }
    }
    let pu = to_per_unit(&network).map_err(|e| CliError::data(e.to_string()))?;

    let window = resolve_window(config, &pu)?;
    let total_evs = config.total_evs();
    let allocation = if total_evs == 0 {
        // An empty fleet is a legitimate degenerate scenario: no headroom,
        // no baseline EV demand.
        flexgrid_core::scenario::FleetAllocation {
            n_ev: vec![vec![0; pu.n_bus()]; aggregates.k()],
            total: 0,
            bus_ids: pu.bus_ids.clone(),
        }
    } else {
        allocate_fleet(&pu, &cluster_shares(&aggregates), total_evs)
            .map_err(|e| CliError::data(e.to_string()))?
    };
    log::info!(
        "allocated {} EVs over {} buses and {} clusters",
        allocation.total,
        pu.n_bus(),
        aggregates.k()
    );

    let s_base = pu.s_base_mva;
    let params = ScenarioParams {
        opf: OpfParams {
            loss_weight: 1.0 / config.opf.m_t,
            v_slack_sq: config.opf.v_slack_pu * config.opf.v_slack_pu,
            slack_import_max_pu: config
                .opf
                .slack_import_max_mw
                .map_or(f64::INFINITY, |mw| mw / s_base),
            slack_export_max_pu: config
                .opf
                .slack_export_max_mw
                .map_or(f64::INFINITY, |mw| mw / s_base),
        },
        epsilon_kw: config.opf.epsilon_kw,
        include_baseline_ev_demand: config.scenario.include_baseline_ev_demand,
    };
    let backend = ClarabelBackend {
        max_iter: config.opf.backend_max_iter,
        tol: config.opf.backend_tol,
        verbose: false,
    };

    let baseline = run_baseline(&pu, &aggregates, &allocation, window.clone(), &params, &backend)
        .map_err(|e| CliError::data(e.to_string()))?;
    let flex = run_flex(&pu, &aggregates, &allocation, window, &params, &backend)
        .map_err(|e| CliError::data(e.to_string()))?;
    let reduction =
        curtailment_reduction(&baseline, &flex).map_err(|e| CliError::data(e.to_string()))?;

    let config_echo =
        serde_json::to_value(config).map_err(|e| CliError::config(e.to_string()))?;
    write_bundle(&config.paths.out_dir, &baseline, &flex, reduction, config_echo)
        .map_err(|e| CliError::data(e.to_string()))?;

    let n_failures = baseline.failed_timesteps.len() + flex.failed_timesteps.len();
    println!(
        "simulated {} timesteps: baseline curtailment {:.6} MWh, with flexibility {:.6} MWh, reduction {:.3}%",
        baseline.n_timesteps(),
        baseline.curtailment_mwh,
        flex.curtailment_mwh,
        reduction
    );
    if n_failures > 0 {
        eprintln!(
            "warning: {n_failures} timesteps failed (baseline {:?}, flex {:?})",
            baseline.failed_timesteps, flex.failed_timesteps
        );
        return Ok(TIMESTEP_FAILURES);
    }
    Ok(0)
}

fn resolve_window(
    config: &RunConfig,
    pu: &flexgrid_core::grid_model::PuNetwork,
) -> Result<std::ops::Range<usize>, CliError> {
    let start = match config.scenario.horizon_start {
        None => 0,
        Some(t) => {
            let delta = (t - pu.series_start).num_minutes();
            let step = i64::from(pu.step_minutes);
            if delta < 0 || delta % step != 0 {
                return Err(CliError::config(format!(
                    "horizon_start {t} is not on the series grid starting {}",
                    pu.series_start
                )));
            }
            (delta / step) as usize
        }
    };
    let end = match config.scenario.horizon_steps {
        None => pu.horizon_len,
        Some(steps) => start + steps,
    };
    if start >= end || end > pu.horizon_len {
        return Err(CliError::config(format!(
            "horizon window {start}..{end} does not fit the series ({} steps)",
            pu.horizon_len
        )));
    }
    Ok(start..end)
}

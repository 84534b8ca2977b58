//! Results bundle: `summary.json` under schema `flexgrid.result.v1` plus
//! plot-ready `timeseries.csv` and `flex_by_cluster.csv`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::simulate::SimulationResult;
use super::ScenarioError;

pub const RESULT_SCHEMA: &str = "flexgrid.result.v1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunTotals {
    pub curtailment_mwh: f64,
    pub flex_energy_mwh: f64,
    pub max_v_pu: f64,
    pub max_exactness: f64,
    pub failed_timesteps: Vec<usize>,
}

impl RunTotals {
    fn of(result: &SimulationResult) -> Self {
        RunTotals {
            curtailment_mwh: result.curtailment_mwh,
            flex_energy_mwh: result.flex_energy_mwh,
            max_v_pu: result.max_v_pu,
            max_exactness: result.max_exactness,
            failed_timesteps: result.failed_timesteps.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub schema: String,
    pub timestep_minutes: u32,
    pub n_timesteps: usize,
    pub baseline: RunTotals,
    pub flex: RunTotals,
    pub curtailment_reduction_pct: f64,
    /// The run configuration, echoed verbatim for reproducibility.
    pub config_echo: serde_json::Value,
}

/// Writes the three bundle files. CSV rows are ordered by (t, quantity,
/// element) so identical runs produce identical bytes.
pub fn write_bundle(
    dir: &Path,
    baseline: &SimulationResult,
    flex: &SimulationResult,
    reduction_pct: f64,
    config_echo: serde_json::Value,
) -> Result<(), ScenarioError> {
    let io_err = |e: std::io::Error| ScenarioError::Bundle {
        path: dir.display().to_string(),
        reason: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;

    let summary = SummaryDocument {
        schema: RESULT_SCHEMA.to_string(),
        timestep_minutes: baseline.step_minutes,
        n_timesteps: baseline.n_timesteps(),
        baseline: RunTotals::of(baseline),
        flex: RunTotals::of(flex),
        curtailment_reduction_pct: reduction_pct,
        config_echo,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| ScenarioError::Bundle {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    std::fs::write(dir.join("summary.json"), json + "\n").map_err(io_err)?;

    let mut ts = String::from("t,quantity,element,value\n");
    for (run_name, result) in [("baseline", baseline), ("flex", flex)] {
        for record in &result.records {
            let mut rows: Vec<(String, String, f64)> = Vec::new();
            for (gen, mw) in &record.curtail_mw {
                rows.push((format!("{run_name}.curtail_mw"), gen.clone(), *mw));
            }
            for (i, v) in record.v_pu.iter().enumerate() {
                rows.push((format!("{run_name}.v_pu"), result.bus_ids[i].clone(), *v));
            }
            rows.push((format!("{run_name}.slack_mw"), String::new(), record.slack_mw));
            rows.push((
                format!("{run_name}.exactness"),
                String::new(),
                record.exactness,
            ));
            rows.push((
                format!("{run_name}.objective"),
                String::new(),
                record.objective,
            ));
            rows.push((
                format!("{run_name}.solved"),
                String::new(),
                f64::from(u8::from(record.status == crate::opf_core::SolveStatus::Optimal)),
            ));
            rows.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
            for (quantity, element, value) in rows {
                ts.push_str(&format!("{},{},{},{}\n", record.t, quantity, element, value));
            }
        }
    }
    std::fs::write(dir.join("timeseries.csv"), ts).map_err(io_err)?;

    let mut fc = String::from("t,cluster,bus,mw\n");
    for record in &flex.records {
        let mut rows = record.flex_mw.clone();
        rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        for (cluster, bus, mw) in rows {
            fc.push_str(&format!("{},{},{},{}\n", record.t, cluster, bus, mw));
        }
    }
    std::fs::write(dir.join("flex_by_cluster.csv"), fc).map_err(io_err)?;

    Ok(())
}

pub fn read_summary(dir: &Path) -> Result<SummaryDocument, ScenarioError> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Bundle {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let summary: SummaryDocument =
        serde_json::from_str(&text).map_err(|e| ScenarioError::Bundle {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
    if summary.schema != RESULT_SCHEMA {
        return Err(ScenarioError::Bundle {
            path: path.display().to_string(),
            reason: format!("schema `{}` is not `{RESULT_SCHEMA}`", summary.schema),
        });
    }
    Ok(summary)
}

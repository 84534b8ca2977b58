//! `flexgrid report`: render a results bundle and re-derive its totals
//! from the CSV surfaces, failing loudly on any internal disagreement.

use std::collections::BTreeSet;
use std::path::Path;

use flexgrid_core::scenario::{read_summary, RunTotals};

use crate::exit::CliError;

const CROSS_CHECK_TOL: f64 = 1e-6;

pub fn run(results_dir: &Path) -> Result<(), CliError> {
    let summary = read_summary(results_dir).map_err(|e| CliError::data(e.to_string()))?;
    let step_hours = f64::from(summary.timestep_minutes) / 60.0;

    let ts_path = results_dir.join("timeseries.csv");
    let recomputed = recompute(&ts_path, step_hours)?;

    for (name, stored, redone) in [
        ("baseline", &summary.baseline, &recomputed.0),
        ("flex", &summary.flex, &recomputed.1),
    ] {
        check(name, "curtailment_mwh", stored.curtailment_mwh, redone.curtailment_mwh)?;
        check(name, "max_v_pu", stored.max_v_pu, redone.max_v_pu)?;
        check(name, "max_exactness", stored.max_exactness, redone.max_exactness)?;
        if stored.failed_timesteps != redone.failed_timesteps {
            return Err(CliError::inconsistent(format!(
                "{name}: failed timesteps differ: summary {:?} vs timeseries {:?}",
                stored.failed_timesteps, redone.failed_timesteps
            )));
        }
    }

    let flex_energy = recompute_flex_energy(
        &results_dir.join("flex_by_cluster.csv"),
        step_hours,
        &summary.flex.failed_timesteps,
    )?;
    check("flex", "flex_energy_mwh", summary.flex.flex_energy_mwh, flex_energy)?;

    let redone_reduction = if recomputed.0.curtailment_mwh <= 0.0 {
        0.0
    } else {
        100.0 * (1.0 - recomputed.1.curtailment_mwh / recomputed.0.curtailment_mwh)
    };
    check("summary", "curtailment_reduction_pct", summary.curtailment_reduction_pct, redone_reduction)?;

    println!("results bundle: {}", results_dir.display());
    println!("  timesteps             {}", summary.n_timesteps);
    println!("  timestep minutes      {}", summary.timestep_minutes);
    println!("  baseline curtailment  {:.6} MWh", summary.baseline.curtailment_mwh);
    println!("  flex curtailment      {:.6} MWh", summary.flex.curtailment_mwh);
    println!("  flex energy           {:.6} MWh", summary.flex.flex_energy_mwh);
    println!("  curtailment reduction {:.3} %", summary.curtailment_reduction_pct);
    println!("  max |V|               {:.6} p.u.", summary.flex.max_v_pu.max(summary.baseline.max_v_pu));
    println!(
        "  max relaxation gap    {:.3e} p.u.^3",
        summary.flex.max_exactness.max(summary.baseline.max_exactness)
    );
    if !summary.baseline.failed_timesteps.is_empty() || !summary.flex.failed_timesteps.is_empty() {
        println!(
            "  FAILED timesteps      baseline {:?}, flex {:?}",
            summary.baseline.failed_timesteps, summary.flex.failed_timesteps
        );
    }
    println!("  cross-check           totals recomputed from CSVs match summary");
    Ok(())
}

fn check(run: &str, what: &str, stored: f64, redone: f64) -> Result<(), CliError> {
    let scale = stored.abs().max(redone.abs()).max(1.0);
    if stored.is_finite() != redone.is_finite()
        || (stored.is_finite() && (stored - redone).abs() > CROSS_CHECK_TOL * scale)
    {
        return Err(CliError::inconsistent(format!(
            "{run}: {what} in summary.json is {stored} but the CSV surfaces give {redone}"
        )));
    }
    Ok(())
}

#[derive(Debug, Default, Clone)]
struct Recomputed {
    curtailment_mwh: f64,
    max_v_pu: f64,
    max_exactness: f64,
    failed_timesteps: Vec<usize>,
}

impl Recomputed {
    fn as_totals(&self) -> RunTotals {
        RunTotals {
            curtailment_mwh: self.curtailment_mwh,
            flex_energy_mwh: 0.0,
            max_v_pu: self.max_v_pu,
            max_exactness: self.max_exactness,
            failed_timesteps: self.failed_timesteps.clone(),
        }
    }
}

fn recompute(path: &Path, step_hours: f64) -> Result<(RunTotals, RunTotals), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::data(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers != ["t", "quantity", "element", "value"] {
        return Err(CliError::data(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers
        )));
    }

    // First pass: which timesteps failed per run (their rows are excluded
    // from totals, as in the simulation accounting).
    let mut rows: Vec<(usize, String, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(e.to_string()))?;
        let t: usize = record[0]
            .parse()
            .map_err(|e| CliError::data(format!("bad t `{}`: {e}", &record[0])))?;
        let value: f64 = record[3]
            .parse()
            .map_err(|e| CliError::data(format!("bad value `{}`: {e}", &record[3])))?;
        rows.push((t, record[1].to_string(), value));
    }

    let mut out = Vec::new();
    for run in ["baseline", "flex"] {
        let mut failed: BTreeSet<usize> = BTreeSet::new();
        for (t, quantity, value) in &rows {
            if quantity == &format!("{run}.solved") && *value == 0.0 {
                failed.insert(*t);
            }
        }
        let mut totals = Recomputed {
            failed_timesteps: failed.iter().copied().collect(),
            max_v_pu: f64::NEG_INFINITY,
            ..Recomputed::default()
        };
        for (t, quantity, value) in &rows {
            if failed.contains(t) {
                continue;
            }
            if quantity == &format!("{run}.curtail_mw") {
                totals.curtailment_mwh += value * step_hours;
            } else if quantity == &format!("{run}.v_pu") {
                totals.max_v_pu = totals.max_v_pu.max(*value);
            } else if quantity == &format!("{run}.exactness") {
                totals.max_exactness = totals.max_exactness.max(*value);
            }
        }
        out.push(totals.as_totals());
    }
    Ok((out[0].clone(), out[1].clone()))
}

fn recompute_flex_energy(
    path: &Path,
    step_hours: f64,
    failed: &[usize],
) -> Result<f64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let failed: BTreeSet<usize> = failed.iter().copied().collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut total = 0.0;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(e.to_string()))?;
        let t: usize = record[0]
            .parse()
            .map_err(|e| CliError::data(format!("bad t `{}`: {e}", &record[0])))?;
        if failed.contains(&t) {
            continue;
        }
        let mw: f64 = record[3]
            .parse()
            .map_err(|e| CliError::data(format!("bad mw `{}`: {e}", &record[3])))?;
        total += mw * step_hours;
    }
    Ok(total)
}

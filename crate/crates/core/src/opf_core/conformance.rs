//! Backend conformance suite.
//!
//! Any [`ConicBackend`] wired into the pipeline must
//! pass `run_conformance`: a fixed set of tiny programs with known optima,
//! checked to 1e-7. The checks go through the same assembly and solution
//! path used in production, so a passing backend is interchangeable with
//! the default.

use crate::grid_model::to_per_unit;
use crate::grid_model::{Bus, Generator, GeneratorKind, Line, Network, TimeSeries};
use std::collections::BTreeMap;

use super::backend::ConicBackend;
use super::instance::{build_instance, FlexEntry, OpfParams};
use super::solve::{solve, SolveStatus};

/// One failed check, with the observed deviation.
#[derive(Debug)]
pub struct ConformanceFailure {
    pub check: &'static str,
    pub detail: String,
}

const TOL: f64 = 1e-7;

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries {
        start: chrono::DateTime::from_timestamp(1_590_969_600, 0).unwrap(), // 2020-06-01T00:00Z
        step_minutes: 30,
        values,
    }
}

fn network(wind_mw: Option<f64>, demand_mw: f64, s_max_mva: f64) -> Network {
    Network {
        s_base_mva: 10.0,
        buses: vec![
            Bus {
                id: "slack".into(),
                base_kv: 11.0,
                v_min_pu: 0.9,
                v_max_pu: 1.1,
                is_slack: true,
            },
            Bus {
                id: "b1".into(),
                base_kv: 11.0,
                v_min_pu: 0.9,
                v_max_pu: 1.1,
                is_slack: false,
            },
        ],
        lines: vec![Line {
            id: "l1".into(),
            from_bus: "slack".into(),
            to_bus: "b1".into(),
            r_ohm: 0.363,
            x_ohm: 0.968,
            s_max_mva,
        }],
        generators: wind_mw
            .map(|mw| {
                vec![Generator {
                    id: "w1".into(),
                    bus: "b1".into(),
                    kind: GeneratorKind::WindCurtailable,
                    p_profile_mw: series(vec![mw, mw]),
                    q_capability: None,
                    curtail_cost: 2.0e5,
                }]
            })
            .unwrap_or_default(),
        demand_mw: BTreeMap::from([("b1".to_string(), series(vec![demand_mw, demand_mw]))]),
    }
}

/// Runs every check; an empty return means the backend conforms.
pub fn run_conformance(backend: &dyn ConicBackend) -> Vec<ConformanceFailure> {
    let mut failures = Vec::new();
    let mut check = |name: &'static str, result: Result<(), String>| {
        if let Err(detail) = result {
            failures.push(ConformanceFailure {
                check: name,
                detail,
            });
        }
    };

    check("zero_injection_is_all_zero", zero_injection(backend));
    check("demand_only_matches_closed_form", demand_only(backend));
    check("thermal_infeasibility_detected", infeasible(backend));
    check("surplus_prefers_cheap_flex", surplus_flex(backend));
    failures
}

fn zero_injection(backend: &dyn ConicBackend) -> Result<(), String> {
    let pu = to_per_unit(&network(None, 0.0, 12.0)).map_err(|e| e.to_string())?;
    let inst = build_instance(&pu, 0, vec![], vec![], &[0.0, 0.0], OpfParams::default())
        .map_err(|e| e.to_string())?;
    let sol = solve(&inst, backend).map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    for (name, value) in [
        ("p_flow", sol.p_flow[0]),
        ("q_flow", sol.q_flow[0]),
        ("l_sq", sol.l_sq[0]),
        ("objective", sol.objective_parts.total()),
    ] {
        if value.abs() > TOL {
            return Err(format!("{name} = {value}, expected 0"));
        }
    }
    Ok(())
}

fn demand_only(backend: &dyn ConicBackend) -> Result<(), String> {
    let pu = to_per_unit(&network(None, 2.0, 12.0)).map_err(|e| e.to_string())?;
    let inst = build_instance(&pu, 0, vec![], vec![], &[0.0, 0.0], OpfParams::default())
        .map_err(|e| e.to_string())?;
    let sol = solve(&inst, backend).map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    // Exact single-line flow at net injection -0.2 p.u.
    let (r, x) = (0.03, 0.08);
    let z2 = r * r + x * x;
    let n = -0.2f64;
    let b = 2.0 * r * n + 1.0;
    let l = (b - (b * b - 4.0 * z2 * n * n).sqrt()) / (2.0 * z2);
    let p = r * l - n;
    let v_child = 1.0 - 2.0 * (r * p + x * x * l) + z2 * l;
    if (sol.l_sq[0] - l).abs() > 1e-6 {
        return Err(format!("l_sq {} vs closed form {}", sol.l_sq[0], l));
    }
    if (sol.v_sq[1] - v_child).abs() > 1e-6 {
        return Err(format!("v_sq {} vs closed form {}", sol.v_sq[1], v_child));
    }
    Ok(())
}

fn infeasible(backend: &dyn ConicBackend) -> Result<(), String> {
    // 30 MW of demand behind a 1.2 MVA line cannot be served.
    let pu = to_per_unit(&network(None, 30.0, 1.2)).map_err(|e| e.to_string())?;
    let inst = build_instance(&pu, 0, vec![], vec![], &[0.0, 0.0], OpfParams::default())
        .map_err(|e| e.to_string())?;
    let sol = solve(&inst, backend).map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Infeasible {
        return Err(format!("status {:?}, expected Infeasible", sol.status));
    }
    Ok(())
}

fn surplus_flex(backend: &dyn ConicBackend) -> Result<(), String> {
    // 6 MW of wind against 1 MW of demand, export blocked: cheap flex with
    // ample headroom must absorb the surplus and curtailment stay near zero.
    let pu = to_per_unit(&network(Some(6.0), 1.0, 12.0)).map_err(|e| e.to_string())?;
    let params = OpfParams {
        loss_weight: 2.0e6,
        slack_export_max_pu: 0.0,
        ..OpfParams::default()
    };
    let inst = build_instance(
        &pu,
        0,
        vec![FlexEntry {
            cluster: 0,
            bus_idx: 1,
            ub_pu: 0.8,
        }],
        vec![2.0e4],
        &[0.0, 0.0],
        params,
    )
    .map_err(|e| e.to_string())?;
    let sol = solve(&inst, backend).map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Optimal {
        return Err(format!("status {:?}", sol.status));
    }
    if sol.curtail[0] > 1e-6 {
        return Err(format!("curtail {} expected ~0", sol.curtail[0]));
    }
    if (sol.flex[0] - 0.5).abs() > 0.01 {
        return Err(format!("flex {} expected ~0.5 (surplus)", sol.flex[0]));
    }
    Ok(())
}

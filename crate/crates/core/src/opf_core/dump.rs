//! Per-timestep solution dump: `element_type,id,quantity,value_pu` rows
//! plus a trailing summary of objective parts and exactness. Deterministic
//! row order, intended for golden-file tests.

use std::path::Path;

use super::instance::OpfInstance;
use super::solve::OpfSolution;
use super::OpfError;

pub fn write_solution_dump(
    path: &Path,
    solution: &OpfSolution,
    instance: &OpfInstance,
) -> Result<(), OpfError> {
    let mut out = String::from("element_type,id,quantity,value_pu\n");
    for (b, id) in instance.bus_ids.iter().enumerate() {
        out.push_str(&format!("bus,{id},v_sq,{}\n", solution.v_sq[b]));
    }
    for (li, line) in instance.lines.iter().enumerate() {
        out.push_str(&format!("line,{},p_flow,{}\n", line.id, solution.p_flow[li]));
        out.push_str(&format!("line,{},q_flow,{}\n", line.id, solution.q_flow[li]));
        out.push_str(&format!("line,{},l_sq,{}\n", line.id, solution.l_sq[li]));
    }
    for (gi, gen) in instance.wind.iter().enumerate() {
        out.push_str(&format!("generator,{},curtail,{}\n", gen.id, solution.curtail[gi]));
    }
    for (fi, entry) in instance.flex.iter().enumerate() {
        out.push_str(&format!(
            "flex,cluster{}@{},dispatch,{}\n",
            entry.cluster, instance.bus_ids[entry.bus_idx], solution.flex[fi]
        ));
    }
    out.push_str(&format!(
        "summary,,flex_cost,{}\nsummary,,curtail_cost,{}\nsummary,,loss_term,{}\nsummary,,exactness,{}\n",
        solution.objective_parts.flex_cost,
        solution.objective_parts.curtail_cost,
        solution.objective_parts.loss_term,
        solution.exactness
    ));
    std::fs::write(path, out).map_err(|e| OpfError::Backend(format!("cannot write dump: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::to_per_unit;
    use crate::opf_core::test_fixtures::two_bus_network;
    use crate::opf_core::{build_instance, solve, ClarabelBackend, OpfParams};

    #[test]
    fn dump_is_deterministic_and_complete() {
        let pu = to_per_unit(&two_bus_network(vec![2.0, 2.0], vec![1.0, 1.0])).unwrap();
        let inst = build_instance(
            &pu,
            0,
            vec![],
            vec![],
            &[0.0; 2],
            OpfParams {
                loss_weight: 2.0e6,
                slack_export_max_pu: 0.0,
                ..OpfParams::default()
            },
        )
        .unwrap();
        let sol = solve(&inst, &ClarabelBackend::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("dump1.csv");
        let p2 = dir.path().join("dump2.csv");
        write_solution_dump(&p1, &sol, &inst).unwrap();
        write_solution_dump(&p2, &sol, &inst).unwrap();
        let a = std::fs::read(&p1).unwrap();
        assert_eq!(a, std::fs::read(&p2).unwrap());
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("element_type,id,quantity,value_pu\n"));
        assert!(text.contains("bus,slack,v_sq,"));
        assert!(text.contains("line,l1,l_sq,"));
        assert!(text.contains("generator,w1,curtail,"));
        assert!(text.contains("summary,,exactness,"));
    }
}

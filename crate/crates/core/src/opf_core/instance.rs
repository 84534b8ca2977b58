//! One-timestep problem data, fully numeric and in per-unit.

use crate::grid_model::{GeneratorKind, PuLine, PuNetwork};

use super::OpfError;

/// Demand turn-up headroom for one (cluster, bus) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlexEntry {
    pub cluster: usize,
    pub bus_idx: usize,
    /// Upper bound on dispatched turn-up, p.u.
    pub ub_pu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindGen {
    pub id: String,
    pub bus_idx: usize,
    /// Available power at this timestep, p.u.
    pub avail_pu: f64,
    /// Objective coefficient per p.u. of curtailed power.
    pub pi_curtail: f64,
    pub q_capability_pu: Option<(f64, f64)>,
}

/// Run-level knobs that do not vary per timestep.
#[derive(Debug, Clone, Copy)]
pub struct OpfParams {
    /// Weight of the `|z| * l` loss term (1 / M_t).
    pub loss_weight: f64,
    /// Squared slack voltage, p.u.^2
    pub v_slack_sq: f64,
    /// Maximum power the slack may draw from upstream, p.u.
    pub slack_import_max_pu: f64,
    /// Maximum power the slack may push upstream, p.u.
    pub slack_export_max_pu: f64,
}

impl Default for OpfParams {
    fn default() -> Self {
        OpfParams {
            loss_weight: 1.0 / 1000.0,
            v_slack_sq: 1.0,
            slack_import_max_pu: f64::INFINITY,
            slack_export_max_pu: f64::INFINITY,
        }
    }
}

/// A per-unit network snapshot at one timestep together with decision
/// bounds and costs. Everything the conic assembly needs, nothing else.
#[derive(Debug, Clone)]
pub struct OpfInstance {
    pub n_bus: usize,
    pub slack_idx: usize,
    pub lines: Vec<PuLine>,
    pub v_min_sq: Vec<f64>,
    pub v_max_sq: Vec<f64>,
    /// Fixed consumption per bus (network demand plus any baseline EV
    /// charging), p.u.
    pub demand_pu: Vec<f64>,
    /// Fixed firm generation per bus, p.u.
    pub firm_pu: Vec<f64>,
    pub wind: Vec<WindGen>,
    /// Generators with declared reactive capability: (bus, (q_min, q_max))
    /// in p.u. Generators without one run at unity power factor.
    pub q_caps: Vec<(usize, (f64, f64))>,
    pub flex: Vec<FlexEntry>,
    /// Objective coefficient per p.u. of dispatched turn-up, per cluster.
    pub pi_flex: Vec<f64>,
    pub params: OpfParams,
    /// Bus ids for reporting.
    pub bus_ids: Vec<String>,
}

/// Assembles the instance for timestep `t`. `extra_demand_pu` carries the
/// baseline EV charging load per bus; `flex` and `pi_flex` come from the
/// fleet schedule (empty in baseline runs).
pub fn build_instance(
    network: &PuNetwork,
    t: usize,
    flex: Vec<FlexEntry>,
    pi_flex: Vec<f64>,
    extra_demand_pu: &[f64],
    params: OpfParams,
) -> Result<OpfInstance, OpfError> {
    if t >= network.horizon_len {
        return Err(OpfError::TimestepOutOfRange {
            t,
            len: network.horizon_len,
        });
    }
    if !(params.loss_weight > 0.0) {
        return Err(OpfError::BadLossWeight(params.loss_weight));
    }
    for &pi in &pi_flex {
        if !(pi > 0.0) {
            return Err(OpfError::BadFlexCost(pi));
        }
    }
    let slack = network.slack_idx;
    if params.v_slack_sq < network.v_min_sq[slack] - 1e-12
        || params.v_slack_sq > network.v_max_sq[slack] + 1e-12
    {
        return Err(OpfError::BadSlackVoltage {
            v_slack_sq: params.v_slack_sq,
            v_min_sq: network.v_min_sq[slack],
            v_max_sq: network.v_max_sq[slack],
        });
    }
    let n_bus = network.n_bus();
    for entry in &flex {
        if entry.bus_idx >= n_bus {
            return Err(OpfError::BadBusIndex {
                bus_idx: entry.bus_idx,
                n_bus,
            });
        }
        if entry.ub_pu < 0.0 {
            return Err(OpfError::NegativeFlexBound {
                cluster: entry.cluster,
                bus: network.bus_ids[entry.bus_idx].clone(),
            });
        }
    }

    let max_pi_flex = pi_flex.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut demand_pu = vec![0.0; n_bus];
    for b in 0..n_bus {
        demand_pu[b] = network.demand_pu[b][t] + extra_demand_pu.get(b).copied().unwrap_or(0.0);
    }

    let mut firm_pu = vec![0.0; n_bus];
    let mut q_caps = Vec::new();
    let mut wind = Vec::new();
    for gen in &network.generators {
        match gen.kind {
            GeneratorKind::WindCurtailable => {
                // Cost per MWh scales to cost per p.u. of power by s_base;
                // uniform timesteps keep the argmin unchanged.
                let pi_curtail = gen.curtail_cost_per_mwh * network.s_base_mva;
                if !pi_flex.is_empty() && pi_curtail <= max_pi_flex {
                    return Err(OpfError::CurtailCostTooLow {
                        gen: gen.id.clone(),
                        pi_curtail,
                        max_pi_flex,
                    });
                }
                if let Some(caps) = gen.q_capability_pu {
                    q_caps.push((gen.bus_idx, caps));
                }
                wind.push(WindGen {
                    id: gen.id.clone(),
                    bus_idx: gen.bus_idx,
                    avail_pu: gen.avail_pu[t].max(0.0),
                    pi_curtail,
                    q_capability_pu: gen.q_capability_pu,
                });
            }
            GeneratorKind::Firm => {
                firm_pu[gen.bus_idx] += gen.avail_pu[t];
                if let Some(caps) = gen.q_capability_pu {
                    q_caps.push((gen.bus_idx, caps));
                }
            }
        }
    }

    Ok(OpfInstance {
        n_bus,
        slack_idx: network.slack_idx,
        lines: network.lines.clone(),
        v_min_sq: network.v_min_sq.clone(),
        v_max_sq: network.v_max_sq.clone(),
        demand_pu,
        firm_pu,
        wind,
        q_caps,
        flex,
        pi_flex,
        params,
        bus_ids: network.bus_ids.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::to_per_unit;
    use crate::opf_core::test_fixtures::two_bus_network;

    #[test]
    fn flex_bound_from_headroom_arithmetic() {
        // 10 EVs of which 4 charge, 7 kW each: 42 kW of headroom = 0.0042 p.u.
        let n_remain = 10.0 - 4.0;
        let ub_pu = n_remain * 7.0 / 1000.0 / 10.0;
        let network = to_per_unit(&two_bus_network(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
        let inst = build_instance(
            &network,
            0,
            vec![FlexEntry {
                cluster: 0,
                bus_idx: 1,
                ub_pu,
            }],
            vec![100.0],
            &[0.0, 0.0],
            OpfParams::default(),
        )
        .unwrap();
        assert!((inst.flex[0].ub_pu - 0.0042).abs() < 1e-15);
    }

    #[test]
    fn zero_allocation_means_no_flex_entries() {
        let network = to_per_unit(&two_bus_network(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
        let inst =
            build_instance(&network, 0, vec![], vec![], &[0.0, 0.0], OpfParams::default())
                .unwrap();
        assert!(inst.flex.is_empty());
    }

    #[test]
    fn curtail_cost_below_flex_cost_is_rejected() {
        let mut physical = two_bus_network(vec![4.0, 4.0], vec![1.0, 1.0]);
        physical.generators[0].curtail_cost = 1.0; // per MWh: 10 per p.u.
        let network = to_per_unit(&physical).unwrap();
        let err = build_instance(
            &network,
            0,
            vec![FlexEntry {
                cluster: 0,
                bus_idx: 1,
                ub_pu: 0.1,
            }],
            vec![100.0],
            &[0.0, 0.0],
            OpfParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, OpfError::CurtailCostTooLow { .. }));
    }

    #[test]
    fn negative_bound_is_rejected() {
        let network = to_per_unit(&two_bus_network(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
        let err = build_instance(
            &network,
            0,
            vec![FlexEntry {
                cluster: 0,
                bus_idx: 1,
                ub_pu: -0.1,
            }],
            vec![100.0],
            &[0.0, 0.0],
            OpfParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, OpfError::NegativeFlexBound { .. }));
    }

    #[test]
    fn timestep_out_of_range_is_rejected() {
        let network = to_per_unit(&two_bus_network(vec![0.0, 0.0], vec![1.0, 1.0])).unwrap();
        assert!(matches!(
            build_instance(&network, 5, vec![], vec![], &[0.0, 0.0], OpfParams::default()),
            Err(OpfError::TimestepOutOfRange { .. })
        ));
    }
}

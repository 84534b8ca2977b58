//! Small networks shared by the OPF unit tests.

use std::collections::BTreeMap;

use chrono::TimeZone;

use crate::grid_model::{Bus, Generator, GeneratorKind, Line, Network, TimeSeries};

pub(crate) fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries {
        start: chrono::Utc.with_ymd_and_hms(2020, 6, 1, 0, 0, 0).unwrap(),
        step_minutes: 30,
        values,
    }
}

/// Slack -- (r=0.363, x=0.968 ohm, 11 kV, 10 MVA base: 0.03 + j0.08 p.u.)
/// -- one bus carrying wind and demand.
pub(crate) fn two_bus_network(wind_mw: Vec<f64>, demand_mw: Vec<f64>) -> Network {
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
            s_max_mva: 12.0,
        }],
        generators: vec![Generator {
            id: "w1".into(),
            bus: "b1".into(),
            kind: GeneratorKind::WindCurtailable,
            p_profile_mw: series(wind_mw),
            q_capability: None,
            curtail_cost: 2.0e5,
        }],
        demand_mw: BTreeMap::from([("b1".to_string(), series(demand_mw))]),
    }
}

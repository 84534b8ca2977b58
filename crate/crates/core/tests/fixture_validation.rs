//! The bundled network fixtures, validated against hand-derived values.

use std::path::{Path, PathBuf};

use flexgrid_core::grid_model::{demand_distribution, load_network, to_per_unit, to_physical};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/networks")
}

#[test]
fn five_bus_fixture_element_counts() {
    let network = load_network(&fixtures_dir().join("five_bus.json")).unwrap();
    assert_eq!(network.buses.len(), 5);
    assert_eq!(network.lines.len(), 4);
    assert_eq!(network.generators.len(), 1);
    assert_eq!(network.demand_mw.len(), 2);
    // radiality: |lines| = |buses| - 1 and every line parent -> child
    assert_eq!(network.lines.len(), network.buses.len() - 1);
    assert_eq!(network.slack().id, "slack");
}

#[test]
fn five_bus_demand_weights_hand_computed() {
    // town 2.5 MW and village 1.0 MW, constant: weights 2.5/3.5 and 1/3.5.
    let network = load_network(&fixtures_dir().join("five_bus.json")).unwrap();
    let weights = demand_distribution(&network).unwrap();
    assert!((weights["town"] - 2.5 / 3.5).abs() < 1e-12);
    assert!((weights["village"] - 1.0 / 3.5).abs() < 1e-12);
    assert!((weights.values().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn five_bus_per_unit_values() {
    // 11 kV, 10 MVA base: Z_base = 12.1 ohm; l0 was authored at 0.242 ohm.
    let network = load_network(&fixtures_dir().join("five_bus.json")).unwrap();
    let pu = to_per_unit(&network).unwrap();
    let l0 = pu.lines.iter().find(|l| l.id == "l0").unwrap();
    assert!((l0.r_pu - 0.02).abs() < 1e-12);
    assert!((l0.x_pu - 0.06).abs() < 1e-12);
    let round = to_physical(&pu);
    for (a, b) in round.lines.iter().zip(&network.lines) {
        assert!((a.r_ohm - b.r_ohm).abs() <= 1e-12 * b.r_ohm);
    }
}

#[test]
fn week_fixture_has_a_full_week_and_oversupply() {
    let network = load_network(&fixtures_dir().join("week_feeder.json")).unwrap();
    assert_eq!(network.horizon_len(), 336);
    assert_eq!(network.step_minutes(), 30);
    let wind = &network.generators[0].p_profile_mw.values;
    let demand_total: Vec<f64> = (0..336)
        .map(|t| network.demand_mw.values().map(|s| s.values[t]).sum())
        .collect();
    let surplus_steps = wind
        .iter()
        .zip(&demand_total)
        .filter(|(w, d)| w > d)
        .count();
    assert!(surplus_steps > 50, "only {surplus_steps} oversupply steps");
    // both day and night oversupply events exist
    let night_surplus = (0..336).any(|t| {
        let hod = (t * 30 / 60) % 24;
        wind[t] > demand_total[t] && (hod < 6)
    });
    let day_surplus = (0..336).any(|t| {
        let hod = (t * 30 / 60) % 24;
        wind[t] > demand_total[t] && (10..16).contains(&hod)
    });
    assert!(night_surplus && day_surplus);
}

#[test]
fn two_bus_fixture_loads() {
    let network = load_network(&fixtures_dir().join("two_bus.json")).unwrap();
    assert_eq!(network.buses.len(), 2);
    assert_eq!(network.lines[0].from_bus, "slack");
}

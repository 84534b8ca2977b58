//! Network document loading and validation.
//!
//! The document is JSON under schema `flexgrid.network.v1`; time series are
//! referenced by id and resolved to CSV files relative to the document.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    Bus, Generator, GeneratorKind, Line, Network, NetworkError, TimeSeries,
};

pub const NETWORK_SCHEMA: &str = "flexgrid.network.v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub schema: String,
    pub s_base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<GeneratorEntry>,
    /// bus id -> series id
    #[serde(default)]
    pub demand: BTreeMap<String, String>,
    /// series id -> CSV path, relative to the document
    pub profiles: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub id: String,
    pub bus: String,
    pub kind: GeneratorKind,
    /// series id of the available-power profile
    pub p_profile: String,
    #[serde(default)]
    pub q_capability: Option<(f64, f64)>,
    pub curtail_cost: f64,
}

/// Loads, resolves profiles, validates every structural invariant, and
/// reorients lines parent -> child by breadth-first search from the slack.
pub fn load_network(path: &Path) -> Result<Network, NetworkError> {
    let text = std::fs::read_to_string(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let doc: NetworkDocument = serde_json::from_str(&text).map_err(|e| NetworkError::Document {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if doc.schema != NETWORK_SCHEMA {
        return Err(NetworkError::Document {
            path: path.display().to_string(),
            reason: format!("schema `{}` is not `{NETWORK_SCHEMA}`", doc.schema),
        });
    }
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));

    let mut series: BTreeMap<String, TimeSeries> = BTreeMap::new();
    for (id, rel) in &doc.profiles {
        let csv_path = base_dir.join(rel);
        series.insert(id.clone(), load_profile_csv(&csv_path, id)?);
    }

    let mut demand_mw = BTreeMap::new();
    for (bus, series_id) in &doc.demand {
        let ts = series.get(series_id).ok_or_else(|| NetworkError::BadProfile {
            id: series_id.clone(),
            reason: "referenced by demand but not defined in profiles".into(),
        })?;
        demand_mw.insert(bus.clone(), ts.clone());
    }

    let mut generators = Vec::new();
    for entry in &doc.generators {
        let ts = series
            .get(&entry.p_profile)
            .ok_or_else(|| NetworkError::BadProfile {
                id: entry.p_profile.clone(),
                reason: "referenced by generator but not defined in profiles".into(),
            })?;
        generators.push(Generator {
            id: entry.id.clone(),
            bus: entry.bus.clone(),
            kind: entry.kind,
            p_profile_mw: ts.clone(),
            q_capability: entry.q_capability,
            curtail_cost: entry.curtail_cost,
        });
    }

    let network = Network {
        s_base_mva: doc.s_base_mva,
        buses: doc.buses,
        lines: doc.lines,
        generators,
        demand_mw,
    };
    validate(network)
}

/// CSV format `timestamp,value_mw`, ISO-8601 UTC, at least two rows, with a
/// strictly uniform timestep.
fn load_profile_csv(path: &Path, id: &str) -> Result<TimeSeries, NetworkError> {
    let bad = |reason: String| NetworkError::BadProfile {
        id: id.to_string(),
        reason,
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["timestamp", "value_mw"] {
        return Err(bad(format!(
            "header `{}` is not `timestamp,value_mw`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut stamps: Vec<DateTime<Utc>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        let ts = DateTime::parse_from_rfc3339(&rec[0])
            .map_err(|e| bad(format!("line {}: bad timestamp `{}`: {e}", i + 2, &rec[0])))?
            .with_timezone(&Utc);
        let v: f64 = rec[1]
            .parse()
            .map_err(|e| bad(format!("line {}: bad value `{}`: {e}", i + 2, &rec[1])))?;
        if !v.is_finite() {
            return Err(bad(format!("line {}: non-finite value", i + 2)));
        }
        stamps.push(ts);
        values.push(v);
    }
    if stamps.len() < 2 {
        return Err(bad("needs at least two rows to infer the timestep".into()));
    }
    let step = stamps[1] - stamps[0];
    let step_minutes = step.num_minutes();
    if step_minutes <= 0 || step != chrono::Duration::minutes(step_minutes) {
        return Err(bad("timestep must be a positive whole number of minutes".into()));
    }
    for w in stamps.windows(2) {
        if w[1] - w[0] != step {
            return Err(bad(format!(
                "non-uniform timestep between {} and {}",
                w[0], w[1]
            )));
        }
    }
    Ok(TimeSeries {
        start: stamps[0],
        step_minutes: step_minutes as u32,
        values,
    })
}

/// Structural validation; consumes and returns the network with lines
/// reoriented parent -> child.
pub(super) fn validate(mut network: Network) -> Result<Network, NetworkError> {
    if !(network.s_base_mva > 0.0) {
        return Err(NetworkError::BadSBase);
    }

    let slack_count = network.buses.iter().filter(|b| b.is_slack).count();
    if slack_count != 1 {
        return Err(NetworkError::SlackCount(slack_count));
    }

    let mut seen = BTreeSet::new();
    for b in &network.buses {
        if !seen.insert(b.id.clone()) {
            return Err(NetworkError::DuplicateId(b.id.clone()));
        }
        if !(b.base_kv > 0.0) {
            return Err(NetworkError::BadBaseKv(b.id.clone()));
        }
        if !(0.0 < b.v_min_pu && b.v_min_pu < b.v_max_pu) {
            return Err(NetworkError::BadVoltageBounds(b.id.clone()));
        }
    }
    let bus_index = network.bus_index();
    let bus_index: BTreeMap<String, usize> = bus_index
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

    for l in &network.lines {
        if !seen.insert(l.id.clone()) {
            return Err(NetworkError::DuplicateId(l.id.clone()));
        }
        if l.from_bus == l.to_bus {
            return Err(NetworkError::SelfLoop(l.id.clone()));
        }
        if l.r_ohm < 0.0 || l.r_ohm + l.x_ohm.abs() <= 0.0 {
            return Err(NetworkError::ZeroImpedance(l.id.clone()));
        }
        if !(l.s_max_mva > 0.0) {
            return Err(NetworkError::BadThermalLimit(l.id.clone()));
        }
        for bus in [&l.from_bus, &l.to_bus] {
            if !bus_index.contains_key(bus) {
                return Err(NetworkError::UnknownBus {
                    kind: "line",
                    id: l.id.clone(),
                    bus: bus.clone(),
                });
            }
        }
    }
    for g in &network.generators {
        if !seen.insert(g.id.clone()) {
            return Err(NetworkError::DuplicateId(g.id.clone()));
        }
        if !bus_index.contains_key(&g.bus) {
            return Err(NetworkError::UnknownBus {
                kind: "generator",
                id: g.id.clone(),
                bus: g.bus.clone(),
            });
        }
        if !(g.curtail_cost > 0.0) {
            return Err(NetworkError::BadCurtailCost(g.id.clone()));
        }
    }
    for bus in network.demand_mw.keys() {
        if !bus_index.contains_key(bus) {
            return Err(NetworkError::UnknownBus {
                kind: "demand",
                id: bus.clone(),
                bus: bus.clone(),
            });
        }
    }

    check_horizon(&network)?;
    orient_radial(&mut network)?;
    Ok(network)
}

fn check_horizon(network: &Network) -> Result<(), NetworkError> {
    let all: Vec<(&str, &TimeSeries)> = network
        .demand_mw
        .iter()
        .map(|(bus, ts)| (bus.as_str(), ts))
        .chain(
            network
                .generators
                .iter()
                .map(|g| (g.id.as_str(), &g.p_profile_mw)),
        )
        .collect();
    let Some(&(_, reference)) = all.first() else {
        return Ok(());
    };
    for (id, ts) in &all[1..] {
        if ts.start != reference.start
            || ts.step_minutes != reference.step_minutes
            || ts.len() != reference.len()
        {
            return Err(NetworkError::HorizonMismatch {
                id: id.to_string(),
                reason: format!(
                    "start {} step {}m len {} vs start {} step {}m len {}",
                    ts.start,
                    ts.step_minutes,
                    ts.len(),
                    reference.start,
                    reference.step_minutes,
                    reference.len()
                ),
            });
        }
    }
    Ok(())
}

/// BFS from the slack over the undirected line graph. Flips any line found
/// child -> parent, detects cycles (a visited bus reached again) and
/// disconnected buses, and requires |lines| = |buses| - 1.
fn orient_radial(network: &mut Network) -> Result<(), NetworkError> {
    let n = network.buses.len();
    let index: BTreeMap<String, usize> = network
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.clone(), i))
        .collect();
    let slack_idx = network.buses.iter().position(|b| b.is_slack).unwrap();

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (line idx, other bus)
    for (li, l) in network.lines.iter().enumerate() {
        let a = index[&l.from_bus];
        let b = index[&l.to_bus];
        adjacency[a].push((li, b));
        adjacency[b].push((li, a));
    }

    let mut visited = vec![false; n];
    let mut used_line = vec![false; network.lines.len()];
    let mut flip = vec![false; network.lines.len()];
    visited[slack_idx] = true;
    let mut queue = VecDeque::from([slack_idx]);
    while let Some(bus) = queue.pop_front() {
        for &(li, other) in &adjacency[bus] {
            if used_line[li] {
                continue;
            }
            used_line[li] = true;
            if visited[other] {
                return Err(NetworkError::Cycle(network.lines[li].id.clone()));
            }
            visited[other] = true;
            // orient bus -> other
            if index[&network.lines[li].from_bus] != bus {
                flip[li] = true;
            }
            queue.push_back(other);
        }
    }
    if let Some(i) = visited.iter().position(|&v| !v) {
        return Err(NetworkError::Disconnected(network.buses[i].id.clone()));
    }
    if let Some(li) = used_line.iter().position(|&u| !u) {
        return Err(NetworkError::Cycle(network.lines[li].id.clone()));
    }
    for (li, l) in network.lines.iter_mut().enumerate() {
        if flip[li] {
            std::mem::swap(&mut l.from_bus, &mut l.to_bus);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_profile(dir: &Path, name: &str, values: &[f64]) {
        let mut f = std::fs::File::create(dir.join(name)).unwrap();
        writeln!(f, "timestamp,value_mw").unwrap();
        for (i, v) in values.iter().enumerate() {
            writeln!(f, "2020-06-01T{:02}:{:02}:00Z,{v}", i / 2, (i % 2) * 30).unwrap();
        }
    }

    fn two_bus_doc(dir: &Path) -> std::path::PathBuf {
        write_profile(dir, "load.csv", &[1.0, 2.0]);
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "slack", "base_kv": 11.0, "is_slack": true},
                {"id": "load", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "load", "to_bus": "slack",
                 "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [],
            "demand": {"load": "d1"},
            "profiles": {"d1": "load.csv"}
        });
        let path = dir.join("net.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
        path
    }

    #[test]
    fn smallest_valid_network_loads_and_reorients() {
        let dir = tempfile::tempdir().unwrap();
        let network = load_network(&two_bus_doc(dir.path())).unwrap();
        assert_eq!(network.buses.len(), 2);
        assert_eq!(network.lines.len(), 1);
        // line was written child -> parent; loading flips it
        assert_eq!(network.lines[0].from_bus, "slack");
        assert_eq!(network.lines[0].to_bus, "load");
        assert_eq!(network.horizon_len(), 2);
        assert_eq!(network.step_minutes(), 30);
    }

    #[test]
    fn cycle_is_reported_with_the_offending_line() {
        let dir = tempfile::tempdir().unwrap();
        write_profile(dir.path(), "load.csv", &[1.0, 2.0]);
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "a", "base_kv": 11.0, "is_slack": true},
                {"id": "b", "base_kv": 11.0},
                {"id": "c", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "a", "to_bus": "b", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0},
                {"id": "l2", "from_bus": "b", "to_bus": "c", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0},
                {"id": "l3", "from_bus": "c", "to_bus": "a", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [],
            "demand": {"b": "d1"},
            "profiles": {"d1": "load.csv"}
        });
        let path = dir.path().join("net.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        match load_network(&path) {
            Err(NetworkError::Cycle(line)) => assert!(["l1", "l2", "l3"].contains(&line.as_str())),
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_bus_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write_profile(dir.path(), "load.csv", &[1.0, 2.0]);
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "a", "base_kv": 11.0, "is_slack": true},
                {"id": "b", "base_kv": 11.0},
                {"id": "island", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "a", "to_bus": "b", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [],
            "demand": {"b": "d1"},
            "profiles": {"d1": "load.csv"}
        });
        let path = dir.path().join("net.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(
            load_network(&path),
            Err(NetworkError::Disconnected(b)) if b == "island"
        ));
    }

    #[test]
    fn horizon_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_profile(dir.path(), "load.csv", &[1.0, 2.0]);
        write_profile(dir.path(), "wind.csv", &[1.0, 2.0, 3.0]);
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "a", "base_kv": 11.0, "is_slack": true},
                {"id": "b", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "a", "to_bus": "b", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [
                {"id": "w1", "bus": "b", "kind": "wind_curtailable", "p_profile": "w", "curtail_cost": 1000000.0}
            ],
            "demand": {"b": "d1"},
            "profiles": {"d1": "load.csv", "w": "wind.csv"}
        });
        let path = dir.path().join("net.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(
            load_network(&path),
            Err(NetworkError::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn missing_profile_reference_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_profile(dir.path(), "load.csv", &[1.0, 2.0]);
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "a", "base_kv": 11.0, "is_slack": true},
                {"id": "b", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "a", "to_bus": "b", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [],
            "demand": {"b": "missing"},
            "profiles": {"d1": "load.csv"}
        });
        let path = dir.path().join("net.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(
            load_network(&path),
            Err(NetworkError::BadProfile { .. })
        ));
    }

    #[test]
    fn non_uniform_timestep_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("load.csv"),
            "timestamp,value_mw\n2020-06-01T00:00:00Z,1.0\n2020-06-01T00:30:00Z,1.0\n2020-06-01T01:15:00Z,1.0\n",
        )
        .unwrap();
        let doc = serde_json::json!({
            "schema": "flexgrid.network.v1",
            "s_base_mva": 10.0,
            "buses": [
                {"id": "a", "base_kv": 11.0, "is_slack": true},
                {"id": "b", "base_kv": 11.0}
            ],
            "lines": [
                {"id": "l1", "from_bus": "a", "to_bus": "b", "r_ohm": 0.5, "x_ohm": 1.0, "s_max_mva": 12.0}
            ],
            "generators": [],
            "demand": {"b": "d1"},
            "profiles": {"d1": "load.csv"}
        });
        let path = dir.path().join("net.json");
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        assert!(matches!(
            load_network(&path),
            Err(NetworkError::BadProfile { .. })
        ));
    }
}

//! Exit codes, diagnostics content and tamper detection for the `flexgrid`
//! command-line surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn flexgrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexgrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32, context: &str) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "{context}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Two planted archetypes and a tiny fleet; `k_range` spans past the truth.
fn two_archetype_config(dir: &Path, out_dir: &Path, extra_clustering: &str) -> PathBuf {
    let network = fixtures_dir()
        .join("networks/week_feeder.json")
        .canonicalize()
        .unwrap();
    let text = format!(
        r#"seed = 7

[paths]
network = "{network}"
out_dir = "{out}"

[synth]
n_users = 60
days = 40
start_date = "2020-03-02"

[[synth.archetypes]]
name = "night"
weight = 0.5
start_minute_mean = 60.0
start_minute_std = 30.0
duration_mean_min = 200.0
duration_std_min = 20.0
power_kw = 7.0
charge_prob = 0.6

[[synth.archetypes]]
name = "day"
weight = 0.5
start_minute_mean = 720.0
start_minute_std = 30.0
duration_mean_min = 200.0
duration_std_min = 20.0
power_kw = 7.0
charge_prob = 0.6

[clustering]
mode = "polar"
{extra_clustering}
seeds_per_k = 3
day_filter = "all"

[opf]
m_t = 5e-7
slack_export_max_mw = 0.0

[scenario]
adoption_count = 200
timestep_minutes = 30
horizon_steps = 4
include_baseline_ev_demand = true
"#,
        network = network.display(),
        out = out_dir.display(),
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn planted_structure_selects_k2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k_range = [2, 5]");
    let output = flexgrid(&["cluster", "--config", config.to_str().unwrap()]);
    assert_exit(&output, 0, "cluster with k_range");

    let diagnostics = std::fs::read_to_string(out.join("k_diagnostics.csv")).unwrap();
    let mut best: Option<(usize, f64)> = None;
    for line in diagnostics.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let k: usize = fields[0].parse().unwrap();
        let sil: f64 = fields[2].parse().unwrap();
        if best.is_none_or(|(_, s)| sil > s) {
            best = Some((k, sil));
        }
    }
    assert_eq!(best.unwrap().0, 2, "diagnostics: {diagnostics}");

    // The chosen model carries k = 2.
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("clusters.json")).unwrap())
            .unwrap();
    assert_eq!(doc["k"], 2);
    assert_eq!(doc["schema"], "flexgrid.cluster.v1");
}

#[test]
fn identical_cluster_invocations_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    assert_exit(
        &flexgrid(&["cluster", "--config", config.to_str().unwrap()]),
        0,
        "first",
    );
    let first = std::fs::read(out.join("clusters.json")).unwrap();
    assert_exit(
        &flexgrid(&["cluster", "--config", config.to_str().unwrap()]),
        0,
        "second",
    );
    let second = std::fs::read(out.join("clusters.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn k_above_user_count_exits_2_naming_both() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 61");
    let output = flexgrid(&["cluster", "--config", config.to_str().unwrap()]);
    assert_exit(&output, 2, "k too large");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("61") && stderr.contains("60"), "{stderr}");
}

#[test]
fn seed_override_changes_the_model() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    assert_exit(
        &flexgrid(&["cluster", "--config", config.to_str().unwrap()]),
        0,
        "default seed",
    );
    let default_seed = std::fs::read(out.join("clusters.json")).unwrap();
    assert_exit(
        &flexgrid(&["cluster", "--config", config.to_str().unwrap(), "--seed", "99"]),
        0,
        "seed 99",
    );
    let overridden = std::fs::read(out.join("clusters.json")).unwrap();
    assert_ne!(default_seed, overridden);
}

#[test]
fn empty_fleet_simulates_with_zero_reduction() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config_text = two_archetype_config(tmp.path(), &out, "k = 2");
    assert_exit(
        &flexgrid(&["cluster", "--config", config_text.to_str().unwrap()]),
        0,
        "cluster",
    );
    // Same run with a zero fleet.
    let text = std::fs::read_to_string(&config_text)
        .unwrap()
        .replace("adoption_count = 200", "adoption_count = 0");
    std::fs::write(&config_text, text).unwrap();
    let output = flexgrid(&[
        "simulate",
        "--config",
        config_text.to_str().unwrap(),
        "--clusters",
        out.join("clusters.json").to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "simulate with empty fleet");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["curtailment_reduction_pct"], 0.0);
    assert_eq!(summary["flex"]["flex_energy_mwh"], 0.0);
    // flex_by_cluster carries no dispatched energy
    let fc = std::fs::read_to_string(out.join("flex_by_cluster.csv")).unwrap();
    for line in fc.lines().skip(1) {
        let mw: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(mw, 0.0, "{line}");
    }
}

#[test]
fn single_timestep_window_produces_a_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    let text = std::fs::read_to_string(&config)
        .unwrap()
        .replace("horizon_steps = 4", "horizon_steps = 1");
    std::fs::write(&config, text).unwrap();
    assert_exit(&flexgrid(&["cluster", "--config", config.to_str().unwrap()]), 0, "cluster");
    assert_exit(
        &flexgrid(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--clusters",
            out.join("clusters.json").to_str().unwrap(),
        ]),
        0,
        "simulate single step",
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["n_timesteps"], 1);
    assert_exit(&flexgrid(&["report", out.to_str().unwrap()]), 0, "report");
}

#[test]
fn report_detects_tampered_timeseries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    assert_exit(&flexgrid(&["cluster", "--config", config.to_str().unwrap()]), 0, "cluster");
    assert_exit(
        &flexgrid(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--clusters",
            out.join("clusters.json").to_str().unwrap(),
        ]),
        0,
        "simulate",
    );
    assert_exit(&flexgrid(&["report", out.to_str().unwrap()]), 0, "clean report");

    // Corrupt one curtailment row.
    let ts_path = out.join("timeseries.csv");
    let mut lines: Vec<String> = std::fs::read_to_string(&ts_path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    let target = lines
        .iter()
        .position(|l| l.contains("baseline.curtail_mw"))
        .expect("a curtailment row exists");
    let mut fields: Vec<&str> = lines[target].split(',').collect();
    let bumped = format!("{}", fields[3].parse::<f64>().unwrap() + 5.0);
    fields[3] = &bumped;
    lines[target] = fields.join(",");
    std::fs::write(&ts_path, lines.join("\n") + "\n").unwrap();

    let output = flexgrid(&["report", out.to_str().unwrap()]);
    assert_exit(&output, 5, "tampered bundle must fail the cross-check");
}

#[test]
fn report_on_missing_bundle_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let output = flexgrid(&["report", tmp.path().to_str().unwrap()]);
    assert_exit(&output, 3, "empty results dir");
}

#[test]
fn schema_mismatch_on_clusters_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    let bogus = tmp.path().join("clusters.json");
    std::fs::write(&bogus, r#"{"schema": "flexgrid.cluster.v999"}"#).unwrap();
    let output = flexgrid(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--clusters",
        bogus.to_str().unwrap(),
    ]);
    assert_exit(&output, 2, "wrong schema");
}

#[test]
fn missing_clusters_file_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    let output = flexgrid(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--clusters",
        tmp.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_exit(&output, 3, "missing clusters file");
}

#[test]
fn conflicting_config_sections_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2\nk_range = [2, 4]");
    let output = flexgrid(&["cluster", "--config", config.to_str().unwrap()]);
    assert_exit(&output, 2, "both k and k_range");
}

#[test]
fn infeasible_timesteps_exit_4_with_bundle_written() {
    let tmp = tempfile::tempdir().unwrap();
    // A private network whose demand cannot be served: 30 MW behind a
    // 1.2 MVA line.
    let net_dir = tmp.path().join("net");
    std::fs::create_dir_all(&net_dir).unwrap();
    std::fs::write(
        net_dir.join("demand.csv"),
        "timestamp,value_mw\n2020-06-01T00:00:00Z,30.0\n2020-06-01T00:30:00Z,30.0\n",
    )
    .unwrap();
    let network = serde_json::json!({
        "schema": "flexgrid.network.v1",
        "s_base_mva": 10.0,
        "buses": [
            {"id": "slack", "base_kv": 11.0, "is_slack": true},
            {"id": "load", "base_kv": 11.0}
        ],
        "lines": [
            {"id": "l1", "from_bus": "slack", "to_bus": "load",
             "r_ohm": 0.363, "x_ohm": 0.968, "s_max_mva": 1.2}
        ],
        "generators": [],
        "demand": {"load": "d"},
        "profiles": {"d": "demand.csv"}
    });
    std::fs::write(
        net_dir.join("net.json"),
        serde_json::to_string_pretty(&network).unwrap(),
    )
    .unwrap();

    let out = tmp.path().join("out");
    let config = two_archetype_config(tmp.path(), &out, "k = 2");
    let text = std::fs::read_to_string(&config).unwrap();
    // Point at the hopeless network and shrink the window to its horizon.
    let text = regex_replace(&text, "network = \"[^\"]*\"", &format!(
        "network = \"{}\"",
        net_dir.join("net.json").display()
    ));
    let text = text.replace("horizon_steps = 4", "horizon_steps = 2");
    std::fs::write(&config, text).unwrap();

    assert_exit(&flexgrid(&["cluster", "--config", config.to_str().unwrap()]), 0, "cluster");
    let output = flexgrid(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--clusters",
        out.join("clusters.json").to_str().unwrap(),
    ]);
    assert_exit(&output, 4, "all timesteps infeasible");
    assert!(out.join("summary.json").exists(), "bundle still written");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["baseline"]["failed_timesteps"], serde_json::json!([0, 1]));
}

/// Minimal stand-in for a regex replace to avoid a dev-dependency.
fn regex_replace(text: &str, pattern_prefix_to_quote: &str, replacement: &str) -> String {
    // pattern is of the form `network = "[^"]*"`: find the literal prefix
    // up to ` = "` then the closing quote.
    let prefix = pattern_prefix_to_quote
        .split('=')
        .next()
        .unwrap()
        .trim_end();
    let start = text.find(&format!("{prefix} = \"")).expect("prefix present");
    let quote_open = text[start..].find('"').unwrap() + start;
    let quote_close = text[quote_open + 1..].find('"').unwrap() + quote_open + 1;
    format!("{}{}{}", &text[..start], replacement, &text[quote_close + 1..])
}

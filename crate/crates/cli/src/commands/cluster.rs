//! `flexgrid cluster`: sessions (real or synthetic) -> profiles -> k-means
//! model -> cluster document + selection diagnostics.

use std::collections::BTreeMap;
use std::path::Path;

use flexgrid_core::clustering::{
    cluster_aggregates, feature_polar, feature_standard, kmeans, recompute_inertia, select_k,
    silhouette, ClusterDocument, ClusterModel, FeatureMode, FeatureVector, KDiagnosticsRow,
    KMeansConfig,
};
use flexgrid_core::ev_data::{build_profiles, parse_sessions, synth_sessions, EvProfile, SynthSpec};
use flexgrid_core::rng::splitmix64;

use crate::config::RunConfig;
use crate::exit::CliError;

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let profiles = load_profiles(config)?;
    let features: Vec<FeatureVector> = profiles
        .values()
        .map(|p| match config.clustering.mode {
            FeatureMode::Standard => feature_standard(p),
            FeatureMode::Polar => feature_polar(p),
        })
        .collect();
    log::info!(
        "clustering {} user profiles in {:?} mode",
        features.len(),
        config.clustering.mode
    );

    let seed = config.clustering_seed();
    let (model, rows) = match (config.clustering.k, config.clustering.k_range) {
        (Some(k), None) => fit_fixed_k(&features, k, config.clustering.seeds_per_k, seed)?,
        (None, Some(range)) => {
            let result = select_k(&features, range, config.clustering.seeds_per_k, seed)
                .map_err(|e| CliError::config(e.to_string()))?;
            log::info!("selected k = {}", result.k_best);
            (result.best_model, result.rows)
        }
        _ => unreachable!("validated"),
    };

    let recomputed = recompute_inertia(&model, &features)
        .map_err(|e| CliError::data(e.to_string()))?;
    if (model.inertia_j - recomputed).abs() > 1e-9 * recomputed.max(1.0) {
        return Err(CliError::inconsistent(format!(
            "stored inertia {} disagrees with recomputation {recomputed}",
            model.inertia_j
        )));
    }

    let aggregates =
        cluster_aggregates(&model, &profiles).map_err(|e| CliError::data(e.to_string()))?;

    let out_dir = &config.paths.out_dir;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", out_dir.display())))?;
    let doc = ClusterDocument::new(&model, &aggregates);
    doc.save(&out_dir.join("clusters.json"))
        .map_err(|e| CliError::data(e.to_string()))?;
    write_diagnostics(&out_dir.join("k_diagnostics.csv"), &rows)?;

    println!(
        "clustered {} users: k={} inertia_j_kw2={} inertia_root_kw={}",
        model.assignments.len(),
        model.k,
        model.inertia_j,
        model.inertia_j.sqrt()
    );
    for row in &rows {
        println!(
            "  k={} inertia_j_kw2={} silhouette={}",
            row.k, row.inertia_j_kw2, row.silhouette
        );
    }
    Ok(())
}

fn load_profiles(config: &RunConfig) -> Result<BTreeMap<String, EvProfile>, CliError> {
    let sessions = if let Some(path) = &config.paths.sessions {
        let (sessions, summary) =
            parse_sessions(path, false).map_err(|e| CliError::data(e.to_string()))?;
        log::info!(
            "parsed {} sessions from {} users ({} rejected, {} zero-power)",
            summary.n_sessions,
            summary.n_users,
            summary.n_rejected,
            summary.n_zero_power_dropped
        );
        if summary.n_rejected > 0 {
            eprintln!("warning: {} invalid rows rejected", summary.n_rejected);
        }
        sessions
    } else {
        let synth = config.synth.as_ref().expect("validated");
        let spec = SynthSpec {
            n_users: synth.n_users,
            days: synth.days,
            start_date: synth.start_date,
            mix: synth
                .archetypes
                .iter()
                .map(|a| (a.to_archetype(), a.weight))
                .collect(),
            seed: config.synth_seed(),
        };
        let output = synth_sessions(&spec).map_err(|e| CliError::config(e.to_string()))?;
        log::info!(
            "synthesised {} sessions for {} users",
            output.sessions.len(),
            synth.n_users
        );
        output.sessions
    };

    let profiles = build_profiles(&sessions, config.clustering.day_filter)
        .map_err(|e| CliError::data(e.to_string()))?;
    if profiles.is_empty() {
        return Err(CliError::data(
            "no usable profiles after filtering".to_string(),
        ));
    }
    Ok(profiles)
}

/// Best of `seeds_per_k` seeded fits at a fixed k, with its diagnostics row.
fn fit_fixed_k(
    features: &[FeatureVector],
    k: usize,
    seeds_per_k: usize,
    base_seed: u64,
) -> Result<(ClusterModel, Vec<KDiagnosticsRow>), CliError> {
    let mut best: Option<ClusterModel> = None;
    for s in 0..seeds_per_k.max(1) {
        let seed = splitmix64(base_seed ^ ((k as u64) << 32) ^ s as u64);
        let model = kmeans(features, KMeansConfig::new(k, seed))
            .map_err(|e| CliError::config(e.to_string()))?;
        if best.as_ref().is_none_or(|b| model.inertia_j < b.inertia_j) {
            best = Some(model);
        }
    }
    let model = best.expect("at least one seed");
    let sil = if k >= 2 {
        silhouette(features, &model.assignments, splitmix64(base_seed ^ k as u64))
            .map_err(|e| CliError::config(e.to_string()))?
    } else {
        0.0
    };
    let rows = vec![KDiagnosticsRow {
        k,
        inertia_j_kw2: model.inertia_j,
        silhouette: sil,
    }];
    Ok((model, rows))
}

fn write_diagnostics(path: &Path, rows: &[KDiagnosticsRow]) -> Result<(), CliError> {
    let mut text = String::from("k,inertia_j_kw2,silhouette\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{}\n",
            row.k, row.inertia_j_kw2, row.silhouette
        ));
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

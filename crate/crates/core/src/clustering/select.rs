//! Model selection over a k range: silhouette decides, the elbow curve is
//! reported for inspection.

use super::kmeans::{gather, lloyd_from, dist_sq};
use super::{kmeans, silhouette, ClusterError, ClusterModel, FeatureVector, KMeansConfig};
use crate::rng::splitmix64;

#[derive(Debug, Clone, PartialEq)]
pub struct KDiagnosticsRow {
    pub k: usize,
    pub inertia_j_kw2: f64,
    pub silhouette: f64,
}

#[derive(Debug)]
pub struct SelectKResult {
    pub k_best: usize,
    pub rows: Vec<KDiagnosticsRow>,
    pub best_model: ClusterModel,
}

/// Runs `seeds_per_k` seeded fits per k plus one warm start obtained by
/// splitting the best (k-1)-cluster solution, which guarantees the reported
/// best-of-seeds inertia is non-increasing in k. `k_best` maximises the
/// silhouette; ties break toward smaller k.
pub fn select_k(
    features: &[FeatureVector],
    k_range: (usize, usize),
    seeds_per_k: usize,
    base_seed: u64,
) -> Result<SelectKResult, ClusterError> {
    let (k_lo, k_hi) = k_range;
    if k_lo > k_hi {
        return Err(ClusterError::EmptyKRange);
    }
    if k_lo < 2 {
        return Err(ClusterError::KTooSmall);
    }
    let n = features.len();
    if k_hi > n.saturating_sub(1) {
        return Err(ClusterError::KTooLarge { k: k_hi, n });
    }
    let seeds_per_k = seeds_per_k.max(1);

    let mut rows = Vec::new();
    let mut best_overall: Option<(f64, ClusterModel)> = None;
    let mut prev_best: Option<ClusterModel> = None;

    for k in k_lo..=k_hi {
        let mut best_at_k: Option<ClusterModel> = None;
        for s in 0..seeds_per_k {
            let seed = splitmix64(base_seed ^ ((k as u64) << 32) ^ s as u64);
            let model = kmeans(features, KMeansConfig::new(k, seed))?;
            if best_at_k
                .as_ref()
                .is_none_or(|b| model.inertia_j < b.inertia_j)
            {
                best_at_k = Some(model);
            }
        }
        if let Some(prev) = &prev_best {
            let split = split_warm_start(features, prev, k, base_seed)?;
            if best_at_k
                .as_ref()
                .is_none_or(|b| split.inertia_j < b.inertia_j)
            {
                best_at_k = Some(split);
            }
        }
        let model = best_at_k.expect("seeds_per_k >= 1");
        let sil = silhouette(features, &model.assignments, splitmix64(base_seed ^ k as u64))?;
        rows.push(KDiagnosticsRow {
            k,
            inertia_j_kw2: model.inertia_j,
            silhouette: sil,
        });
        let better = match &best_overall {
            None => true,
            // argmax silhouette, ties toward smaller k (earlier k wins ties)
            Some((best_sil, _)) => sil > *best_sil,
        };
        if better {
            best_overall = Some((sil, model.clone()));
        }
        prev_best = Some(model);
    }

    let (_, best_model) = best_overall.unwrap();
    Ok(SelectKResult {
        k_best: best_model.k,
        rows,
        best_model,
    })
}

/// New candidate at k clusters: the previous centroids plus the member
/// farthest from its centroid in the worst cluster. Lloyd from this start
/// can only improve on the (k-1)-cluster objective.
fn split_warm_start(
    features: &[FeatureVector],
    prev: &ClusterModel,
    k: usize,
    base_seed: u64,
) -> Result<ClusterModel, ClusterError> {
    let points = gather(features)?;
    let mut centers = prev.centroids.clone();

    let mut far: Option<(f64, usize)> = None;
    for (i, id) in points.ids.iter().enumerate() {
        let c = prev.assignments[*id];
        let d = dist_sq(points.data[i], &centers[c]);
        if far.is_none_or(|(fd, _)| d > fd) {
            far = Some((d, i));
        }
    }
    let (_, split_idx) = far.expect("non-empty features");
    centers.push(points.data[split_idx].to_vec());

    let cfg = KMeansConfig::new(k, splitmix64(base_seed ^ 0x5eed_517 ^ k as u64));
    let (centers, labels, inertia, n_iter, history) = lloyd_from(&points, centers, &cfg);
    let assignments = points
        .ids
        .iter()
        .zip(&labels)
        .map(|(id, &c)| (id.to_string(), c))
        .collect();
    Ok(ClusterModel {
        mode: points.mode,
        k,
        seed: cfg.seed,
        n_iterations: n_iter,
        inertia_j: inertia,
        centroids: centers,
        assignments,
        inertia_history: history,
    })
}

//! Mean silhouette score with Euclidean distance.

use std::collections::BTreeMap;

use super::kmeans::dist_sq;
use super::{ClusterError, FeatureVector};
use crate::rng::{fnv1a64, splitmix64};

/// Above this many points the score is computed on a seeded subsample, to
/// keep the O(n²) pairwise pass bounded.
pub const SILHOUETTE_SUBSAMPLE_CAP: usize = 2000;

/// Mean silhouette over points. Per point: `a` is the mean distance to its
/// own cluster's other members, `b` the smallest mean distance to another
/// cluster, and the score `(b - a) / max(a, b)` with `0/0 -> 0`. Members of
/// singleton clusters score 0. The subsample (when needed) keeps at least
/// one member of every cluster so `k` is preserved.
pub fn silhouette(
    features: &[FeatureVector],
    assignments: &BTreeMap<String, usize>,
    seed: u64,
) -> Result<f64, ClusterError> {
    let k = assignments.values().copied().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(ClusterError::KTooSmall);
    }

    let mut points: Vec<(&FeatureVector, usize)> = Vec::with_capacity(assignments.len());
    for f in features {
        if let Some(&c) = assignments.get(&f.user_id) {
            points.push((f, c));
        }
    }
    for c in 0..k {
        if !points.iter().any(|&(_, pc)| pc == c) {
            return Err(ClusterError::EmptyCluster(c));
        }
    }

    let picked = subsample(&points, seed);

    let mut score_sum = 0.0;
    for &(f, c) in &picked {
        // Mean distance from f to every cluster, own cluster excluding f.
        let mut dist_sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for &(g, gc) in &picked {
            if std::ptr::eq(f, g) {
                continue;
            }
            dist_sums[gc] += dist_sq(&f.values, &g.values).sqrt();
            counts[gc] += 1;
        }
        if counts[c] == 0 {
            continue; // singleton cluster: contributes 0
        }
        let a = dist_sums[c] / counts[c] as f64;
        let b = (0..k)
            .filter(|&o| o != c && counts[o] > 0)
            .map(|o| dist_sums[o] / counts[o] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            score_sum += (b - a) / denom;
        }
    }
    Ok(score_sum / picked.len() as f64)
}

fn subsample<'a>(
    points: &[(&'a FeatureVector, usize)],
    seed: u64,
) -> Vec<(&'a FeatureVector, usize)> {
    if points.len() <= SILHOUETTE_SUBSAMPLE_CAP {
        return points.to_vec();
    }
    let mut ranked: Vec<(u64, &(&FeatureVector, usize))> = points
        .iter()
        .map(|p| (splitmix64(seed ^ fnv1a64(p.0.user_id.as_bytes())), p))
        .collect();
    ranked.sort_by_key(|&(r, _)| r);

    // One guaranteed representative per cluster, then fill by rank.
    let mut picked = Vec::with_capacity(SILHOUETTE_SUBSAMPLE_CAP);
    let mut seen_cluster = std::collections::BTreeSet::new();
    for &(_, &(f, c)) in &ranked {
        if seen_cluster.insert(c) {
            picked.push((f, c));
        }
    }
    for &(_, &(f, c)) in &ranked {
        if picked.len() >= SILHOUETTE_SUBSAMPLE_CAP {
            break;
        }
        if !picked.iter().any(|&(g, _)| std::ptr::eq(f, g)) {
            picked.push((f, c));
        }
    }
    picked
}

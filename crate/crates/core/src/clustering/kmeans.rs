//! Lloyd's algorithm with k-means++ initialisation.
//!
//! All randomness is keyed on `(seed, hash(user_id))` rather than on input
//! position: the first centre is the point with the smallest key, and the
//! D²-weighted draws use an exponential race in which each point's variate
//! depends only on its own key and the selection round. Permuting the input
//! therefore changes nothing, and results are stable across platforms.

use std::collections::BTreeMap;

use super::{ClusterError, ClusterModel, FeatureMode, FeatureVector};
use crate::rng::{fnv1a64, splitmix64, KeyedRng};

#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

pub(super) struct Points<'a> {
    pub ids: Vec<&'a str>,
    pub data: Vec<&'a [f64]>,
    pub mode: FeatureMode,
    pub dim: usize,
}

/// Sorts by user id and validates mode, lengths, finiteness, uniqueness.
pub(super) fn gather<'a>(features: &'a [FeatureVector]) -> Result<Points<'a>, ClusterError> {
    let first = features.first().ok_or(ClusterError::Empty)?;
    let mode = first.mode;
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| features[a].user_id.cmp(&features[b].user_id));
    let mut ids = Vec::with_capacity(features.len());
    let mut data = Vec::with_capacity(features.len());
    for &i in &order {
        let f = &features[i];
        if f.mode != mode {
            return Err(ClusterError::ModeMismatch);
        }
        f.validate()?;
        if ids.last() == Some(&f.user_id.as_str()) {
            return Err(ClusterError::DuplicateUserId(f.user_id.clone()));
        }
        ids.push(f.user_id.as_str());
        data.push(f.values.as_slice());
    }
    Ok(Points {
        ids,
        data,
        mode,
        dim: mode.dim(),
    })
}

pub(super) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding by exponential race: point `u` enters round `r` with
/// variate `-ln(U_{u,r}) / d²(u)`; the minimiser is drawn with probability
/// proportional to d², independent of input order.
fn init_centers(points: &Points<'_>, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = points.ids.len();
    let keys: Vec<u64> = points
        .ids
        .iter()
        .map(|id| splitmix64(seed ^ fnv1a64(id.as_bytes())))
        .collect();

    let mut chosen = vec![false; n];
    let first = (0..n).min_by_key(|&i| keys[i]).unwrap();
    chosen[first] = true;
    let mut centers = vec![points.data[first].to_vec()];
    let mut d2: Vec<f64> = points
        .data
        .iter()
        .map(|p| dist_sq(p, &centers[0]))
        .collect();

    for round in 1..k {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if chosen[i] || d2[i] <= 0.0 {
                continue;
            }
            let u = KeyedRng::from_parts(seed, &[keys[i], round as u64]).next_f64_open();
            let race = -u.ln() / d2[i];
            if best.is_none_or(|(b, _)| race < b) {
                best = Some((race, i));
            }
        }
        // All remaining points coincide with a centre: fall back to the
        // unchosen point with the smallest key so k stays as requested.
        let pick = match best {
            Some((_, i)) => i,
            None => (0..n).filter(|&i| !chosen[i]).min_by_key(|&i| keys[i]).unwrap(),
        };
        chosen[pick] = true;
        centers.push(points.data[pick].to_vec());
        for i in 0..n {
            let d = dist_sq(points.data[i], centers.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

fn assign(points: &Points<'_>, centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut labels = vec![0usize; points.ids.len()];
    let mut total = 0.0;
    for (i, p) in points.data.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = dist_sq(p, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        total += best_d;
    }
    (labels, total)
}

fn inertia_of(points: &Points<'_>, centers: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .data
        .iter()
        .zip(labels)
        .map(|(p, &c)| dist_sq(p, &centers[c]))
        .sum()
}

/// Lloyd iterations from explicit starting centres. Exposed within the
/// module so model selection can warm-start from a split of a smaller-k
/// solution.
pub(super) fn lloyd_from(
    points: &Points<'_>,
    mut centers: Vec<Vec<f64>>,
    cfg: &KMeansConfig,
) -> (Vec<Vec<f64>>, Vec<usize>, f64, usize, Vec<f64>) {
    let k = centers.len();
    let n = points.ids.len();
    let dim = points.dim;
    let mut history = Vec::new();
    let mut labels = vec![usize::MAX; n];
    let mut n_iter = 0;

    for _ in 0..cfg.max_iter {
        n_iter += 1;
        let (new_labels, j_assign) = assign(points, &centers);
        labels = new_labels;
        history.push(j_assign);

        // Means of each cluster's members.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(points.data[i]) {
                *s += v;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let inv = 1.0 / counts[c] as f64;
            let mut move_sq = 0.0;
            for (d, s) in sums[c].iter().enumerate() {
                let new = s * inv;
                move_sq += (new - centers[c][d]) * (new - centers[c][d]);
                centers[c][d] = new;
            }
            movement = movement.max(move_sq.sqrt());
        }

        // Empty-cluster repair: hand the point farthest from its centroid
        // to the empty cluster (the donor cluster must keep a member).
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| {
                    dist_sq(points.data[a], &centers[labels[a]])
                        .total_cmp(&dist_sq(points.data[b], &centers[labels[b]]))
                })
                .expect("some cluster has more than one member when another is empty");
            counts[labels[far]] -= 1;
            counts[c] = 1;
            labels[far] = c;
            centers[c] = points.data[far].to_vec();
            movement = f64::INFINITY;
        }

        let j_update = inertia_of(points, &centers, &labels);
        debug_assert!(
            j_update <= history.last().copied().unwrap_or(f64::INFINITY) * (1.0 + 1e-12) + 1e-12,
            "Lloyd update increased the objective"
        );
        history.push(j_update);

        if movement < cfg.tol {
            break;
        }
    }

    let final_j = inertia_of(points, &centers, &labels);
    (centers, labels, final_j, n_iter, history)
}

fn to_model(
    points: &Points<'_>,
    cfg: &KMeansConfig,
    centers: Vec<Vec<f64>>,
    labels: Vec<usize>,
    inertia: f64,
    n_iterations: usize,
    history: Vec<f64>,
) -> ClusterModel {
    let assignments: BTreeMap<String, usize> = points
        .ids
        .iter()
        .zip(&labels)
        .map(|(id, &c)| (id.to_string(), c))
        .collect();
    ClusterModel {
        mode: points.mode,
        k: cfg.k,
        seed: cfg.seed,
        n_iterations,
        inertia_j: inertia,
        centroids: centers,
        assignments,
        inertia_history: history,
    }
}

pub fn kmeans(features: &[FeatureVector], cfg: KMeansConfig) -> Result<ClusterModel, ClusterError> {
    if cfg.k == 0 {
        return Err(ClusterError::KZero);
    }
    let points = gather(features)?;
    let n = points.ids.len();
    if cfg.k > n {
        return Err(ClusterError::KTooLarge { k: cfg.k, n });
    }
    let centers = init_centers(&points, cfg.k, cfg.seed);
    let (centers, labels, inertia, n_iter, history) = lloyd_from(&points, centers, &cfg);
    Ok(to_model(&points, &cfg, centers, labels, inertia, n_iter, history))
}

/// Recomputes the sum-of-squares objective from a model's centroids and
/// assignments; used to assert the stored value is consistent.
pub fn recompute_inertia(
    model: &ClusterModel,
    features: &[FeatureVector],
) -> Result<f64, ClusterError> {
    let by_id: BTreeMap<&str, &FeatureVector> =
        features.iter().map(|f| (f.user_id.as_str(), f)).collect();
    let mut total = 0.0;
    for (user, &c) in &model.assignments {
        let f = by_id
            .get(user.as_str())
            .ok_or_else(|| ClusterError::MissingProfile(user.clone()))?;
        total += dist_sq(&f.values, &model.centroids[c]);
    }
    Ok(total)
}

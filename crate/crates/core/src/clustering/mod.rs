//! k-means clustering of EV charging profiles: the 1,440-dimensional
//! standard pipeline, the 2-D polar-coordinate reduction, model selection,
//! and the per-cluster aggregates the OPF consumes.

mod aggregates;
mod features;
mod kmeans;
mod select;
mod silhouette;

pub use aggregates::{cluster_aggregates, ClusterAggregates, ClusterStats};
pub use features::{feature_polar, feature_standard};
pub use kmeans::{kmeans, recompute_inertia, KMeansConfig};
pub use select::{select_k, KDiagnosticsRow, SelectKResult};
pub use silhouette::{silhouette, SILHOUETTE_SUBSAMPLE_CAP};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::MINUTES_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// The full 1,440-sample average daily curve.
    Standard,
    /// The 2-D polar-coordinate reduction of that curve.
    Polar,
}

impl FeatureMode {
    pub fn dim(self) -> usize {
        match self {
            FeatureMode::Standard => MINUTES_PER_DAY,
            FeatureMode::Polar => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub user_id: String,
    pub mode: FeatureMode,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.values.len() != self.mode.dim() {
            return Err(ClusterError::BadFeatureLength {
                user_id: self.user_id.clone(),
                got: self.values.len(),
                want: self.mode.dim(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFiniteFeature(self.user_id.clone()));
        }
        Ok(())
    }
}

/// A fitted k-means model. `inertia_j` is the sum over clusters of squared
/// member-to-centroid Euclidean distances, in kW².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterModel {
    pub mode: FeatureMode,
    pub k: usize,
    pub seed: u64,
    pub n_iterations: usize,
    pub inertia_j: f64,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    /// Objective value after every assignment and every update step, in
    /// order; non-increasing by construction of Lloyd's algorithm.
    #[serde(skip)]
    pub inertia_history: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k={k} exceeds the number of points n={n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be >= 1")]
    KZero,
    #[error("k must be >= 2 for this operation")]
    KTooSmall,
    #[error("duplicate user id {0}")]
    DuplicateUserId(String),
    #[error("feature for {user_id} has length {got}, expected {want}")]
    BadFeatureLength {
        user_id: String,
        got: usize,
        want: usize,
    },
    #[error("non-finite feature value for user {0}")]
    NonFiniteFeature(String),
    #[error("features mix modes")]
    ModeMismatch,
    #[error("no features given")]
    Empty,
    #[error("empty k range")]
    EmptyKRange,
    #[error("no profile for assigned user {0}")]
    MissingProfile(String),
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("cannot read cluster model {path}: {reason}")]
    Document { path: String, reason: String },
}

pub const CLUSTER_SCHEMA: &str = "flexgrid.cluster.v1";

/// On-disk cluster model: the fitted model plus the aggregate statistics
/// the simulation stage needs, under a versioned schema tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterDocument {
    pub schema: String,
    pub mode: FeatureMode,
    pub k: usize,
    pub seed: u64,
    pub n_iterations: usize,
    pub inertia_j_kw2: f64,
    /// Square root of the literal sum-of-squares objective; emitted because
    /// intra-cluster distance totals are conventionally quoted in kW.
    pub inertia_root_kw: f64,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    pub aggregates: Vec<ClusterStats>,
}

impl ClusterDocument {
    pub fn new(model: &ClusterModel, aggregates: &ClusterAggregates) -> Self {
        ClusterDocument {
            schema: CLUSTER_SCHEMA.to_string(),
            mode: model.mode,
            k: model.k,
            seed: model.seed,
            n_iterations: model.n_iterations,
            inertia_j_kw2: model.inertia_j,
            inertia_root_kw: model.inertia_j.sqrt(),
            centroids: model.centroids.clone(),
            assignments: model.assignments.clone(),
            aggregates: aggregates.clusters.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ClusterError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| ClusterError::Document {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        std::fs::write(path, json + "\n").map_err(|e| ClusterError::Document {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ClusterError> {
        let text = std::fs::read_to_string(path).map_err(|e| ClusterError::Document {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let doc: ClusterDocument =
            serde_json::from_str(&text).map_err(|e| ClusterError::Document {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        if doc.schema != CLUSTER_SCHEMA {
            return Err(ClusterError::Document {
                path: path.display().to_string(),
                reason: format!("schema `{}` is not `{CLUSTER_SCHEMA}`", doc.schema),
            });
        }
        Ok(doc)
    }
}

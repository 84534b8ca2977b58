//! Per-cluster statistics consumed by the OPF stage: mean charging pattern,
//! mean robust maximum power, mean activity fraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClusterError, ClusterModel};
use crate::ev_data::EvProfile;
use crate::MINUTES_PER_DAY;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterStats {
    /// Unweighted mean of member average profiles, kW per minute of day.
    pub centroid_profile_kw: Vec<f64>,
    /// Unweighted mean of member robust maxima, kW.
    pub p_max_kw: f64,
    /// Unweighted mean of member charging fractions per minute of day.
    pub frac_charging: Vec<f64>,
    pub member_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterAggregates {
    pub clusters: Vec<ClusterStats>,
}

impl ClusterAggregates {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }
}

/// Averages member statistics per cluster. Every assigned user must have a
/// profile; profiles carry their own robust maxima.
pub fn cluster_aggregates(
    model: &ClusterModel,
    profiles: &BTreeMap<String, EvProfile>,
) -> Result<ClusterAggregates, ClusterError> {
    let mut clusters: Vec<ClusterStats> = (0..model.k)
        .map(|_| ClusterStats {
            centroid_profile_kw: vec![0.0; MINUTES_PER_DAY],
            p_max_kw: 0.0,
            frac_charging: vec![0.0; MINUTES_PER_DAY],
            member_count: 0,
        })
        .collect();

    for (user, &c) in &model.assignments {
        let profile = profiles
            .get(user)
            .ok_or_else(|| ClusterError::MissingProfile(user.clone()))?;
        let stats = &mut clusters[c];
        stats.member_count += 1;
        stats.p_max_kw += profile.p_max_kw;
        for t in 0..MINUTES_PER_DAY {
            stats.centroid_profile_kw[t] += profile.avg_profile_kw[t];
            stats.frac_charging[t] += profile.frac_charging[t];
        }
    }

    for (c, stats) in clusters.iter_mut().enumerate() {
        if stats.member_count == 0 {
            return Err(ClusterError::EmptyCluster(c));
        }
        let inv = 1.0 / stats.member_count as f64;
        stats.p_max_kw *= inv;
        for t in 0..MINUTES_PER_DAY {
            stats.centroid_profile_kw[t] *= inv;
            stats.frac_charging[t] *= inv;
        }
    }

    Ok(ClusterAggregates { clusters })
}

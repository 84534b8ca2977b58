//! Deterministic fleet apportionment: buses by demand share, then clusters
//! within each bus, both by the largest-remainder method.

use crate::clustering::ClusterAggregates;
use crate::grid_model::PuNetwork;

use super::ScenarioError;

/// EV counts per (cluster, bus).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FleetAllocation {
    /// `n_ev[cluster][bus_idx]`
    pub n_ev: Vec<Vec<u64>>,
    pub total: u64,
    pub bus_ids: Vec<String>,
}

impl FleetAllocation {
    pub fn bus_total(&self, bus_idx: usize) -> u64 {
        self.n_ev.iter().map(|row| row[bus_idx]).sum()
    }

    pub fn cluster_total(&self, cluster: usize) -> u64 {
        self.n_ev[cluster].iter().sum()
    }
}

/// Floor the quotas `w_i * total`, then hand out the remaining units by
/// descending fractional remainder; ties go to the lower index. Weights are
/// normalised internally.
pub fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / wsum * total as f64).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let assigned: u64 = counts.iter().sum();
    for &i in order.iter().take((total - assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Member-count proportions of each cluster; the default cluster shares.
pub fn cluster_shares(aggregates: &ClusterAggregates) -> Vec<f64> {
    let total: usize = aggregates.clusters.iter().map(|c| c.member_count).sum();
    aggregates
        .clusters
        .iter()
        .map(|c| c.member_count as f64 / total as f64)
        .collect()
}

/// Apportions `total_evs` to buses by demand-energy share, then splits each
/// bus total across clusters by `shares`.
pub fn allocate_fleet(
    network: &PuNetwork,
    shares: &[f64],
    total_evs: u64,
) -> Result<FleetAllocation, ScenarioError> {
    if total_evs == 0 {
        return Err(ScenarioError::EmptyFleet);
    }
    let share_sum: f64 = shares.iter().sum();
    if (share_sum - 1.0).abs() > 1e-9 {
        return Err(ScenarioError::BadClusterShares(share_sum));
    }

    let weights: Vec<f64> = network
        .demand_pu
        .iter()
        .map(|series| series.iter().sum::<f64>().max(0.0))
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(ScenarioError::AllZeroDemand);
    }

    let per_bus = largest_remainder(&weights, total_evs);
    let k = shares.len();
    let mut n_ev = vec![vec![0u64; network.n_bus()]; k];
    for (bus_idx, &bus_total) in per_bus.iter().enumerate() {
        if bus_total == 0 {
            continue;
        }
        let split = largest_remainder(shares, bus_total);
        for (cluster, &count) in split.iter().enumerate() {
            n_ev[cluster][bus_idx] = count;
        }
    }

    Ok(FleetAllocation {
        n_ev,
        total: total_evs,
        bus_ids: network.bus_ids.clone(),
    })
}

//! Reference oracles for the flexgrid test suites.
//!
//! Everything here is written directly from first principles (exhaustive
//! enumeration, closed-form solutions, textbook definitions) and must stay
//! independent of the implementation paths it is used to check.

/// Textbook mean silhouette with Euclidean distance: per point, `a` is the
/// mean distance to its own cluster's other members, `b` the smallest mean
/// distance to another cluster, score `(b - a) / max(a, b)` with 0/0 -> 0
/// and singletons scoring 0.
pub fn silhouette_reference(points: &[(Vec<f64>, usize)], k: usize) -> f64 {
    let n = points.len();
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut total = 0.0;
    for i in 0..n {
        let (ref pi, ci) = points[i];
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (j, (pj, cj)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            sums[*cj] += dist(pi, pj);
            counts[*cj] += 1;
        }
        if counts[ci] == 0 {
            continue; // singleton contributes 0
        }
        let a = sums[ci] / counts[ci] as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != ci && counts[c] > 0 {
                b = b.min(sums[c] / counts[c] as f64);
            }
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Globally optimal 2-means objective by exhaustive enumeration of all
/// bipartitions into two non-empty sets. Only sensible for small n.
pub fn exhaustive_two_means(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    assert!((2..=20).contains(&n), "exhaustive search needs 2 <= n <= 20");
    let sse = |members: &[usize]| -> f64 {
        let m = members.len() as f64;
        let cx = members.iter().map(|&i| points[i][0]).sum::<f64>() / m;
        let cy = members.iter().map(|&i| points[i][1]).sum::<f64>() / m;
        members
            .iter()
            .map(|&i| {
                let dx = points[i][0] - cx;
                let dy = points[i][1] - cy;
                dx * dx + dy * dy
            })
            .sum()
    };
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let side_a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let side_b: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        let j = sse(&side_a) + sse(&side_b);
        if j < best {
            best = j;
        }
    }
    best
}

/// Largest-remainder apportionment: floor the quotas, then hand remaining
/// units out by descending fractional remainder, ties to the lower index.
/// Written as a repeated max scan rather than a sort.
pub fn largest_remainder_reference(weights: &[f64], total: u64) -> Vec<u64> {
    let wsum: f64 = weights.iter().sum();
    assert!(wsum > 0.0, "weights must not all be zero");
    let quotas: Vec<f64> = weights.iter().map(|w| w / wsum * total as f64).collect();
    let mut out: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let mut remainders: Vec<f64> = quotas
        .iter()
        .zip(&out)
        .map(|(q, &f)| q - f as f64)
        .collect();
    let assigned: u64 = out.iter().sum();
    for _ in 0..total.saturating_sub(assigned) {
        let mut best = 0usize;
        for i in 1..remainders.len() {
            if remainders[i] > remainders[best] {
                best = i;
            }
        }
        out[best] += 1;
        remainders[best] = f64::NEG_INFINITY;
    }
    out
}

/// Exact single-line branch flow. The child bus has net injection
/// `n_inject` (positive = pushes power toward the parent); the parent end
/// holds squared voltage `v_parent_sq`. Returns `None` when no physical
/// (high-voltage root) solution exists.
///
/// Derivation: with sending-end flow (p, q) and squared current `l`,
/// the child balance gives p = r*l - n, q = x*l, and the exact power-flow
/// condition v_parent * l = p^2 + q^2 yields a quadratic in `l`; the
/// smaller root is the physical branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFlow {
    /// Squared current magnitude, p.u.^2
    pub l_sq: f64,
    /// Sending-end (parent-side) active power, p.u.; negative means the
    /// parent absorbs power from the child.
    pub p_send: f64,
    /// Sending-end reactive power, p.u.
    pub q_send: f64,
    /// Squared voltage at the child bus, p.u.^2
    pub v_child_sq: f64,
}

pub fn exact_line_flow(v_parent_sq: f64, r: f64, x: f64, n_inject: f64) -> Option<LineFlow> {
    let z2 = r * r + x * x;
    assert!(z2 > 0.0, "line impedance must be nonzero");
    let n = n_inject;
    // |z|^2 l^2 - (2 r n + v_parent) l + n^2 = 0
    let b = 2.0 * r * n + v_parent_sq;
    let disc = b * b - 4.0 * z2 * n * n;
    if disc < 0.0 {
        return None;
    }
    let l_sq = (b - disc.sqrt()) / (2.0 * z2);
    if l_sq < 0.0 {
        return None;
    }
    let p_send = r * l_sq - n;
    let q_send = x * l_sq;
    let v_child_sq = v_parent_sq - 2.0 * (r * p_send + x * q_send) + z2 * l_sq;
    Some(LineFlow {
        l_sq,
        p_send,
        q_send,
        v_child_sq,
    })
}

/// Inputs for the two-bus surplus brute force: a single line from the
/// slack (fixed voltage) to a bus carrying wind, demand and EV flexibility.
#[derive(Debug, Clone, Copy)]
pub struct TwoBusCase {
    pub r: f64,
    pub x: f64,
    pub v_slack_sq: f64,
    pub v_min_sq: f64,
    pub v_max_sq: f64,
    pub s_max: f64,
    pub wind_avail: f64,
    pub demand: f64,
    pub flex_ub: f64,
    pub pi_flex: f64,
    pub pi_curtail: f64,
    pub loss_weight: f64,
    /// Maximum power the slack may absorb (export to the upstream grid).
    pub slack_export_max: f64,
    /// Maximum power the slack may supply.
    pub slack_import_max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSearchResult {
    pub flex: f64,
    pub curtail: f64,
    pub objective: f64,
    pub flow: LineFlow,
}

/// Brute-force dispatch: scan (flex, curtail) on a uniform grid, solve the
/// exact power flow at every point, keep the feasible minimum of
/// `pi_flex*f + pi_curtail*c + loss_weight*|z|*l`.
pub fn two_bus_grid_search(case: &TwoBusCase, step: f64) -> Option<GridSearchResult> {
    let z_abs = (case.r * case.r + case.x * case.x).sqrt();
    let n_f = (case.flex_ub / step).round() as usize;
    let n_c = (case.wind_avail / step).round() as usize;
    let mut best: Option<GridSearchResult> = None;
    for fi in 0..=n_f {
        let flex = (fi as f64 * step).min(case.flex_ub);
        for ci in 0..=n_c {
            let curtail = (ci as f64 * step).min(case.wind_avail);
            let n_inject = case.wind_avail - curtail - case.demand - flex;
            let Some(flow) = exact_line_flow(case.v_slack_sq, case.r, case.x, n_inject) else {
                continue;
            };
            // p_send < 0 means the slack absorbs (exports upstream).
            if flow.p_send < -case.slack_export_max - 1e-12
                || flow.p_send > case.slack_import_max + 1e-12
            {
                continue;
            }
            if flow.v_child_sq < case.v_min_sq - 1e-12 || flow.v_child_sq > case.v_max_sq + 1e-12 {
                continue;
            }
            if (flow.p_send * flow.p_send + flow.q_send * flow.q_send).sqrt()
                > case.s_max + 1e-12
            {
                continue;
            }
            let objective = case.pi_flex * flex
                + case.pi_curtail * curtail
                + case.loss_weight * z_abs * flow.l_sq;
            if best.is_none_or(|b| objective < b.objective) {
                best = Some(GridSearchResult {
                    flex,
                    curtail,
                    objective,
                    flow,
                });
            }
        }
    }
    best
}

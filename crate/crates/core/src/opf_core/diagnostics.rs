//! Independent feasibility and tightness checks, recomputed from the
//! solution vectors rather than taken from the backend.

use super::instance::OpfInstance;
use super::solve::OpfSolution;

/// A run whose largest relaxation gap exceeds this is flagged: its flow
/// variables describe a super-physical operating point.
pub const EXACTNESS_FLAG_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_p_balance: f64,
    pub max_q_balance: f64,
    pub max_ohm: f64,
    /// min over lines of v_from * l - |S|^2; negative values violate the
    /// relaxed cone itself.
    pub min_cone_slack: f64,
}

/// Recomputes power balance and voltage-drop residuals per bus/line.
pub fn residuals(solution: &OpfSolution, instance: &OpfInstance) -> ResidualReport {
    let n_bus = instance.n_bus;
    let mut p_residual = vec![0.0; n_bus];
    let mut q_residual = vec![0.0; n_bus];

    for b in 0..n_bus {
        p_residual[b] -= instance.demand_pu[b];
        p_residual[b] += instance.firm_pu[b];
    }
    for (gi, gen) in instance.wind.iter().enumerate() {
        p_residual[gen.bus_idx] += gen.avail_pu - solution.curtail[gi];
    }
    for (fi, entry) in instance.flex.iter().enumerate() {
        p_residual[entry.bus_idx] -= solution.flex[fi];
    }
    p_residual[instance.slack_idx] += solution.slack_p;
    q_residual[instance.slack_idx] += solution.slack_q;
    for (qi, &(bus, _)) in instance.q_caps.iter().enumerate() {
        q_residual[bus] += solution.q_gen[qi];
    }

    for (li, line) in instance.lines.iter().enumerate() {
        let p = solution.p_flow[li];
        let q = solution.q_flow[li];
        let l = solution.l_sq[li];
        p_residual[line.from_idx] -= p;
        q_residual[line.from_idx] -= q;
        p_residual[line.to_idx] += p - line.r_pu * l;
        q_residual[line.to_idx] += q - line.x_pu * l;
    }

    let mut max_ohm: f64 = 0.0;
    let mut min_cone_slack = f64::INFINITY;
    for (li, line) in instance.lines.iter().enumerate() {
        let z2 = line.r_pu * line.r_pu + line.x_pu * line.x_pu;
        let drop = solution.v_sq[line.to_idx] - solution.v_sq[line.from_idx]
            + 2.0 * (line.r_pu * solution.p_flow[li] + line.x_pu * solution.q_flow[li])
            - z2 * solution.l_sq[li];
        max_ohm = max_ohm.max(drop.abs());
        let slack = solution.v_sq[line.from_idx] * solution.l_sq[li]
            - (solution.p_flow[li].powi(2) + solution.q_flow[li].powi(2));
        min_cone_slack = min_cone_slack.min(slack);
    }
    if instance.lines.is_empty() {
        min_cone_slack = 0.0;
    }

    ResidualReport {
        max_p_balance: p_residual.iter().fold(0.0, |acc, r| acc.max(r.abs())),
        max_q_balance: q_residual.iter().fold(0.0, |acc, r| acc.max(r.abs())),
        max_ohm,
        min_cone_slack,
    }
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    /// (line id, v_from * l - |S|^2) per line, p.u.^3
    pub per_line: Vec<(String, f64)>,
    pub max_gap: f64,
    /// True when the relaxation is materially loose somewhere.
    pub flagged: bool,
}

/// Per-line relaxation gap table. Gaps below -1e-9 would mean the cone
/// itself is violated and are reported as-is (callers treat that as a
/// solver defect, not looseness).
pub fn exactness_report(solution: &OpfSolution, instance: &OpfInstance) -> ExactnessReport {
    let mut per_line = Vec::with_capacity(instance.lines.len());
    let mut max_gap: f64 = 0.0;
    for (li, line) in instance.lines.iter().enumerate() {
        let gap = solution.v_sq[line.from_idx] * solution.l_sq[li]
            - (solution.p_flow[li].powi(2) + solution.q_flow[li].powi(2));
        per_line.push((line.id.clone(), gap));
        max_gap = max_gap.max(gap.abs());
    }
    ExactnessReport {
        per_line,
        max_gap,
        flagged: max_gap > EXACTNESS_FLAG_THRESHOLD,
    }
}

/// Engineering quantities implied by the relaxation variables.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    /// |V| per bus, p.u.
    pub v_pu: Vec<f64>,
    /// |I| per line, p.u.
    pub i_pu: Vec<f64>,
    /// r * l per line, p.u.
    pub loss_pu: Vec<f64>,
    pub total_loss_pu: f64,
    /// False when the relaxation gap means these numbers describe a relaxed,
    /// not physical, operating point.
    pub physical: bool,
}

pub fn recover_operating_point(solution: &OpfSolution, instance: &OpfInstance) -> OperatingPoint {
    let report = exactness_report(solution, instance);
    let loss_pu: Vec<f64> = instance
        .lines
        .iter()
        .enumerate()
        .map(|(li, line)| line.r_pu * solution.l_sq[li])
        .collect();
    OperatingPoint {
        v_pu: solution.v_sq.iter().map(|v| v.max(0.0).sqrt()).collect(),
        i_pu: solution.l_sq.iter().map(|l| l.max(0.0).sqrt()).collect(),
        total_loss_pu: loss_pu.iter().sum(),
        loss_pu,
        physical: !report.flagged,
    }
}

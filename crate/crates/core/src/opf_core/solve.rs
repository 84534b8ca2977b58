//! Solve an instance through a backend and recover a checked solution.

use super::backend::{ConicBackend, RawStatus};
use super::conic::{assemble_conic, ConicProgram};
use super::diagnostics::{exactness_report, residuals};
use super::instance::OpfInstance;
use super::{OpfError, FEASIBILITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericFailure,
}

/// Objective decomposition in raw (unnormalised) cost units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ObjectiveParts {
    pub flex_cost: f64,
    pub curtail_cost: f64,
    pub loss_term: f64,
}

impl ObjectiveParts {
    pub fn total(&self) -> f64 {
        self.flex_cost + self.curtail_cost + self.loss_term
    }
}

#[derive(Debug, Clone)]
pub struct OpfSolution {
    pub status: SolveStatus,
    /// Squared voltage per bus, p.u.^2
    pub v_sq: Vec<f64>,
    /// Sending-end active flow per line, p.u.
    pub p_flow: Vec<f64>,
    /// Sending-end reactive flow per line, p.u.
    pub q_flow: Vec<f64>,
    /// Squared current per line, p.u.^2
    pub l_sq: Vec<f64>,
    /// Dispatched turn-up per flex entry, p.u. (parallel to instance.flex).
    pub flex: Vec<f64>,
    /// Curtailment per wind generator, p.u. (parallel to instance.wind).
    pub curtail: Vec<f64>,
    /// Reactive dispatch per q-capable generator (parallel to
    /// instance.q_caps), p.u.
    pub q_gen: Vec<f64>,
    /// Slack active injection, p.u. (negative = export upstream).
    pub slack_p: f64,
    pub slack_q: f64,
    pub objective_parts: ObjectiveParts,
    /// max over lines of |v_from * l - |S|^2|, p.u.^3
    pub exactness: f64,
    pub max_p_balance_residual: f64,
    pub max_q_balance_residual: f64,
    pub max_ohm_residual: f64,
    pub relative_gap: f64,
    pub iterations: u32,
    pub backend_detail: String,
}

impl OpfSolution {
    fn empty(status: SolveStatus, instance: &OpfInstance, detail: String) -> Self {
        OpfSolution {
            status,
            v_sq: vec![f64::NAN; instance.n_bus],
            p_flow: vec![f64::NAN; instance.lines.len()],
            q_flow: vec![f64::NAN; instance.lines.len()],
            l_sq: vec![f64::NAN; instance.lines.len()],
            flex: vec![f64::NAN; instance.flex.len()],
            curtail: vec![f64::NAN; instance.wind.len()],
            q_gen: vec![f64::NAN; instance.q_caps.len()],
            slack_p: f64::NAN,
            slack_q: f64::NAN,
            objective_parts: ObjectiveParts {
                flex_cost: f64::NAN,
                curtail_cost: f64::NAN,
                loss_term: f64::NAN,
            },
            exactness: f64::NAN,
            max_p_balance_residual: f64::NAN,
            max_q_balance_residual: f64::NAN,
            max_ohm_residual: f64::NAN,
            relative_gap: f64::NAN,
            iterations: 0,
            backend_detail: detail,
        }
    }
}

/// Solves the assembled program and post-checks the answer. `Optimal` is
/// granted only when independently recomputed balance and voltage-drop
/// residuals are within 1e-7 p.u. and the backend's relative duality gap is
/// within 1e-7; a converged-but-unverifiable answer degrades to
/// `NumericFailure` rather than passing silently.
pub fn solve(instance: &OpfInstance, backend: &dyn ConicBackend) -> Result<OpfSolution, OpfError> {
    let program = assemble_conic(instance);
    solve_program(instance, &program, backend)
}

pub(crate) fn solve_program(
    instance: &OpfInstance,
    program: &ConicProgram,
    backend: &dyn ConicBackend,
) -> Result<OpfSolution, OpfError> {
    let raw = backend
        .solve(program)
        .map_err(|e| OpfError::Backend(e.to_string()))?;

    match raw.status {
        RawStatus::Infeasible => Ok(OpfSolution::empty(
            SolveStatus::Infeasible,
            instance,
            raw.detail,
        )),
        RawStatus::Failed => Ok(OpfSolution::empty(
            SolveStatus::NumericFailure,
            instance,
            raw.detail,
        )),
        RawStatus::Optimal | RawStatus::AlmostOptimal => {
            let layout = &program.layout;
            let x = &raw.x;
            let take = |start: usize, n: usize| x[start..start + n].to_vec();

            let v_sq = take(layout.v_sq, layout.n_bus);
            let p_flow = take(layout.p_flow, layout.n_line);
            let q_flow = take(layout.q_flow, layout.n_line);
            let l_sq = take(layout.l_sq, layout.n_line);
            let flex = take(layout.flex, layout.n_flex);
            let curtail = take(layout.curtail, layout.n_wind);
            let q_gen = take(layout.q_gen, layout.n_qgen);

            let flex_cost: f64 = instance
                .flex
                .iter()
                .zip(&flex)
                .map(|(entry, &f)| instance.pi_flex[entry.cluster] * f)
                .sum();
            let curtail_cost: f64 = instance
                .wind
                .iter()
                .zip(&curtail)
                .map(|(gen, &c)| gen.pi_curtail * c)
                .sum();
            let loss_term: f64 = instance
                .lines
                .iter()
                .zip(&l_sq)
                .map(|(line, &l)| instance.params.loss_weight * line.z_abs_pu() * l)
                .sum();

            let mut solution = OpfSolution {
                status: SolveStatus::Optimal,
                v_sq,
                p_flow,
                q_flow,
                l_sq,
                flex,
                curtail,
                q_gen,
                slack_p: x[layout.slack_p],
                slack_q: x[layout.slack_q],
                objective_parts: ObjectiveParts {
                    flex_cost,
                    curtail_cost,
                    loss_term,
                },
                exactness: 0.0,
                max_p_balance_residual: 0.0,
                max_q_balance_residual: 0.0,
                max_ohm_residual: 0.0,
                relative_gap: relative_gap(raw.primal_obj, raw.dual_obj),
                iterations: raw.iterations,
                backend_detail: raw.detail,
            };

            let report = residuals(&solution, instance);
            solution.max_p_balance_residual = report.max_p_balance;
            solution.max_q_balance_residual = report.max_q_balance;
            solution.max_ohm_residual = report.max_ohm;
            solution.exactness = exactness_report(&solution, instance).max_gap.max(0.0);

            let bounds_ok = instance
                .flex
                .iter()
                .zip(&solution.flex)
                .all(|(entry, &f)| (-1e-8..=entry.ub_pu + 1e-8).contains(&f))
                && instance
                    .wind
                    .iter()
                    .zip(&solution.curtail)
                    .all(|(gen, &c)| (-1e-8..=gen.avail_pu + 1e-8).contains(&c))
                && (0..instance.n_bus).all(|b| {
                    let v = solution.v_sq[b];
                    v >= instance.v_min_sq[b] - 1e-6 && v <= instance.v_max_sq[b] + 1e-6
                });
            let verified = bounds_ok
                && report.max_p_balance <= FEASIBILITY_TOL
                && report.max_q_balance <= FEASIBILITY_TOL
                && report.max_ohm <= FEASIBILITY_TOL
                && report.min_cone_slack >= -1e-9
                && solution.relative_gap <= FEASIBILITY_TOL;
            if !verified {
                log::warn!(
                    "solution failed verification: p={:.2e} q={:.2e} ohm={:.2e} cone={:.2e} gap={:.2e}",
                    report.max_p_balance,
                    report.max_q_balance,
                    report.max_ohm,
                    report.min_cone_slack,
                    solution.relative_gap
                );
                solution.status = SolveStatus::NumericFailure;
            }
            Ok(solution)
        }
    }
}

fn relative_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual).abs() / primal.abs().max(dual.abs()).max(1.0)
}

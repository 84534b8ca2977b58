//! Pluggable conic solver backend.
//!
//! The contract is deliberately narrow: linear objective, linear
//! equalities, nonnegativity rows and second-order cones, solved to at
//! least 1e-7 feasibility and relative gap. Backends must be usable from
//! multiple threads; one solver instance is constructed per solve call so
//! re-entrancy is never required. `conformance::run_conformance` checks any
//! implementation against known optima.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use thiserror::Error;

use super::conic::{ConeSpec, ConicProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawStatus {
    Optimal,
    /// Converged only to the backend's reduced accuracy; callers must
    /// verify residuals before trusting it.
    AlmostOptimal,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone)]
pub struct RawSolution {
    pub status: RawStatus,
    pub x: Vec<f64>,
    /// Primal and dual objective of the scaled problem, for gap checks.
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub iterations: u32,
    /// Human-readable status detail from the backend.
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend rejected the program: {0}")]
    BadProgram(String),
}

pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConicProgram) -> Result<RawSolution, BackendError>;
}

/// Default backend: the Clarabel interior-point solver.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    pub max_iter: u32,
    pub tol: f64,
    pub verbose: bool,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        ClarabelBackend {
            max_iter: 200,
            tol: 1e-9,
            verbose: false,
        }
    }
}

impl ClarabelBackend {
    fn attempt(
        &self,
        program: &ConicProgram,
        equilibrate: bool,
        max_iter: u32,
    ) -> Result<RawSolution, BackendError> {
        let n_var = program.layout.n_var;
        let (colptr, rowval, nzval) = program.to_csc();
        let a = CscMatrix::new(program.n_rows(), n_var, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((n_var, n_var));
        let q = program.scaled_obj();
        let cones: Vec<SupportedConeT<f64>> = program
            .cones
            .iter()
            .map(|c| match *c {
                ConeSpec::Zero(n) => SupportedConeT::ZeroConeT(n),
                ConeSpec::NonNeg(n) => SupportedConeT::NonnegativeConeT(n),
                ConeSpec::Soc(n) => SupportedConeT::SecondOrderConeT(n),
            })
            .collect();

        let settings = DefaultSettings {
            verbose: self.verbose,
            max_iter,
            tol_gap_abs: self.tol,
            tol_gap_rel: self.tol,
            tol_feas: self.tol,
            equilibrate_enable: equilibrate,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &q, &a, &program.b, &cones, settings)
            .map_err(|e| BackendError::BadProgram(format!("{e:?}")))?;
        solver.solve();

        let status = match solver.solution.status {
            SolverStatus::Solved => RawStatus::Optimal,
            SolverStatus::AlmostSolved => RawStatus::AlmostOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                RawStatus::Infeasible
            }
            // A dual-infeasible conic program is unbounded below; the OPF
            // objective is bounded on a feasible instance, so treat it as a
            // failure rather than a certificate.
            _ => RawStatus::Failed,
        };
        Ok(RawSolution {
            status,
            x: solver.solution.x.clone(),
            primal_obj: solver.solution.obj_val,
            dual_obj: solver.solution.obj_val_dual,
            iterations: solver.solution.iterations,
            detail: format!("{:?}", solver.solution.status),
        })
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn solve(&self, program: &ConicProgram) -> Result<RawSolution, BackendError> {
        let first = self.attempt(program, true, self.max_iter)?;
        match first.status {
            RawStatus::Optimal | RawStatus::Infeasible => Ok(first),
            // Retry once on stalls: rescaling off plus a longer leash often
            // recovers problems equilibration distorted.
            RawStatus::AlmostOptimal | RawStatus::Failed => {
                let second = self.attempt(program, false, self.max_iter * 2)?;
                match second.status {
                    RawStatus::Optimal | RawStatus::Infeasible => Ok(second),
                    _ if first.status == RawStatus::AlmostOptimal => Ok(first),
                    _ => Ok(second),
                }
            }
        }
    }
}

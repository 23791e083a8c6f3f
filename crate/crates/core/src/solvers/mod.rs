//! Steady and transient solvers for scalar transport in primal and mixed form.

pub mod linalg;
pub mod mixed;
pub mod primal;
pub mod problem;
pub mod transient;

use serde::{Deserialize, Serialize};

use crate::complex::Cochain;
use crate::error::{CmcError, Result};

pub use linalg::SolveStats;
pub use mixed::{assemble_mixed, mixed_method_gap, solve_mixed_steady, MixedMethod, MixedSystem};
pub use primal::{assemble_primal, primal_flow_rate, primal_flux, solve_primal_steady, PrimalSystem};
pub use problem::{Dirichlet, Neumann, TransientParams, TransportProblem};
pub use transient::{solve_mixed_transient, solve_mixed_transient_from, solve_primal_transient};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub t: f64,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u_tilde: Option<Vec<f64>>,
    /// Amount of the transported quantity, a `D`-cochain.
    pub amount: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub u: Cochain,
    pub q: Cochain,
    pub u_tilde: Option<Cochain>,
    pub stats: Vec<SolveStats>,
    /// Every time level including the initial one; empty for steady solves.
    pub series: Vec<TimeStep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub u_rel: f64,
    pub q_rel: f64,
}

/// `‖x − x′‖₂ / ‖x′‖₂` over all cells, unweighted.
pub fn relative_error(x: &Cochain, exact: &Cochain) -> Result<f64> {
    if x.dim() != exact.dim() || x.len() != exact.len() {
        return Err(CmcError::DimensionMismatch("compared cochains differ in shape".into()));
    }
    let norm = exact.norm();
    if norm == 0.0 {
        return Err(CmcError::InvalidProblem("relative error against a zero field".into()));
    }
    Ok((x - exact).norm() / norm)
}

pub fn relative_errors(result: &SolveResult, exact_u: &Cochain, exact_q: &Cochain) -> Result<ErrorReport> {
    Ok(ErrorReport { u_rel: relative_error(&result.u, exact_u)?, q_rel: relative_error(&result.q, exact_q)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Primal,
    Mixed,
}

/// Dispatches a steady solve.
pub fn solve_steady(p: &TransportProblem, formulation: Formulation, method: MixedMethod) -> Result<SolveResult> {
    match formulation {
        Formulation::Primal => solve_primal_steady(p),
        Formulation::Mixed => solve_mixed_steady(p, method),
    }
}

pub fn solve_transient(p: &TransportProblem, formulation: Formulation) -> Result<SolveResult> {
    match formulation {
        Formulation::Primal => solve_primal_transient(p),
        Formulation::Mixed => solve_mixed_transient(p),
    }
}

#[cfg(test)]
mod tests;

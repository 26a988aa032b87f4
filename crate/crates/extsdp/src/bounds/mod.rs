//! Simulation-error bounds and the channel distances they are built from.
//!
//! Every bound has a `build_*` function returning the [`SdpProblem`] (for
//! export or inspection) and a solving wrapper returning a [`BoundResult`].

mod distance;
mod general;
mod reduced;

pub use distance::{build_diamond, build_root_fidelity, diamond_distance_half, root_fidelity};
pub use general::{
    build_cpptp_general, build_e2pe_general, build_e2pe_superchannel_general, cpptp_general, e2pe_general,
    e2pe_superchannel_general,
};
pub use reduced::{
    build_e2pe_qec_reduced, build_e2pe_teleport_reduced, e2pe_qec_reduced, e2pe_teleport_reduced,
    reconstruct_simulation_channel, ReducedVars,
};

use crate::error::{Error, Result};
use crate::quantum::ChoiChannel;
use crate::sdp::model::SdpProblem;
use crate::solver::{solve, SolverConfig, SolverResult, SolverStatus};
use crate::tensor::LabeledOperator;

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub value: f64,
    pub solver: SolverResult,
    /// The simulating channel recovered from the optimizer, when the
    /// formulation determines one.
    pub reconstruction: Option<ChoiChannel>,
    /// Largest violation of each constraint at the returned point.
    pub residuals: Vec<(String, f64)>,
    /// Weight `E_F` of the identity in the twirled simulating channel
    /// (reduced formulations only).
    pub fidelity_weight: Option<f64>,
}

/// Solves and audits a problem. Suspected infeasibility is an error, since
/// every formulation here has a strictly feasible point.
pub(crate) fn solve_checked(problem: &SdpProblem, cfg: &SolverConfig) -> Result<(SolverResult, Vec<(String, f64)>)> {
    let sol = solve(problem, cfg)?;
    if sol.status == SolverStatus::InfeasibleSuspected {
        return Err(Error::Model("solver reports the bound SDP as infeasible".into()));
    }
    let residuals = problem.residuals(&sol.assignment)?;
    Ok((sol, residuals))
}

/// Choi operator of a single-input, single-output channel as `[in, out]`.
pub(crate) fn bipartite_choi(ch: &ChoiChannel) -> Result<LabeledOperator> {
    ch.choi().clone().relabel(vec![ch.in_dim(), ch.out_dim()])
}

pub(crate) fn is_real(op: &LabeledOperator) -> bool {
    op.data().iter().all(|z| z.im == 0.0)
}

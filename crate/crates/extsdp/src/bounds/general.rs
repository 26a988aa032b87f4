//! Unreduced formulations over the full extension operator `M`, and the
//! C-PPT-P baseline.
//!
//! `M` acts on `[A, Â, B̂₁, B̂₂, B₁, B₂]`. For teleportation `A Â B̂₁ B̂₂` are
//! inputs and `B₁ B₂` outputs; for the superchannel `Â` is an output (it
//! feeds the resource channel) and `B̂₁ B̂₂` are inputs.

use super::distance::add_diamond_rows;
use super::{bipartite_choi, is_real, solve_checked, BoundResult};
use crate::error::{Error, Result};
use crate::quantum::{ChoiChannel, DensityState};
use crate::sdp::model::{MatrixExpr, SdpProblem, SwapSymmetry, VarId};
use crate::solver::SolverConfig;
use crate::tensor::LabeledOperator;

const A: usize = 0;
const AH: usize = 1;
const BH1: usize = 2;
const BH2: usize = 3;
const B1: usize = 4;
const B2: usize = 5;

fn resource_dims(rho: &DensityState) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::DimensionMismatch(format!("resource state must be bipartite, got dims {other:?}"))),
    }
}

/// Declares `M` with its positivity, swap symmetry, extension and PPT rows,
/// and returns it with the marginal Choi operator `K = Tr_{B̂₂B₂} M / d_B̂`
/// on `[A, Â, B̂₁, B₁]`.
fn extension_rows(p: &mut SdpProblem, dims: [usize; 6], real: bool) -> Result<(VarId, MatrixExpr)> {
    let sym = SwapSymmetry { perm: vec![A, AH, BH2, BH1, B2, B1], sign: 1.0 };
    let m = if real { p.add_real_variable("M", &dims, Some(sym))? } else { p.add_variable("M", &dims, Some(sym))? };
    let db = dims[BH1] as f64;
    p.add_psd("M", p.var(m))?;
    let marginal = p.var(m).ptrace(&[BH2, B2])?;
    let ext = p.var(m).ptrace(&[B2])?.sub(marginal.clone().kron_identity(BH2, dims[BH2])?.scale(1.0 / db))?;
    p.add_eq("Tr_B₂ M = M_{AÂB̂₁B₁}/d_B̂ ⊗ I", ext)?;
    p.add_psd("T_{AÂ}(M)", p.var(m).ptrans(&[A, AH])?)?;
    p.add_psd("T_{B̂₂B₂}(M)", p.var(m).ptrans(&[BH2, B2])?)?;
    Ok((m, marginal.scale(1.0 / db)))
}

fn finish(problem: SdpProblem, sim: MatrixExpr, in_dim: usize, out_dim: usize, cfg: &SolverConfig) -> Result<BoundResult> {
    let (sol, residuals) = solve_checked(&problem, cfg)?;
    let choi = problem.evaluate(&sim, &sol.assignment)?.relabel(vec![in_dim, out_dim])?;
    let reconstruction = ChoiChannel::unchecked(choi, vec![in_dim], vec![out_dim])?;
    Ok(BoundResult { value: sol.value, solver: sol, reconstruction: Some(reconstruction), residuals, fidelity_weight: None })
}

fn teleport_parts(target: &ChoiChannel, rho: &DensityState) -> Result<(SdpProblem, MatrixExpr)> {
    let (da_hat, db_hat) = resource_dims(rho)?;
    let gn = bipartite_choi(target)?;
    let (din, dout) = (target.in_dim(), target.out_dim());
    let real = is_real(&gn) && is_real(rho.op());
    let mut p = SdpProblem::new();
    let (m, k) = extension_rows(&mut p, [din, da_hat, db_hat, db_hat, dout, dout], real)?;
    let tp = p.var(m).ptrace(&[B1, B2])?;
    let eye = LabeledOperator::identity(tp.dims());
    p.add_eq("Tr_{B₁B₂} M = I", tp.sub(MatrixExpr::constant(&eye))?)?;
    let rho_t = rho.op().partial_transpose(&[0, 1])?;
    let sim = k.contract(&[1, 2], rho_t.data())?;
    add_diamond_rows(&mut p, &gn, sim.clone(), real)?;
    Ok((p, sim))
}

/// Two-PPT-extendible simulation of `target` from the resource state `ρ`.
pub fn build_e2pe_general(target: &ChoiChannel, rho: &DensityState) -> Result<SdpProblem> {
    teleport_parts(target, rho).map(|r| r.0)
}

pub fn e2pe_general(target: &ChoiChannel, rho: &DensityState, cfg: &SolverConfig) -> Result<BoundResult> {
    let (p, sim) = teleport_parts(target, rho)?;
    finish(p, sim, target.in_dim(), target.out_dim(), cfg)
}

fn cpptp_parts(target: &ChoiChannel, rho: &DensityState) -> Result<(SdpProblem, MatrixExpr)> {
    let (da_hat, db_hat) = resource_dims(rho)?;
    let gn = bipartite_choi(target)?;
    let (din, dout) = (target.in_dim(), target.out_dim());
    let real = is_real(&gn) && is_real(rho.op());
    let dims = [din, da_hat, db_hat, dout];
    let mut p = SdpProblem::new();
    let k = if real { p.add_real_variable("K", &dims, None)? } else { p.add_variable("K", &dims, None)? };
    p.add_psd("K", p.var(k))?;
    p.add_psd("T_{B̂B}(K)", p.var(k).ptrans(&[2, 3])?)?;
    let tp = p.var(k).ptrace(&[3])?;
    let eye = LabeledOperator::identity(tp.dims());
    p.add_eq("Tr_B K = I", tp.sub(MatrixExpr::constant(&eye))?)?;
    let rho_t = rho.op().partial_transpose(&[0, 1])?;
    let sim = p.var(k).contract(&[1, 2], rho_t.data())?;
    add_diamond_rows(&mut p, &gn, sim.clone(), real)?;
    Ok((p, sim))
}

/// Simulation by a single bipartite channel that is completely PPT
/// preserving across the Alice/Bob cut.
pub fn build_cpptp_general(target: &ChoiChannel, rho: &DensityState) -> Result<SdpProblem> {
    cpptp_parts(target, rho).map(|r| r.0)
}

pub fn cpptp_general(target: &ChoiChannel, rho: &DensityState, cfg: &SolverConfig) -> Result<BoundResult> {
    let (p, sim) = cpptp_parts(target, rho)?;
    finish(p, sim, target.in_dim(), target.out_dim(), cfg)
}

fn superchannel_parts(target: &ChoiChannel, resource: &ChoiChannel) -> Result<(SdpProblem, MatrixExpr)> {
    let go = bipartite_choi(target)?;
    let gn = bipartite_choi(resource)?;
    let (din, dout) = (target.in_dim(), target.out_dim());
    let (da_hat, db_hat) = (resource.in_dim(), resource.out_dim());
    let real = is_real(&go) && is_real(&gn);
    let mut p = SdpProblem::new();
    let (m, k) = extension_rows(&mut p, [din, da_hat, db_hat, db_hat, dout, dout], real)?;
    let tp = p.var(m).ptrace(&[AH, B1, B2])?;
    let eye = LabeledOperator::identity(tp.dims());
    p.add_eq("Tr_{ÂB₁B₂} M = I", tp.sub(MatrixExpr::constant(&eye))?)?;
    // Â carries no signal back to A
    let no_signal = p
        .var(m)
        .ptrace(&[AH])?
        .sub(p.var(m).ptrace(&[A, AH])?.kron_identity(0, din)?.scale(1.0 / din as f64))?;
    p.add_eq("Tr_Â M = I_A ⊗ Tr_{AÂ} M / d_A", no_signal)?;
    let gn_t = gn.partial_transpose(&[0, 1])?;
    let sim = k.contract(&[1, 2], gn_t.data())?;
    add_diamond_rows(&mut p, &go, sim.clone(), real)?;
    Ok((p, sim))
}

/// Two-PPT-extendible superchannel turning `resource` into `target`.
pub fn build_e2pe_superchannel_general(target: &ChoiChannel, resource: &ChoiChannel) -> Result<SdpProblem> {
    superchannel_parts(target, resource).map(|r| r.0)
}

pub fn e2pe_superchannel_general(target: &ChoiChannel, resource: &ChoiChannel, cfg: &SolverConfig) -> Result<BoundResult> {
    let (p, sim) = superchannel_parts(target, resource)?;
    finish(p, sim, target.in_dim(), target.out_dim(), cfg)
}

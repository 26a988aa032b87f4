//! Normalized diamond distance and root channel fidelity.

use super::{bipartite_choi, solve_checked};
use crate::error::{Error, Result};
use crate::quantum::ChoiChannel;
use crate::sdp::model::{Framing, MatrixExpr, SdpProblem, Sense, VarId};
use crate::solver::SolverConfig;
use crate::tensor::{CMatrix, LabeledOperator, C64, ONE, ZERO};
use nalgebra::SymmetricEigen;

fn check_dims(n: &ChoiChannel, m: &ChoiChannel) -> Result<()> {
    if n.in_dim() != m.in_dim() || n.out_dim() != m.out_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels map {}→{} and {}→{}",
            n.in_dim(),
            n.out_dim(),
            m.in_dim(),
            m.out_dim()
        )));
    }
    Ok(())
}

/// Adds `Z ⪰ 0`, `Z ⪰ target − sim`, `μ I_in ⪰ Tr_out Z` and the objective
/// `min μ`. `sim` lives on `[in, out]`.
pub(crate) fn add_diamond_rows(p: &mut SdpProblem, target: &LabeledOperator, sim: MatrixExpr, real: bool) -> Result<VarId> {
    let dims = target.dims().to_vec();
    let z = if real { p.add_real_variable("Z", &dims, None)? } else { p.add_variable("Z", &dims, None)? };
    let mu = p.add_variable("mu", &[1], None)?;
    p.add_psd("Z", p.var(z))?;
    let gap = p.var(z).sub(MatrixExpr::constant(target).sub(sim)?)?;
    p.add_psd("Z ⪰ target − simulation", gap)?;
    let mu_id = p.var(mu).kron_identity(1, dims[0])?.relabel(vec![dims[0]])?;
    p.add_psd("μ I ⪰ Tr_B Z", mu_id.sub(p.var(z).ptrace(&[1])?)?)?;
    p.set_objective(Sense::Minimize, p.var(mu))?;
    Ok(mu)
}

pub fn build_diamond(n: &ChoiChannel, m: &ChoiChannel) -> Result<SdpProblem> {
    check_dims(n, m)?;
    let gn = bipartite_choi(n)?;
    let gm = bipartite_choi(m)?;
    let mut p = SdpProblem::new();
    let real = super::is_real(&gn) && super::is_real(&gm);
    add_diamond_rows(&mut p, &gn, MatrixExpr::constant(&gm), real)?;
    Ok(p)
}

/// `½‖N − M‖⋄`.
pub fn diamond_distance_half(n: &ChoiChannel, m: &ChoiChannel, cfg: &SolverConfig) -> Result<f64> {
    let (sol, _) = solve_checked(&build_diamond(n, m)?, cfg)?;
    Ok(sol.value)
}

/// Orthonormal basis of the range of a PSD operator, as columns, together
/// with the matching eigenvalues.
fn support(op: &LabeledOperator) -> (CMatrix, Vec<f64>) {
    let eig = SymmetricEigen::new(op.data().clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > 1e-10 * top.max(1.0)).collect();
    let basis = CMatrix::from_fn(op.side(), keep.len(), |i, c| eig.eigenvectors[(i, keep[c])]);
    (basis, keep.iter().map(|&k| eig.eigenvalues[k]).collect())
}

/// `sup λ` subject to `λ I ⪯ Re Tr_out Q` and `[[Γᴹ, Q†], [Q, Γᴺ]] ⪰ 0`.
///
/// The block constraint forces `Q = V_N K V_M†` with `V` spanning the Choi
/// supports, so the variable is the compressed block `[[D_M, K†], [K, D_N]]`
/// with its diagonal pinned to the eigenvalues. Without this the problem has
/// no interior whenever a Choi operator is singular.
pub fn build_root_fidelity(n: &ChoiChannel, m: &ChoiChannel) -> Result<SdpProblem> {
    check_dims(n, m)?;
    let gn = bipartite_choi(n)?;
    let gm = bipartite_choi(m)?;
    let dims = gn.dims().to_vec();
    let (vm, em) = support(&gm);
    let (vn, en) = support(&gn);
    let (rm, rn) = (em.len(), en.len());
    let s = rm + rn;
    let e1 = CMatrix::from_fn(s, rm, |i, j| if i == j { ONE } else { ZERO });
    let e2 = CMatrix::from_fn(s, rn, |i, j| if i == rm + j { ONE } else { ZERO });
    let mut p = SdpProblem::new();
    let h = p.add_variable("compressed block", &[s], None)?;
    let lam = p.add_variable("lambda", &[1], None)?;
    p.add_psd("[[D_M, K†], [K, D_N]]", p.var(h))?;
    for (name, e, vals) in [("M diagonal", &e1, &em), ("N diagonal", &e2, &en)] {
        let r = vals.len();
        let pinned = p.var(h).frame(Framing::HermitianPart { left: e.adjoint(), right: e.clone(), out_dims: vec![r] })?;
        let diag = CMatrix::from_fn(r, r, |i, j| if i == j { C64::new(vals[i], 0.0) } else { ZERO });
        p.add_eq(name, pinned.sub(MatrixExpr::constant(&LabeledOperator::new(vec![r], diag)?))?)?;
    }
    let re_q = p.var(h).frame(Framing::HermitianPart {
        left: &vn * e2.adjoint(),
        right: &e1 * vm.adjoint(),
        out_dims: dims.clone(),
    })?;
    let lam_id = p.var(lam).kron_identity(1, dims[0])?.relabel(vec![dims[0]])?;
    p.add_psd("Re Tr_B Q ⪰ λ I", re_q.ptrace(&[1])?.sub(lam_id)?)?;
    p.set_objective(Sense::Maximize, p.var(lam))?;
    Ok(p)
}

/// `√F(N, M)`.
pub fn root_fidelity(n: &ChoiChannel, m: &ChoiChannel, cfg: &SolverConfig) -> Result<f64> {
    let (sol, _) = solve_checked(&build_root_fidelity(n, m)?, cfg)?;
    Ok(sol.value)
}

//! Symmetry-reduced formulations for simulating the identity channel.
//!
//! Twirling the extension operator over `Ū ⊗ U ⊗ U` on `A B₁ B₂` leaves six
//! operators `M^i` on `Â B̂₁ B̂₂`, one per label of [`SymBasis`]. The partial
//! transposes needed for the PPT rows are linear in the `M^i`; the
//! coefficients come from the transfer matrices `Y Z⁻¹` (for `T_A`) and
//! `Y P⁻¹ Y⁻¹` (for `T_{AB₁}`) of the basis.

use super::{bipartite_choi, solve_checked, BoundResult};
use crate::error::{Error, Result};
use crate::quantum::{randomizing_channel_choi, ChoiChannel, DensityState};
use crate::sdp::model::{MatrixExpr, SdpProblem, SwapSymmetry, VarId};
use crate::solver::SolverConfig;
use crate::symmetry::{swap_sign, Mat6, SymBasis, MINUS, ONE_IDX, PLUS, THREE_IDX, TWO_IDX, ZERO_IDX};
use crate::tensor::{LabeledOperator, C64};

/// The `M^i` of a reduced problem; `None` for labels absent at this `d`.
#[derive(Clone, Debug)]
pub struct ReducedVars {
    pub basis: SymBasis,
    pub m: [Option<VarId>; 6],
    pub dims: [usize; 3],
}

/// `coeffs[k][i]`: weight of `M^i` in the `k`-th operator obtained from the
/// transfer matrix `t` (either `Y Z⁻¹` or `Y P⁻¹ Y⁻¹`).
pub(crate) fn transfer_coeffs(basis: &SymBasis, t: &Mat6) -> [[C64; 6]; 6] {
    let d = basis.d as f64;
    let mut out = [[C64::new(0.0, 0.0); 6]; 6];
    for (k, row) in out.iter_mut().enumerate() {
        for i in basis.active() {
            row[i] = t[(i, k)] * (d / basis.traces[i]);
        }
    }
    out
}

impl ReducedVars {
    fn declare(p: &mut SdpProblem, d: usize, da_hat: usize, db_hat: usize) -> Result<Self> {
        let basis = SymBasis::new(d)?;
        let dims = [da_hat, db_hat, db_hat];
        let mut m = [None; 6];
        for i in basis.active() {
            let sym = SwapSymmetry { perm: vec![0, 2, 1], sign: swap_sign(i) };
            m[i] = Some(p.add_variable(&format!("M{}", crate::symmetry::LABELS[i]), &dims, Some(sym))?);
        }
        Ok(Self { basis, m, dims })
    }

    fn get(&self, p: &SdpProblem, i: usize) -> MatrixExpr {
        match self.m[i] {
            Some(v) => p.var(v),
            None => MatrixExpr::zero(&self.dims),
        }
    }

    /// `Σ_i w_i M^i` over the active labels.
    fn combo(&self, p: &SdpProblem, w: [C64; 6]) -> Result<MatrixExpr> {
        let parts: Vec<(C64, MatrixExpr)> =
            self.basis.active().into_iter().filter(|&i| w[i].norm() > 1e-14).map(|i| (w[i], self.get(p, i))).collect();
        if parts.is_empty() {
            return Ok(MatrixExpr::zero(&self.dims));
        }
        MatrixExpr::combination(parts)
    }

    fn real_combo(&self, p: &SdpProblem, w: [f64; 6]) -> Result<MatrixExpr> {
        self.combo(p, w.map(|x| C64::new(x, 0.0)))
    }

    /// `P = (d M⁰ + M¹ + √(d²−1) M²) / 2d`.
    fn p_expr(&self, p: &SdpProblem) -> Result<MatrixExpr> {
        let d = self.basis.d as f64;
        let s = self.basis.sqrt_d2m1();
        let mut w = [0.0; 6];
        w[ZERO_IDX] = 0.5;
        w[ONE_IDX] = 0.5 / d;
        w[TWO_IDX] = 0.5 * s / d;
        self.real_combo(p, w)
    }

    /// `Q = (2d(M⁺ + M⁻) + d M⁰ − M¹ − √(d²−1) M²) / 2d`.
    fn q_expr(&self, p: &SdpProblem) -> Result<MatrixExpr> {
        let d = self.basis.d as f64;
        let s = self.basis.sqrt_d2m1();
        let mut w = [0.0; 6];
        w[PLUS] = 1.0;
        w[MINUS] = 1.0;
        w[ZERO_IDX] = 0.5;
        w[ONE_IDX] = -0.5 / d;
        w[TWO_IDX] = -0.5 * s / d;
        self.real_combo(p, w)
    }

    /// Positivity of `M⁺`, `M⁻` and the doubled `M⁰..M³` block.
    fn add_cp_rows(&self, p: &mut SdpProblem) -> Result<()> {
        p.add_psd("M+", self.get(p, PLUS))?;
        if self.basis.has_minus {
            p.add_psd("M-", self.get(p, MINUS))?;
        }
        let block = MatrixExpr::pauli_block(
            &self.get(p, ZERO_IDX),
            &self.get(p, ONE_IDX),
            &self.get(p, TWO_IDX),
            &self.get(p, THREE_IDX),
        )?;
        p.add_psd("[M0..M3] block", block)
    }

    /// PPT rows across both cuts: the `G` family (transpose on `Â`) and the
    /// `E` family (transpose on `Â B̂₁`).
    fn add_ppt_rows(&self, p: &mut SdpProblem) -> Result<()> {
        for (name, t, subs) in [
            ("G", &self.basis.yz_inv, vec![0usize]),
            ("E", &self.basis.yp_inv_y_inv, vec![0usize, 1]),
        ] {
            let coeffs = transfer_coeffs(&self.basis, t);
            let ops: Vec<MatrixExpr> = coeffs
                .iter()
                .map(|w| self.combo(p, *w).and_then(|e| e.ptrans(&subs)))
                .collect::<Result<_>>()?;
            p.add_psd(&format!("{name}+"), ops[PLUS].clone())?;
            if self.basis.has_minus {
                p.add_psd(&format!("{name}-"), ops[MINUS].clone())?;
            }
            let block = MatrixExpr::pauli_block(&ops[ZERO_IDX], &ops[ONE_IDX], &ops[TWO_IDX], &ops[THREE_IDX])?;
            p.add_psd(&format!("[{name}0..{name}3] block"), block)?;
        }
        Ok(())
    }

    /// `X = Tr_{B̂₂}[X] ⊗ I / d_B̂`.
    fn add_no_signal_row(&self, p: &mut SdpProblem, name: &str, x: MatrixExpr) -> Result<()> {
        let db = self.dims[2];
        let avg = x.clone().ptrace(&[2])?.kron_identity(2, db)?.scale(1.0 / db as f64);
        p.add_eq(name, x.sub(avg)?)
    }
}

fn fidelity_objective(p: &mut SdpProblem, vars: &ReducedVars, weight: &LabeledOperator) -> Result<()> {
    let db = vars.dims[2];
    let pe = vars.p_expr(p)?;
    let op = weight.kron(&LabeledOperator::identity(&[db])).scale(1.0 / db as f64);
    let obj = pe.contract(&[0, 1, 2], op.data())?;
    p.set_objective(crate::sdp::model::Sense::Maximize, obj)
}

fn finish(problem: SdpProblem, d: usize, cfg: &SolverConfig) -> Result<BoundResult> {
    let (sol, residuals) = solve_checked(&problem, cfg)?;
    let e_f = sol.value;
    let mut result = BoundResult {
        value: 1.0 - e_f,
        solver: sol,
        reconstruction: None,
        residuals,
        fidelity_weight: Some(e_f),
    };
    result.reconstruction = Some(reconstruct_simulation_channel(&result, d)?);
    Ok(result)
}

fn teleport_parts(rho: &DensityState, d: usize) -> Result<(SdpProblem, ReducedVars)> {
    let [da_hat, db_hat] = rho.dims() else {
        return Err(Error::DimensionMismatch(format!("resource state must be bipartite, got dims {:?}", rho.dims())));
    };
    let mut p = SdpProblem::new();
    let vars = ReducedVars::declare(&mut p, d, *da_hat, *db_hat)?;
    vars.add_cp_rows(&mut p)?;
    let total = vars.real_combo(&p, [1.0, 1.0, 1.0, 0.0, 0.0, 0.0])?;
    let eye = LabeledOperator::identity(&vars.dims);
    p.add_eq("M+ + M- + M0 = I", total.sub(MatrixExpr::constant(&eye))?)?;
    let pe = vars.p_expr(&p)?;
    vars.add_no_signal_row(&mut p, "P = Tr_B̂₂ P ⊗ I / d_B̂", pe)?;
    vars.add_ppt_rows(&mut p)?;
    fidelity_objective(&mut p, &vars, &rho.op().partial_transpose(&[0, 1])?)?;
    Ok((p, vars))
}

/// Reduced problem for teleporting a `d`-dimensional system with `ρ`.
pub fn build_e2pe_teleport_reduced(rho: &DensityState, d: usize) -> Result<SdpProblem> {
    teleport_parts(rho, d).map(|r| r.0)
}

pub fn e2pe_teleport_reduced(rho: &DensityState, d: usize, cfg: &SolverConfig) -> Result<BoundResult> {
    finish(teleport_parts(rho, d)?.0, d, cfg)
}

fn qec_parts(resource: &ChoiChannel, d: usize) -> Result<(SdpProblem, ReducedVars)> {
    let gn = bipartite_choi(resource)?;
    let (da_hat, db_hat) = (resource.in_dim(), resource.out_dim());
    let mut p = SdpProblem::new();
    let vars = ReducedVars::declare(&mut p, d, da_hat, db_hat)?;
    let df = d as f64;
    vars.add_cp_rows(&mut p)?;

    let tr_a = |p: &SdpProblem, w: [f64; 6]| vars.real_combo(p, w).and_then(|e| e.ptrace(&[0]));
    let eye = MatrixExpr::constant(&LabeledOperator::identity(&[db_hat, db_hat]));
    p.add_eq("Tr_Â[M+ + M- + M0] = I", tr_a(&p, [1.0, 1.0, 1.0, 0.0, 0.0, 0.0])?.sub(eye.clone())?)?;

    let pe = vars.p_expr(&p)?;
    vars.add_no_signal_row(&mut p, "P = Tr_B̂₂ P ⊗ I / d_B̂", pe)?;
    let qe = vars.q_expr(&p)?;
    vars.add_no_signal_row(&mut p, "Q = Tr_B̂₂ Q ⊗ I / d_B̂", qe)?;

    // no signalling from Â back to A, written in the reduced variables
    let a = 2.0 / ((df + 2.0) * (df - 1.0));
    let b = 1.0 / (df * (df + 1.0));
    let lhs = tr_a(&p, [a - 2.0 * b, 0.0, -b, -b, 0.0, 0.0])?;
    p.add_eq("A-side no-signalling (+)", lhs)?;
    if vars.basis.has_minus {
        let a = 2.0 / ((df - 2.0) * (df + 1.0));
        let b = 1.0 / (df * (df - 1.0));
        p.add_eq("A-side no-signalling (-)", tr_a(&p, [0.0, a - 2.0 * b, -b, b, 0.0, 0.0])?)?;
    }
    let n = df * (df * df - 1.0);
    let zero_row = tr_a(&p, [1.0 / n, -1.0 / n, 0.5, 1.0 / n, 0.0, 0.0])?.sub(eye.clone().scale(df / n))?;
    p.add_eq("A-side no-signalling (0)", zero_row)?;
    let one_row = tr_a(&p, [-df / n, df / n, 0.0, 0.5 - df / n, 0.0, 0.0])?.add(eye.scale(1.0 / n))?;
    p.add_eq("A-side no-signalling (1)", one_row)?;
    p.add_eq("Tr_Â M2 = 0", tr_a(&p, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0])?)?;
    p.add_eq("Tr_Â M3 = 0", tr_a(&p, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0])?)?;

    vars.add_ppt_rows(&mut p)?;
    fidelity_objective(&mut p, &vars, &gn.partial_transpose(&[0, 1])?)?;
    Ok((p, vars))
}

/// Reduced problem for correcting `resource` into a `d`-dimensional identity.
pub fn build_e2pe_qec_reduced(resource: &ChoiChannel, d: usize) -> Result<SdpProblem> {
    qec_parts(resource, d).map(|r| r.0)
}

pub fn e2pe_qec_reduced(resource: &ChoiChannel, d: usize, cfg: &SolverConfig) -> Result<BoundResult> {
    finish(qec_parts(resource, d)?.0, d, cfg)
}

/// The twirled simulating channel `E_F·id + (1 − E_F)·D` on dimension `d`,
/// where `D` is the randomizing channel.
pub fn reconstruct_simulation_channel(result: &BoundResult, d: usize) -> Result<ChoiChannel> {
    let e_f = result
        .fidelity_weight
        .ok_or_else(|| Error::MissingData("bound carries no identity weight to rebuild a channel from".into()))?
        .clamp(0.0, 1.0);
    let id = ChoiChannel::identity(d);
    let rand = randomizing_channel_choi(d)?;
    let choi = id.choi().scale(e_f).add(&rand.choi().scale(1.0 - e_f))?;
    ChoiChannel::new(choi, vec![d], vec![d])
}

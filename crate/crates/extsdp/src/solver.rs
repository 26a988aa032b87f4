//! Primal-dual interior-point method for block-diagonal real SDPs.
//!
//! The problem is kept in the inequality form of [`LmiProblem`]:
//!
//! ```text
//!   maximize  bᵀy            subject to  S = F₀ + Σ yᵢ Fᵢ ⪰ 0
//!   minimize  ⟨F₀, X⟩        subject to  ⟨Fᵢ, X⟩ = −bᵢ,  X ⪰ 0
//! ```
//!
//! Each iteration takes a Mehrotra predictor-corrector step on the
//! Nesterov–Todd scaled Newton system, starting from an infeasible point.
//! The Schur complement `Mᵢⱼ = ⟨Fᵢ, W Fⱼ W⟩` is formed densely and factored
//! by Cholesky.

use faer::prelude::Solve;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sdp::embed::{embed_real, SparseSym};
use crate::sdp::model::{Assignment, SdpProblem};
use crate::sdp::presolve::{presolve, LmiProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { gap_tol: 1e-8, feas_tol: 1e-8, max_iters: 200, step_fraction: 0.98 }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.gap_tol > 0.0
            && self.feas_tol > 0.0
            && self.max_iters > 0
            && self.step_fraction > 0.0
            && self.step_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid solver configuration {self:?}")))
        }
    }
}

/// `MaxIters` is also returned when the iterates stall before reaching the
/// tolerances; the best iterate seen is reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIters,
    InfeasibleSuspected,
}

/// Raw result on an [`LmiProblem`]. Objectives include the offset.
#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub status: SolverStatus,
    pub y: Vec<f64>,
    /// Primal (`X`) blocks, i.e. the multipliers of the LMI blocks.
    pub x: Vec<DMatrix<f64>>,
    pub s: Vec<DMatrix<f64>>,
    /// `bᵀy + offset`, a lower bound when `y` is feasible.
    pub lower: f64,
    /// `⟨F₀, X⟩ + offset`, an upper bound when `X` is feasible.
    pub upper: f64,
    pub rel_gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub iters: usize,
}

struct BlockTerm {
    block: usize,
    support: Vec<usize>,
    local: DMatrix<f64>,
    mat: SparseSym,
}

struct Scaling {
    g: DMatrix<f64>,
    w: DMatrix<f64>,
    v: Vec<f64>,
}

fn add_sparse(dst: &mut DMatrix<f64>, s: &SparseSym, scale: f64) {
    for &(i, j, v) in &s.entries {
        dst[(i, j)] += scale * v;
        if i != j {
            dst[(j, i)] += scale * v;
        }
    }
}

/// `⟨S, H⟩` for symmetric sparse `S` and dense `H`.
fn sparse_dot(s: &SparseSym, h: &DMatrix<f64>) -> f64 {
    s.entries
        .iter()
        .map(|&(i, j, v)| if i == j { v * h[(i, i)] } else { v * (h[(i, j)] + h[(j, i)]) })
        .sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

fn dense_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Largest `α` with `diag(v) + α D ⪰ 0` (infinite when `D ⪰ 0`).
fn max_step(v: &[f64], d: &DMatrix<f64>) -> f64 {
    let n = v.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let r: Vec<f64> = v.iter().map(|x| 1.0 / x.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (d[(i, j)] + d[(j, i)]) * r[i] * r[j]);
    let lmin = m.symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let n = x.nrows();
    if n == 0 {
        return Some(Scaling { g: DMatrix::zeros(0, 0), w: DMatrix::zeros(0, 0), v: vec![] });
    }
    let l = x.clone().cholesky()?.unpack();
    let mut t = l.transpose() * s * &l;
    symmetrize(&mut t);
    let eig = t.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let v: Vec<f64> = eig.eigenvalues.iter().map(|e| e.sqrt()).collect();
    let mut g = l * eig.eigenvectors;
    for (k, mut col) in g.column_iter_mut().enumerate() {
        col /= v[k].sqrt();
    }
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    Some(Scaling { g, w, v })
}

struct Ipm<'a> {
    lmi: &'a LmiProblem,
    terms: Vec<Vec<BlockTerm>>,
    /// Variables with a coefficient in each block, with the term index.
    by_block: Vec<Vec<(usize, usize)>>,
    f0: Vec<DMatrix<f64>>,
}

impl<'a> Ipm<'a> {
    fn new(lmi: &'a LmiProblem) -> Self {
        let nb = lmi.block_sizes.len();
        let mut by_block = vec![Vec::new(); nb];
        let terms: Vec<Vec<BlockTerm>> = lmi
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, list)| {
                list.iter()
                    .enumerate()
                    .map(|(t, (b, s))| {
                        by_block[*b].push((k, t));
                        let mut support: Vec<usize> = s.entries.iter().flat_map(|e| [e.0, e.1]).collect();
                        support.sort_unstable();
                        support.dedup();
                        let pos = |i: usize| support.binary_search(&i).expect("index in support");
                        let mut local = DMatrix::zeros(support.len(), support.len());
                        for &(i, j, v) in &s.entries {
                            local[(pos(i), pos(j))] += v;
                            if i != j {
                                local[(pos(j), pos(i))] += v;
                            }
                        }
                        BlockTerm { block: *b, support, local, mat: s.clone() }
                    })
                    .collect()
            })
            .collect();
        let f0 = lmi.constant.iter().zip(&lmi.block_sizes).map(|(c, &n)| c.to_dense(n)).collect();
        Self { lmi, terms, by_block, f0 }
    }

    fn n(&self) -> usize {
        self.lmi.n_vars()
    }

    fn slack(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut s = self.f0.clone();
        for (k, list) in self.terms.iter().enumerate() {
            for t in list {
                add_sparse(&mut s[t.block], &t.mat, y[k]);
            }
        }
        s
    }

    /// `⟨Fₖ, H⟩` for every variable.
    fn apply_adjoint(&self, h: &[DMatrix<f64>]) -> Vec<f64> {
        self.terms.iter().map(|list| list.iter().map(|t| sparse_dot(&t.mat, &h[t.block])).sum()).collect()
    }

    fn schur(&self, sc: &[Scaling]) -> faer::Mat<f64> {
        let m = self.n();
        let mut out = faer::Mat::<f64>::zeros(m, m);
        for (b, vars) in self.by_block.iter().enumerate() {
            let w = &sc[b].w;
            for (pos_j, &(j, tj)) in vars.iter().enumerate() {
                let tj = &self.terms[j][tj];
                let a = w.select_columns(tj.support.iter());
                let tmat = (&a * &tj.local) * a.transpose();
                for &(i, ti) in &vars[..=pos_j] {
                    let v = sparse_dot(&self.terms[i][ti].mat, &tmat);
                    out[(i.min(j), i.max(j))] += v;
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }

    /// Solves the Schur system, adding a growing diagonal shift if the
    /// Cholesky factorization breaks down.
    fn factor(&self, mut m: faer::Mat<f64>, iter: usize) -> Result<faer::linalg::solvers::Llt<f64>> {
        let n = m.nrows();
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        for attempt in 0..8 {
            if let Ok(llt) = m.llt(faer::Side::Lower) {
                return Ok(llt);
            }
            let next = scale * 1e-14 * 10f64.powi(attempt);
            for i in 0..n {
                m[(i, i)] += next - shift;
            }
            shift = next;
        }
        Err(Error::Factorization(iter))
    }
}

fn col(v: &[f64]) -> faer::Mat<f64> {
    faer::Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// Solves `lmi` from a cold start.
pub fn solve_lmi(lmi: &LmiProblem, cfg: &SolverConfig) -> Result<LmiSolution> {
    cfg.validate()?;
    let ipm = Ipm::new(lmi);
    let m = ipm.n();
    let nb = lmi.block_sizes.len();
    let n_tot: usize = lmi.block_sizes.iter().sum();
    let b = &lmi.objective;

    let f0_norm = ipm.f0.iter().map(|f| f.norm_squared()).sum::<f64>().sqrt();
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tau = 1.0
        + lmi
            .constant
            .iter()
            .map(SparseSym::max_abs)
            .chain(b.iter().map(|x| x.abs()))
            .fold(0.0, f64::max);

    let mut y = vec![0.0; m];
    let mut x: Vec<DMatrix<f64>> = lmi.block_sizes.iter().map(|&n| DMatrix::identity(n, n) * tau).collect();
    let mut s = x.clone();

    let mut best: Option<(f64, LmiSolution)> = None;
    let mut stalled = 0;
    let mut status = SolverStatus::MaxIters;
    let mut iters = 0;

    loop {
        // residuals at the current iterate
        let sy = ipm.slack(&y);
        let rd: Vec<DMatrix<f64>> = sy.iter().zip(&s).map(|(a, c)| a - c).collect();
        let ax = ipm.apply_adjoint(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi + a).collect();
        let lower = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum::<f64>();
        let upper = ipm.f0.iter().zip(&x).map(|(f, xb)| dense_dot(f, xb)).sum::<f64>();
        let xs: f64 = x.iter().zip(&s).map(|(a, c)| dense_dot(a, c)).sum();
        let mu = if n_tot > 0 { xs / n_tot as f64 } else { 0.0 };
        let rel_gap = (upper - lower).abs() / (1.0 + upper.abs() + lower.abs());
        let pinf = rp.iter().map(|r| r * r).sum::<f64>().sqrt() / (1.0 + b_norm);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + f0_norm);

        let current = || LmiSolution {
            status: SolverStatus::MaxIters,
            y: y.clone(),
            x: x.clone(),
            s: sy.clone(),
            lower: lower + lmi.offset,
            upper: upper + lmi.offset,
            rel_gap,
            primal_infeas: pinf,
            dual_infeas: dinf,
            iters,
        };
        if rel_gap <= cfg.gap_tol && pinf <= cfg.feas_tol && dinf <= cfg.feas_tol {
            status = SolverStatus::Optimal;
            best = Some((0.0, current()));
            break;
        }
        let merit = rel_gap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
            best = Some((merit, current()));
        }
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x_trace: f64 = x.iter().map(|xb| xb.trace()).sum();
        if y_norm > 1e12 * (1.0 + tau) || x_trace > 1e12 * (1.0 + tau) * n_tot.max(1) as f64 {
            status = SolverStatus::InfeasibleSuspected;
            break;
        }
        if iters >= cfg.max_iters || stalled >= 5 {
            if pinf.max(dinf) > cfg.feas_tol.sqrt() {
                status = SolverStatus::InfeasibleSuspected;
            }
            break;
        }
        iters += 1;

        let Some(sc) = x.iter().zip(&s).map(|(a, c)| nt_scaling(a, c)).collect::<Option<Vec<_>>>() else {
            // iterates lost definiteness to rounding
            break;
        };
        let llt = ipm.factor(ipm.schur(&sc), iters)?;

        // rhs and direction for a given scaled complementarity target
        let direction = |rt: &[DMatrix<f64>]| {
            let h: Vec<DMatrix<f64>> = (0..nb)
                .map(|k| {
                    let g = &sc[k].g;
                    let w = &sc[k].w;
                    g * &rt[k] * g.transpose() - w * &rd[k] * w
                })
                .collect();
            let ah = ipm.apply_adjoint(&h);
            let rhs: Vec<f64> = rp.iter().zip(&ah).map(|(r, a)| r + a).collect();
            let sol = llt.solve(col(&rhs));
            let dy: Vec<f64> = (0..m).map(|i| sol[(i, 0)]).collect();
            let mut ds = rd.clone();
            for (k, list) in ipm.terms.iter().enumerate() {
                for t in list {
                    add_sparse(&mut ds[t.block], &t.mat, dy[k]);
                }
            }
            let dst: Vec<DMatrix<f64>> = (0..nb)
                .map(|k| {
                    let g = &sc[k].g;
                    let mut d = g.transpose() * &ds[k] * g;
                    symmetrize(&mut d);
                    d
                })
                .collect();
            let dxt: Vec<DMatrix<f64>> = rt.iter().zip(&dst).map(|(r, d)| r - d).collect();
            (dy, ds, dxt, dst)
        };
        let steps = |dxt: &[DMatrix<f64>], dst: &[DMatrix<f64>]| {
            let ap = (0..nb).map(|k| max_step(&sc[k].v, &dxt[k])).fold(f64::INFINITY, f64::min);
            let ad = (0..nb).map(|k| max_step(&sc[k].v, &dst[k])).fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // predictor
        let rt_aff: Vec<DMatrix<f64>> = sc.iter().map(|c| -DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&c.v))).collect();
        let (_, _, dxt_a, dst_a) = direction(&rt_aff);
        let (ap, ad) = steps(&dxt_a, &dst_a);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for k in 0..nb {
            let vd = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&sc[k].v));
            mu_aff += dense_dot(&(&vd + &dxt_a[k] * ap), &(&vd + &dst_a[k] * ad));
        }
        mu_aff /= n_tot.max(1) as f64;
        let expo = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = if mu > 0.0 { (mu_aff.max(0.0) / mu).powf(expo).clamp(0.0, 1.0) } else { 0.0 };

        // corrector
        let rt: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let v = &sc[k].v;
                let n = v.len();
                let mut cross = &dxt_a[k] * &dst_a[k];
                cross = (&cross + cross.transpose()) * 0.5;
                DMatrix::from_fn(n, n, |i, j| {
                    let mut r = -cross[(i, j)];
                    if i == j {
                        r += sigma * mu - v[i] * v[i];
                    }
                    2.0 * r / (v[i] + v[j])
                })
            })
            .collect();
        let (dy, ds, dxt, dst) = direction(&rt);
        let (ap, ad) = steps(&dxt, &dst);
        let ap = (cfg.step_fraction * ap).min(1.0);
        let ad = (cfg.step_fraction * ad).min(1.0);
        if ap.max(ad) < 1e-9 {
            stalled += 1;
        } else {
            stalled = 0;
        }

        for k in 0..nb {
            let g = &sc[k].g;
            let mut dx = g * &dxt[k] * g.transpose();
            symmetrize(&mut dx);
            x[k] += dx * ap;
            s[k] += &ds[k] * ad;
            symmetrize(&mut s[k]);
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
    }

    let (_, mut sol) = best.expect("at least one iterate is recorded");
    sol.status = status;
    sol.iters = iters;
    Ok(sol)
}

/// Solution of an [`SdpProblem`] in the caller's variables and sense.
#[derive(Clone, Debug)]
pub struct SolverResult {
    pub status: SolverStatus,
    /// Objective at the returned primal assignment.
    pub value: f64,
    /// Interval containing the optimum when both sides are feasible.
    pub bracket: (f64, f64),
    pub assignment: Assignment,
    /// Multipliers of the PSD constraints, by constraint name, in the real
    /// embedded form.
    pub dual: Vec<(String, DMatrix<f64>)>,
    pub gap: f64,
    pub iters: usize,
    /// Largest constraint violation of `assignment`, re-evaluated on the
    /// original complex problem.
    pub max_residual: f64,
    pub n_params: usize,
    pub n_free: usize,
}

/// Lowers, presolves and solves `problem`, then re-checks every constraint at
/// the recovered assignment.
pub fn solve(problem: &SdpProblem, cfg: &SolverConfig) -> Result<SolverResult> {
    let real = embed_real(problem)?;
    let pre = presolve(&real)?;
    let lmi_sol = solve_lmi(&pre.lmi, cfg)?;
    let y = pre.recovery.expand(&lmi_sol.y);
    let assignment = real.layout.assignment(&y)?;
    let max_residual = problem.residuals(&assignment)?.into_iter().map(|r| r.1).fold(0.0, f64::max);
    let value = real.user_value(lmi_sol.lower);
    let other = real.user_value(lmi_sol.upper);
    Ok(SolverResult {
        status: lmi_sol.status,
        value,
        bracket: (value.min(other), value.max(other)),
        assignment,
        dual: pre.block_names.into_iter().zip(lmi_sol.x).collect(),
        gap: lmi_sol.rel_gap,
        iters: lmi_sol.iters,
        max_residual,
        n_params: real.n_params,
        n_free: pre.lmi.n_vars(),
    })
}

//! Lowering of the complex IR to a real SDP over free parameters.
//!
//! Each Hermitian variable is expanded in a real basis (`E_aa`,
//! `E_ab + E_ba`, `i(E_ab − E_ba)`), projected onto its swap-symmetry
//! subspace when it has one. Every constraint then becomes
//! `F₀ + Σ y_p F_p`, with complex Hermitian blocks mapped to the real
//! symmetric embedding `[[X, −Y], [Y, X]]` and equalities split into real
//! and imaginary rows over the upper triangle.

use std::collections::HashSet;
use std::ops::Range;

use super::model::{Assignment, Sense, SdpProblem};
use crate::error::{Error, Result};
use crate::tensor::{permutation_map, CMatrix, LabeledOperator, C64, I, ONE, ZERO};

/// Upper-triangular entries `(i, j, v)`, `i ≤ j`, of a real symmetric matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorts by `(i, j)` and merges duplicates, dropping exact zeros.
    pub fn from_unsorted(mut entries: Vec<(usize, usize, f64)>) -> Self {
        for e in &mut entries {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        Self { entries: out }
    }

    pub fn to_dense(&self, n: usize) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.abs()).fold(0.0, f64::max)
    }
}

/// One linear matrix inequality `F₀ + Σ y_p F_p ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealBlock {
    pub name: String,
    pub size: usize,
    pub constant: SparseSym,
    pub terms: Vec<(usize, SparseSym)>,
}

/// The parameterization of every variable.
#[derive(Clone, Debug)]
pub struct ParamLayout {
    pub ranges: Vec<Range<usize>>,
    pub dims: Vec<Vec<usize>>,
    /// Complex entries of each parameter's basis matrix.
    pub basis: Vec<Vec<(usize, usize, C64)>>,
}

impl ParamLayout {
    pub fn n_params(&self) -> usize {
        self.basis.len()
    }

    /// Rebuilds every variable from a parameter vector.
    pub fn assignment(&self, y: &[f64]) -> Result<Assignment> {
        let mut out = Vec::with_capacity(self.ranges.len());
        for (range, dims) in self.ranges.iter().zip(&self.dims) {
            let side: usize = dims.iter().product();
            let mut m = CMatrix::zeros(side, side);
            for p in range.clone() {
                for &(a, b, v) in &self.basis[p] {
                    m[(a, b)] += v * y[p];
                }
            }
            // the basis is Hermitian by construction; average away rounding
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            out.push(Some(LabeledOperator::new_hermitian(dims.clone(), h)?));
        }
        Ok(out)
    }
}

/// A real SDP: maximize `objective·y + offset` subject to the blocks and
/// `Σ_k rows[r][k] y_k = rhs[r]`.
#[derive(Clone, Debug)]
pub struct RealSdp {
    pub n_params: usize,
    pub blocks: Vec<RealBlock>,
    pub eq_rows: Vec<Vec<(usize, f64)>>,
    pub eq_rhs: Vec<f64>,
    pub objective: Vec<f64>,
    pub offset: f64,
    /// Sense of the original problem. The internal form always maximizes;
    /// a minimization is stored negated.
    pub sense: Sense,
    pub layout: ParamLayout,
}

impl RealSdp {
    /// Converts an internal (maximization) value back to the caller's sense.
    pub fn user_value(&self, internal: f64) -> f64 {
        match self.sense {
            Sense::Maximize => internal,
            Sense::Minimize => -internal,
        }
    }
}

fn hermitian_basis(dims: &[usize], sym: Option<&super::model::SwapSymmetry>, real: bool) -> Result<Vec<Vec<(usize, usize, C64)>>> {
    let n: usize = dims.iter().product();
    let map = match sym {
        Some(s) => Some((permutation_map(dims, &s.perm)?, s.sign)),
        None => None,
    };
    let mut seen: HashSet<Vec<(usize, usize, i64, i64)>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |raw: Vec<(usize, usize, C64)>| {
        let mut entries = raw;
        if let Some((m, sign)) = &map {
            let image: Vec<(usize, usize, C64)> = entries.iter().map(|&(a, b, v)| (m[a], m[b], v * *sign)).collect();
            entries.extend(image);
        }
        let mut dense: Vec<(usize, usize, C64)> = Vec::new();
        entries.sort_by_key(|&(a, b, _)| (a, b));
        for (a, b, v) in entries {
            match dense.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += v,
                _ => dense.push((a, b, v)),
            }
        }
        dense.retain(|e| e.2.norm() > 0.0);
        if dense.is_empty() {
            return;
        }
        // canonical key: rescale so the first entry is positive real
        let first = dense[0].2;
        let phase = first.conj() / first.norm();
        let key: Vec<(usize, usize, i64, i64)> = dense
            .iter()
            .map(|&(a, b, v)| {
                let w = v * phase;
                (a, b, (w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64)
            })
            .collect();
        if seen.insert(key) {
            out.push(dense);
        }
    };
    for a in 0..n {
        push(vec![(a, a, ONE)]);
        for b in a + 1..n {
            push(vec![(a, b, ONE), (b, a, ONE)]);
            if !real {
                push(vec![(a, b, I), (b, a, -I)]);
            }
        }
    }
    Ok(out)
}

/// Constant and per-parameter sparse images of one expression.
struct Lowered {
    side: usize,
    constant: CMatrix,
    /// `(param, row, col, value)` sorted by param then position.
    coeffs: Vec<(usize, usize, usize, C64)>,
}

fn lower_expr(problem: &SdpProblem, layout: &ParamLayout, expr: &super::model::MatrixExpr) -> Result<Lowered> {
    let mut raw: Vec<(usize, usize, usize, C64)> = Vec::new();
    for t in expr.terms() {
        let var = problem.variable(t.var);
        for p in layout.ranges[t.var.0].clone() {
            let mut entries = layout.basis[p].clone();
            let mut dims = var.dims.clone();
            for f in &t.framing {
                entries = f.apply_sparse(&entries, &dims)?;
                dims = f.out_dims(&dims)?;
            }
            raw.extend(entries.into_iter().map(|(a, b, v)| (p, a, b, v * t.coeff)));
        }
    }
    raw.sort_by_key(|&(p, a, b, _)| (p, a, b));
    let mut coeffs: Vec<(usize, usize, usize, C64)> = Vec::with_capacity(raw.len());
    for (p, a, b, v) in raw {
        match coeffs.last_mut() {
            Some(last) if last.0 == p && last.1 == a && last.2 == b => last.3 += v,
            _ => coeffs.push((p, a, b, v)),
        }
    }
    coeffs.retain(|e| e.3.norm() > 1e-15);
    Ok(Lowered { side: expr.side(), constant: expr.constant_part().clone(), coeffs })
}

/// Largest deviation from Hermiticity among the lowered matrices,
/// relative to their scale.
fn hermitian_defect(l: &Lowered) -> f64 {
    let mut worst = (&l.constant - l.constant.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut start = 0;
    while start < l.coeffs.len() {
        let p = l.coeffs[start].0;
        let mut end = start;
        while end < l.coeffs.len() && l.coeffs[end].0 == p {
            end += 1;
        }
        let chunk = &l.coeffs[start..end];
        for &(_, a, b, v) in chunk {
            let partner = chunk
                .binary_search_by_key(&(b, a), |&(_, r, c, _)| (r, c))
                .map(|k| chunk[k].3)
                .unwrap_or(ZERO);
            worst = worst.max((v - partner.conj()).norm());
        }
        start = end;
    }
    worst
}

fn is_real(l: &Lowered) -> bool {
    l.constant.iter().all(|z| z.im.abs() <= 1e-15) && l.coeffs.iter().all(|e| e.3.im.abs() <= 1e-15)
}

/// Upper-triangle real entries of the embedding of one Hermitian entry.
fn embed_entry(a: usize, b: usize, v: C64, n: usize, real: bool, out: &mut Vec<(usize, usize, f64)>) {
    if a > b {
        return;
    }
    if real {
        out.push((a, b, v.re));
        return;
    }
    out.push((a, b, v.re));
    out.push((a + n, b + n, v.re));
    if a != b {
        out.push((a, b + n, -v.im));
        out.push((b, a + n, v.im));
    }
}

pub fn embed_real(problem: &SdpProblem) -> Result<RealSdp> {
    let mut ranges = Vec::new();
    let mut dims = Vec::new();
    let mut basis = Vec::new();
    for v in problem.variables() {
        let b = hermitian_basis(&v.dims, v.symmetry.as_ref(), v.real)?;
        let start = basis.len();
        basis.extend(b);
        ranges.push(start..basis.len());
        dims.push(v.dims.clone());
    }
    let layout = ParamLayout { ranges, dims, basis };
    let n_params = layout.n_params();

    let mut blocks = Vec::new();
    for c in problem.psd_constraints() {
        let l = lower_expr(problem, &layout, &c.expr)?;
        let scale = 1.0 + l.constant.iter().chain(l.coeffs.iter().map(|e| &e.3)).map(|z| z.norm()).fold(0.0, f64::max);
        let defect = hermitian_defect(&l);
        if defect > 1e-12 * scale {
            return Err(Error::Model(format!("constraint `{}` is not Hermitian (defect {defect:e})", c.name)));
        }
        let real = is_real(&l);
        let n = l.side;
        let size = if real { n } else { 2 * n };
        let mut constant = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                let v = l.constant[(i, j)];
                if v != ZERO {
                    embed_entry(i, j, v, n, real, &mut constant);
                }
            }
        }
        let mut terms: Vec<(usize, SparseSym)> = Vec::new();
        let mut start = 0;
        while start < l.coeffs.len() {
            let p = l.coeffs[start].0;
            let mut entries = Vec::new();
            while start < l.coeffs.len() && l.coeffs[start].0 == p {
                let (_, a, b, v) = l.coeffs[start];
                embed_entry(a, b, v, n, real, &mut entries);
                start += 1;
            }
            let s = SparseSym::from_unsorted(entries);
            if !s.is_empty() {
                terms.push((p, s));
            }
        }
        blocks.push(RealBlock { name: c.name.clone(), size, constant: SparseSym::from_unsorted(constant), terms });
    }

    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();
    for c in problem.eq_constraints() {
        let l = lower_expr(problem, &layout, &c.expr)?;
        let scale = 1.0 + l.coeffs.iter().map(|e| e.3.norm()).fold(0.0, f64::max);
        let defect = hermitian_defect(&l);
        if defect > 1e-12 * scale {
            return Err(Error::Model(format!("equality `{}` is not Hermitian (defect {defect:e})", c.name)));
        }
        let n = l.side;
        // (row-major position, is_imag) → coefficients
        let mut by_pos: Vec<(usize, bool, usize, f64)> = Vec::new();
        for &(p, a, b, v) in &l.coeffs {
            if a <= b {
                by_pos.push((a * n + b, false, p, v.re));
                if a < b {
                    by_pos.push((a * n + b, true, p, v.im));
                }
            }
        }
        by_pos.sort_by_key(|&(pos, im, p, _)| (pos, im, p));
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                for im in [false, true] {
                    if im && a == b {
                        continue;
                    }
                    let pos = a * n + b;
                    let mut row = Vec::new();
                    while k < by_pos.len() && (by_pos[k].0, by_pos[k].1) == (pos, im) {
                        if by_pos[k].3 != 0.0 {
                            row.push((by_pos[k].2, by_pos[k].3));
                        }
                        k += 1;
                    }
                    let c0 = l.constant[(a, b)];
                    let rhs = -if im { c0.im } else { c0.re };
                    if row.is_empty() && rhs == 0.0 {
                        continue;
                    }
                    eq_rows.push(row);
                    eq_rhs.push(rhs);
                }
            }
        }
    }

    let (sense, obj) = problem.objective().ok_or_else(|| Error::Model("problem has no objective".into()))?;
    let l = lower_expr(problem, &layout, obj)?;
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut objective = vec![0.0; n_params];
    for &(p, _, _, v) in &l.coeffs {
        objective[p] += sign * v.re;
    }
    let offset = sign * l.constant[(0, 0)].re;

    Ok(RealSdp { n_params, blocks, eq_rows, eq_rhs, objective, offset, sense: *sense, layout })
}

/// Dense complex matrix of a lowered PSD block, for tests.
#[cfg(test)]
pub(crate) fn block_value(block: &RealBlock, y: &[f64]) -> nalgebra::DMatrix<f64> {
    let mut m = block.constant.to_dense(block.size);
    for (p, s) in &block.terms {
        m += s.to_dense(block.size) * y[*p];
    }
    m
}

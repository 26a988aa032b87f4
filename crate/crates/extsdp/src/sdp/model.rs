//! Complex SDP intermediate representation.
//!
//! Variables are Hermitian matrices on labelled subsystems. Constraints and
//! the objective are affine matrix expressions: a constant plus terms
//! `coeff · f_k(...f_1(X))` where each `f` is a linear framing map such as a
//! partial trace. The same framing chain is applied densely by
//! [`SdpProblem::evaluate`] and to sparse basis elements by the lowering in
//! [`super::embed`].

use crate::error::{Error, Result};
use crate::tensor::{flat_index, CMatrix, LabeledOperator, TraceMode, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// `X = sign · P X P†` for the subsystem permutation `perm`, which must be
/// an involution.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapSymmetry {
    pub perm: Vec<usize>,
    pub sign: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpVariable {
    pub name: String,
    pub dims: Vec<usize>,
    pub symmetry: Option<SwapSymmetry>,
    /// Restricted to real symmetric matrices.
    pub real: bool,
}

impl SdpVariable {
    pub fn side(&self) -> usize {
        self.dims.iter().product()
    }
}

/// A linear map applied to a variable (or constant) inside an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Framing {
    PartialTranspose(Vec<usize>),
    /// Traces out the listed subsystems.
    PartialTrace(Vec<usize>),
    /// Output subsystem `k` is input subsystem `perm[k]`.
    Permute(Vec<usize>),
    /// Inserts `I_dim` so that it becomes subsystem `position`.
    TensorIdentity { position: usize, dim: usize },
    /// `X ↦ Tr_S[(op_S ⊗ I) X]`, with `op` ordered like `subsystems`.
    ContractWith { subsystems: Vec<usize>, op: CMatrix },
    /// `X ↦ |row⟩⟨col| ⊗ X`, prepending a subsystem of dimension `grid`.
    Block { grid: usize, row: usize, col: usize },
    /// Regroups subsystems without touching the data.
    Reshape(Vec<usize>),
    /// `X ↦ ½(L X R + R† X L†)` onto an operator with `out_dims`.
    HermitianPart { left: CMatrix, right: CMatrix, out_dims: Vec<usize> },
}

fn check_subsystems(subs: &[usize], dims: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    for &s in subs {
        if s >= dims.len() {
            return Err(Error::IndexOutOfRange { index: s, len: dims.len() });
        }
        if seen[s] {
            return Err(Error::Model(format!("subsystem {s} listed twice")));
        }
        seen[s] = true;
    }
    Ok(())
}

impl Framing {
    /// Output dims, or an error when the framing does not fit `dims`.
    pub fn out_dims(&self, dims: &[usize]) -> Result<Vec<usize>> {
        match self {
            Framing::PartialTranspose(s) => {
                check_subsystems(s, dims)?;
                Ok(dims.to_vec())
            }
            Framing::PartialTrace(s) => {
                check_subsystems(s, dims)?;
                let kept: Vec<usize> = (0..dims.len()).filter(|k| !s.contains(k)).map(|k| dims[k]).collect();
                Ok(if kept.is_empty() { vec![1] } else { kept })
            }
            Framing::Permute(p) => {
                crate::tensor::permutation_map(dims, p)?;
                Ok(p.iter().map(|&k| dims[k]).collect())
            }
            Framing::TensorIdentity { position, dim } => {
                if *position > dims.len() || *dim == 0 {
                    return Err(Error::Model(format!("cannot insert I_{dim} at position {position}")));
                }
                let mut out = dims.to_vec();
                out.insert(*position, *dim);
                Ok(out)
            }
            Framing::ContractWith { subsystems, op } => {
                check_subsystems(subsystems, dims)?;
                let side: usize = subsystems.iter().map(|&s| dims[s]).product();
                if op.nrows() != side || op.ncols() != side {
                    return Err(Error::DimensionMismatch(format!("contraction operator must be {side}x{side}")));
                }
                let kept: Vec<usize> = (0..dims.len()).filter(|k| !subsystems.contains(k)).map(|k| dims[k]).collect();
                Ok(if kept.is_empty() { vec![1] } else { kept })
            }
            Framing::Block { grid, row, col } => {
                if row >= grid || col >= grid {
                    return Err(Error::Model(format!("block ({row}, {col}) outside a {grid}x{grid} grid")));
                }
                let mut out = vec![*grid];
                out.extend_from_slice(dims);
                Ok(out)
            }
            Framing::HermitianPart { left, right, out_dims } => {
                let side: usize = dims.iter().product();
                let out: usize = out_dims.iter().product();
                if left.ncols() != side || right.nrows() != side || left.nrows() != out || right.ncols() != out {
                    return Err(Error::DimensionMismatch(format!(
                        "congruence factors {}x{} and {}x{} do not map side {side} to {out_dims:?}",
                        left.nrows(),
                        left.ncols(),
                        right.nrows(),
                        right.ncols()
                    )));
                }
                Ok(out_dims.clone())
            }
            Framing::Reshape(new) => {
                if new.is_empty() || new.iter().product::<usize>() != dims.iter().product::<usize>() {
                    return Err(Error::DimensionMismatch(format!("cannot reshape {dims:?} as {new:?}")));
                }
                Ok(new.clone())
            }
        }
    }

    /// Applies the map to a dense operator using the tensor routines.
    pub fn apply_dense(&self, x: &LabeledOperator) -> Result<LabeledOperator> {
        match self {
            Framing::PartialTranspose(s) => x.partial_transpose(s),
            Framing::PartialTrace(s) => x.partial_trace(s, TraceMode::Drop),
            Framing::Permute(p) => x.permute_subsystems(p),
            Framing::TensorIdentity { position, dim } => {
                let n = x.dims().len();
                let widened = x.kron(&LabeledOperator::identity(&[*dim]));
                // move the new trailing factor into place
                let mut perm: Vec<usize> = (0..n).collect();
                perm.insert(*position, n);
                widened.permute_subsystems(&perm)
            }
            Framing::ContractWith { subsystems, op } => {
                let dims = x.dims();
                let out_dims = self.out_dims(dims)?;
                let n = dims.len();
                let rest: Vec<usize> = (0..n).filter(|k| !subsystems.contains(k)).collect();
                let mut front = subsystems.clone();
                front.extend_from_slice(&rest);
                let moved = x.permute_subsystems(&front)?;
                let dop: usize = subsystems.iter().map(|&s| dims[s]).product();
                let drest = x.side() / dop;
                let prod = op.kronecker(&CMatrix::identity(drest, drest)) * moved.data();
                let mut pdims = vec![dop];
                pdims.push(drest);
                let traced = LabeledOperator::new(pdims, prod)?.partial_trace(&[0], TraceMode::Drop)?;
                LabeledOperator::new(out_dims, traced.into_data())
            }
            Framing::Block { grid, row, col } => {
                let mut e = CMatrix::zeros(*grid, *grid);
                e[(*row, *col)] = ONE;
                let e = LabeledOperator::new(vec![*grid], e)?;
                Ok(e.kron(x))
            }
            Framing::Reshape(new) => x.clone().relabel(new.clone()),
            Framing::HermitianPart { left, right, .. } => {
                let out_dims = self.out_dims(x.dims())?;
                let y = left * x.data() * right;
                LabeledOperator::new(out_dims, (&y + y.adjoint()) * C64::new(0.5, 0.0))
            }
        }
    }

    /// Applies the map to a sparse list of `(row, col, value)` entries.
    pub(crate) fn apply_sparse(&self, entries: &[(usize, usize, C64)], dims: &[usize]) -> Result<Vec<(usize, usize, C64)>> {
        let out_dims = self.out_dims(dims)?;
        let digits = |f: usize| -> Vec<usize> {
            let mut f = f;
            let mut d = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                d[k] = f % dims[k];
                f /= dims[k];
            }
            d
        };
        let mut out = Vec::with_capacity(entries.len());
        match self {
            Framing::PartialTranspose(s) => {
                for &(a, b, v) in entries {
                    let (mut da, mut db) = (digits(a), digits(b));
                    for &k in s {
                        std::mem::swap(&mut da[k], &mut db[k]);
                    }
                    out.push((flat_index(&da, dims), flat_index(&db, dims), v));
                }
            }
            Framing::PartialTrace(s) => {
                let keep: Vec<usize> = (0..dims.len()).filter(|k| !s.contains(k)).collect();
                let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
                for &(a, b, v) in entries {
                    let (da, db) = (digits(a), digits(b));
                    if s.iter().all(|&k| da[k] == db[k]) {
                        let ka: Vec<usize> = keep.iter().map(|&k| da[k]).collect();
                        let kb: Vec<usize> = keep.iter().map(|&k| db[k]).collect();
                        out.push((flat_index(&ka, &kdims), flat_index(&kb, &kdims), v));
                    }
                }
            }
            Framing::Permute(p) => {
                let map = crate::tensor::permutation_map(dims, p)?;
                out.extend(entries.iter().map(|&(a, b, v)| (map[a], map[b], v)));
            }
            Framing::TensorIdentity { position, dim } => {
                for &(a, b, v) in entries {
                    let (da, db) = (digits(a), digits(b));
                    for k in 0..*dim {
                        let mut na = da.clone();
                        let mut nb = db.clone();
                        na.insert(*position, k);
                        nb.insert(*position, k);
                        out.push((flat_index(&na, &out_dims), flat_index(&nb, &out_dims), v));
                    }
                }
            }
            Framing::ContractWith { subsystems, op } => {
                let keep: Vec<usize> = (0..dims.len()).filter(|k| !subsystems.contains(k)).collect();
                let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
                let sdims: Vec<usize> = subsystems.iter().map(|&k| dims[k]).collect();
                for &(a, b, v) in entries {
                    let (da, db) = (digits(a), digits(b));
                    let sa: Vec<usize> = subsystems.iter().map(|&k| da[k]).collect();
                    let sb: Vec<usize> = subsystems.iter().map(|&k| db[k]).collect();
                    let w = op[(flat_index(&sb, &sdims), flat_index(&sa, &sdims))];
                    if w != ZERO {
                        let ka: Vec<usize> = keep.iter().map(|&k| da[k]).collect();
                        let kb: Vec<usize> = keep.iter().map(|&k| db[k]).collect();
                        out.push((flat_index(&ka, &kdims), flat_index(&kb, &kdims), v * w));
                    }
                }
            }
            Framing::Block { row, col, .. } => {
                let side: usize = dims.iter().product();
                out.extend(entries.iter().map(|&(a, b, v)| (row * side + a, col * side + b, v)));
            }
            Framing::Reshape(_) => out.extend_from_slice(entries),
            Framing::HermitianPart { left, right, .. } => {
                let n = left.nrows();
                let mut y = CMatrix::zeros(n, n);
                for &(a, b, v) in entries {
                    for i in 0..n {
                        let la = left[(i, a)] * v;
                        if la == ZERO {
                            continue;
                        }
                        for j in 0..n {
                            y[(i, j)] += la * right[(b, j)];
                        }
                    }
                }
                let h = (&y + y.adjoint()) * C64::new(0.5, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        if h[(i, j)] != ZERO {
                            out.push((i, j, h[(i, j)]));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub var: VarId,
    pub framing: Vec<Framing>,
}

/// `constant + Σ coeff · framing(var)`, all terms sharing `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixExpr {
    dims: Vec<usize>,
    constant: CMatrix,
    terms: Vec<Term>,
}

impl MatrixExpr {
    pub fn constant(op: &LabeledOperator) -> Self {
        Self { dims: op.dims().to_vec(), constant: op.data().clone(), terms: Vec::new() }
    }

    pub fn zero(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        Self { dims: dims.to_vec(), constant: CMatrix::zeros(side, side), terms: Vec::new() }
    }

    /// `c · I` on a single subsystem of dimension `dim`.
    pub fn scalar_identity(dim: usize, c: f64) -> Self {
        Self::constant(&LabeledOperator::identity(&[dim]).scale(c))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.constant.nrows()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn constant_part(&self) -> &CMatrix {
        &self.constant
    }

    pub fn frame(mut self, f: Framing) -> Result<Self> {
        let dims = f.out_dims(&self.dims)?;
        let c = LabeledOperator::new(self.dims.clone(), self.constant)?;
        self.constant = f.apply_dense(&c)?.into_data();
        for t in &mut self.terms {
            t.framing.push(f.clone());
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn ptrans(self, subsystems: &[usize]) -> Result<Self> {
        self.frame(Framing::PartialTranspose(subsystems.to_vec()))
    }

    pub fn ptrace(self, subsystems: &[usize]) -> Result<Self> {
        self.frame(Framing::PartialTrace(subsystems.to_vec()))
    }

    pub fn permute(self, perm: &[usize]) -> Result<Self> {
        self.frame(Framing::Permute(perm.to_vec()))
    }

    pub fn kron_identity(self, position: usize, dim: usize) -> Result<Self> {
        self.frame(Framing::TensorIdentity { position, dim })
    }

    pub fn contract(self, subsystems: &[usize], op: &CMatrix) -> Result<Self> {
        self.frame(Framing::ContractWith { subsystems: subsystems.to_vec(), op: op.clone() })
    }

    pub fn block(self, grid: usize, row: usize, col: usize) -> Result<Self> {
        self.frame(Framing::Block { grid, row, col })
    }

    /// Relabels subsystems without moving data (e.g. `[4]` as `[2, 2]`).
    pub fn relabel(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.side() {
            return Err(Error::DimensionMismatch(format!("cannot relabel side {} as {:?}", self.side(), dims)));
        }
        if !self.terms.is_empty() {
            // later framings address subsystems, so the terms must see the new grouping
            return self.frame(Framing::Reshape(dims));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn scale(self, c: f64) -> Self {
        self.scale_complex(C64::new(c, 0.0))
    }

    pub fn scale_complex(mut self, c: C64) -> Self {
        self.constant *= c;
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn add(mut self, other: Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("adding {:?} to {:?}", other.dims, self.dims)));
        }
        self.constant += other.constant;
        self.terms.extend(other.terms);
        Ok(self)
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.add(other.scale(-1.0))
    }

    pub fn add_constant(self, op: &LabeledOperator) -> Result<Self> {
        let c = Self::constant(op);
        self.add(c)
    }

    /// Linear combination `Σ c_k e_k` of expressions with equal dims.
    pub fn combination(parts: Vec<(C64, MatrixExpr)>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let (c0, e0) = iter.next().ok_or_else(|| Error::Model("empty combination".into()))?;
        iter.try_fold(e0.scale_complex(c0), |acc, (c, e)| acc.add(e.scale_complex(c)))
    }

    /// `[[a + e, b − i c], [b + i c, a − e]]`, the doubled block that is
    /// positive exactly when `a ⊗ σ⁰ + b ⊗ σ¹ + c ⊗ σ² + e ⊗ σ³` is.
    pub fn pauli_block(a: &Self, b: &Self, c: &Self, e: &Self) -> Result<Self> {
        let top_left = a.clone().add(e.clone())?.block(2, 0, 0)?;
        let bottom_right = a.clone().sub(e.clone())?.block(2, 1, 1)?;
        let top_right = b.clone().sub(c.clone().scale_complex(I))?.block(2, 0, 1)?;
        let bottom_left = b.clone().add(c.clone().scale_complex(I))?.block(2, 1, 0)?;
        top_left.add(bottom_right)?.add(top_right)?.add(bottom_left)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct NamedExpr {
    pub name: String,
    pub expr: MatrixExpr,
}

/// Hermitian variables, `expr ⪰ 0` and `expr = 0` constraints and a real
/// objective `Re expr` on a 1×1 expression.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub(crate) vars: Vec<SdpVariable>,
    pub(crate) psd: Vec<NamedExpr>,
    pub(crate) eq: Vec<NamedExpr>,
    pub(crate) objective: Option<(Sense, MatrixExpr)>,
}

/// Values for every variable, indexed by [`VarId`].
pub type Assignment = Vec<Option<LabeledOperator>>;

impl Default for SdpProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl SdpProblem {
    pub fn new() -> Self {
        Self { vars: Vec::new(), psd: Vec::new(), eq: Vec::new(), objective: None }
    }

    pub fn add_variable(&mut self, name: &str, dims: &[usize], symmetry: Option<SwapSymmetry>) -> Result<VarId> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Model(format!("variable `{name}` has invalid dims {dims:?}")));
        }
        if let Some(sym) = &symmetry {
            let map = crate::tensor::permutation_map(dims, &sym.perm)?;
            if sym.perm.iter().map(|&p| dims[p]).ne(dims.iter().copied()) {
                return Err(Error::Model(format!("symmetry of `{name}` changes the subsystem dims")));
            }
            if map.iter().enumerate().any(|(i, &j)| map[j] != i) {
                return Err(Error::Model(format!("symmetry permutation of `{name}` is not an involution")));
            }
            if sym.sign != 1.0 && sym.sign != -1.0 {
                return Err(Error::Model(format!("symmetry sign of `{name}` must be ±1")));
            }
        }
        self.vars.push(SdpVariable { name: name.to_string(), dims: dims.to_vec(), symmetry, real: false });
        Ok(VarId(self.vars.len() - 1))
    }

    /// Like [`add_variable`](Self::add_variable) but real symmetric. When all
    /// problem data is real, conjugating an optimal point gives another one,
    /// so their average is a real optimum and nothing is lost.
    pub fn add_real_variable(&mut self, name: &str, dims: &[usize], symmetry: Option<SwapSymmetry>) -> Result<VarId> {
        let id = self.add_variable(name, dims, symmetry)?;
        self.vars[id.0].real = true;
        Ok(id)
    }

    pub fn variables(&self) -> &[SdpVariable] {
        &self.vars
    }

    pub fn variable(&self, id: VarId) -> &SdpVariable {
        &self.vars[id.0]
    }

    /// The expression consisting of the bare variable.
    pub fn var(&self, id: VarId) -> MatrixExpr {
        let v = &self.vars[id.0];
        let side = v.side();
        MatrixExpr {
            dims: v.dims.clone(),
            constant: CMatrix::zeros(side, side),
            terms: vec![Term { coeff: ONE, var: id, framing: Vec::new() }],
        }
    }

    fn check_expr(&self, expr: &MatrixExpr) -> Result<()> {
        for t in &expr.terms {
            if t.var.0 >= self.vars.len() {
                return Err(Error::Model(format!("undeclared variable #{}", t.var.0)));
            }
        }
        Ok(())
    }

    pub fn add_psd(&mut self, name: &str, expr: MatrixExpr) -> Result<()> {
        self.check_expr(&expr)?;
        self.psd.push(NamedExpr { name: name.to_string(), expr });
        Ok(())
    }

    pub fn add_eq(&mut self, name: &str, expr: MatrixExpr) -> Result<()> {
        self.check_expr(&expr)?;
        self.eq.push(NamedExpr { name: name.to_string(), expr });
        Ok(())
    }

    /// Objective `Re expr`, where `expr` must be 1×1.
    pub fn set_objective(&mut self, sense: Sense, expr: MatrixExpr) -> Result<()> {
        self.check_expr(&expr)?;
        if expr.side() != 1 {
            return Err(Error::Model("objective must be a 1x1 expression".into()));
        }
        self.objective = Some((sense, expr));
        Ok(())
    }

    pub fn psd_constraints(&self) -> &[NamedExpr] {
        &self.psd
    }

    pub fn eq_constraints(&self) -> &[NamedExpr] {
        &self.eq
    }

    pub fn objective(&self) -> Option<&(Sense, MatrixExpr)> {
        self.objective.as_ref()
    }

    pub fn evaluate(&self, expr: &MatrixExpr, assignment: &Assignment) -> Result<LabeledOperator> {
        let mut acc = LabeledOperator::new(expr.dims.clone(), expr.constant.clone())?;
        for t in &expr.terms {
            let var = &self.vars[t.var.0];
            let mut x = assignment
                .get(t.var.0)
                .and_then(|a| a.as_ref())
                .ok_or_else(|| Error::MissingAssignment(var.name.clone()))?
                .clone();
            if x.dims() != var.dims.as_slice() {
                x = x.relabel(var.dims.clone())?;
            }
            for f in &t.framing {
                x = f.apply_dense(&x)?;
            }
            acc = acc.add(&x.scale_complex(t.coeff).relabel(expr.dims.clone())?)?;
        }
        Ok(acc)
    }

    /// Value of the objective functional at an assignment.
    pub fn evaluate_objective(&self, assignment: &Assignment) -> Result<f64> {
        let (_, expr) = self.objective.as_ref().ok_or_else(|| Error::Model("no objective".into()))?;
        Ok(self.evaluate(expr, assignment)?.data()[(0, 0)].re)
    }

    /// Per-constraint residuals at an assignment: `max(0, −λ_min)` for
    /// PSD rows and the largest entry for equality rows.
    pub fn residuals(&self, assignment: &Assignment) -> Result<Vec<(String, f64)>> {
        let mut out = Vec::with_capacity(self.psd.len() + self.eq.len());
        for c in &self.psd {
            let v = self.evaluate(&c.expr, assignment)?;
            let h = hermitize(&v)?;
            out.push((c.name.clone(), (-h.min_eigenvalue()?).max(0.0)));
        }
        for c in &self.eq {
            out.push((c.name.clone(), self.evaluate(&c.expr, assignment)?.max_abs()));
        }
        Ok(out)
    }
}

/// Averages `x` with its adjoint, for residual checks on expressions that
/// are Hermitian up to rounding.
pub(crate) fn hermitize(x: &LabeledOperator) -> Result<LabeledOperator> {
    let h = (x.data() + x.data().adjoint()) * C64::new(0.5, 0.0);
    LabeledOperator::new_hermitian(x.dims().to_vec(), h)
}

/// Dense expansion of sparse entries on a square matrix of side `n`.
#[cfg(test)]
pub(crate) fn densify(entries: &[(usize, usize, C64)], n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for &(a, b, v) in entries {
        m[(a, b)] += v;
    }
    m
}

/// Nonzero entries of a dense matrix.
#[cfg(test)]
pub(crate) fn sparsify(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                out.push((i, j, m[(i, j)]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ginibre;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_op(dims: &[usize], seed: u64) -> LabeledOperator {
        let side = dims.iter().product();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        LabeledOperator::new(dims.to_vec(), ginibre(side, side, &mut rng)).unwrap()
    }

    fn framings() -> Vec<(Vec<usize>, Framing)> {
        let mut op = CMatrix::zeros(6, 6);
        op[(0, 1)] = C64::new(0.5, -1.0);
        op[(4, 2)] = C64::new(2.0, 0.0);
        op[(5, 5)] = C64::new(-1.0, 0.25);
        vec![
            (vec![2, 3, 2], Framing::PartialTranspose(vec![0, 2])),
            (vec![2, 3, 2], Framing::PartialTrace(vec![1])),
            (vec![2, 3, 2], Framing::PartialTrace(vec![0, 1, 2])),
            (vec![2, 3, 2], Framing::Permute(vec![2, 0, 1])),
            (vec![2, 3], Framing::TensorIdentity { position: 1, dim: 2 }),
            (vec![2, 3], Framing::TensorIdentity { position: 2, dim: 3 }),
            (vec![2, 3, 2], Framing::ContractWith { subsystems: vec![2, 1], op }),
            (vec![2, 3], Framing::Block { grid: 2, row: 1, col: 0 }),
            (
                vec![6],
                Framing::HermitianPart {
                    left: ginibre(4, 6, &mut ChaCha20Rng::seed_from_u64(7)),
                    right: ginibre(6, 4, &mut ChaCha20Rng::seed_from_u64(8)),
                    out_dims: vec![2, 2],
                },
            ),
        ]
    }

    #[test]
    fn sparse_and_dense_framings_agree() {
        for (k, (dims, f)) in framings().into_iter().enumerate() {
            let x = random_op(&dims, k as u64);
            let dense = f.apply_dense(&x).unwrap();
            let sparse = f.apply_sparse(&sparsify(x.data()), &dims).unwrap();
            let out_dims = f.out_dims(&dims).unwrap();
            assert_eq!(dense.dims(), out_dims.as_slice(), "{f:?}");
            let side = out_dims.iter().product();
            let diff = (densify(&sparse, side) - dense.data()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "{f:?}: {diff}");
        }
    }

    #[test]
    fn tensor_identity_position() {
        let x = random_op(&[2, 3], 1);
        let f = Framing::TensorIdentity { position: 0, dim: 2 };
        let expect = LabeledOperator::identity(&[2]).kron(&x);
        assert!(f.apply_dense(&x).unwrap().max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn contraction_is_weighted_trace() {
        let x = random_op(&[2, 3], 2);
        let op = random_op(&[2], 3);
        let f = Framing::ContractWith { subsystems: vec![0], op: op.data().clone() };
        let expect = op.kron(&LabeledOperator::identity(&[3])).matmul(&x).unwrap().partial_trace(&[0], TraceMode::Drop).unwrap();
        assert!(f.apply_dense(&x).unwrap().max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn evaluate_constant_and_identity_framing() {
        let mut p = SdpProblem::new();
        let v = p.add_variable("X", &[2], None).unwrap();
        let c = LabeledOperator::diag(&[1.0, 2.0]);
        let assignment = vec![Some(LabeledOperator::diag(&[3.0, -1.0]))];
        assert_eq!(p.evaluate(&MatrixExpr::constant(&c), &assignment).unwrap().data(), c.data());
        let got = p.evaluate(&p.var(v), &assignment).unwrap();
        assert!(got.max_abs_diff(&LabeledOperator::diag(&[3.0, -1.0])).unwrap() == 0.0);
        assert!(matches!(p.evaluate(&p.var(v), &vec![None]), Err(Error::MissingAssignment(_))));
    }

    #[test]
    fn pauli_block_layout() {
        let mut p = SdpProblem::new();
        let ids: Vec<VarId> = (0..4).map(|k| p.add_variable(&format!("m{k}"), &[1], None).unwrap()).collect();
        let e: Vec<MatrixExpr> = ids.iter().map(|&v| p.var(v)).collect();
        let blk = MatrixExpr::pauli_block(&e[0], &e[1], &e[2], &e[3]).unwrap();
        let vals = [2.0, 0.5, 0.25, 1.0];
        let a: Assignment = vals.iter().map(|&v| Some(LabeledOperator::diag(&[v]))).collect();
        let m = p.evaluate(&blk, &a).unwrap();
        assert_eq!(m.data()[(0, 0)], C64::new(3.0, 0.0));
        assert_eq!(m.data()[(0, 1)], C64::new(0.5, -0.25));
        assert_eq!(m.data()[(1, 0)], C64::new(0.5, 0.25));
        assert_eq!(m.data()[(1, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn symmetry_must_be_involution() {
        let mut p = SdpProblem::new();
        let bad = SwapSymmetry { perm: vec![1, 2, 0], sign: 1.0 };
        assert!(p.add_variable("X", &[2, 2, 2], Some(bad)).is_err());
        let mixed = SwapSymmetry { perm: vec![1, 0], sign: 1.0 };
        assert!(p.add_variable("Y", &[2, 3], Some(mixed)).is_err());
        let good = SwapSymmetry { perm: vec![0, 2, 1], sign: -1.0 };
        assert!(p.add_variable("Z", &[2, 2, 2], Some(good)).is_ok());
    }
}

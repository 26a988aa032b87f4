//! Dense operators on multipartite tensor-product spaces.
//!
//! Subsystems are indexed from 0, leftmost first, in the same order as the
//! Kronecker product that built the space. Basis index `(i_0, ..., i_{k-1})`
//! maps to the row-major flat index with `i_0` most significant.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Entrywise tolerance for the `hermitian` flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Which subsystems a partial trace refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// The listed subsystems survive.
    Keep,
    /// The listed subsystems are traced out.
    Drop,
}

/// A square complex matrix tagged with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledOperator {
    dims: Vec<usize>,
    data: CMatrix,
    hermitian: bool,
}

impl LabeledOperator {
    pub fn new(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        check_dims(&dims)?;
        let side: usize = dims.iter().product();
        if data.nrows() != side || data.ncols() != side {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} need a {side}x{side} matrix, got {}x{}",
                dims,
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { dims, data, hermitian: false })
    }

    /// Builds an operator and sets the `hermitian` flag, failing when the
    /// data deviates from its adjoint by more than [`HERMITIAN_TOL`].
    pub fn new_hermitian(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        let mut op = Self::new(dims, data)?;
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn identity(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        Self { dims: dims.to_vec(), data: CMatrix::identity(side, side), hermitian: true }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        Self { dims: dims.to_vec(), data: CMatrix::zeros(side, side), hermitian: true }
    }

    /// Real diagonal operator on a single subsystem.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let data = CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO });
        Self { dims: vec![n], data, hermitian: true }
    }

    /// Single-subsystem operator from row-major complex entries.
    pub fn from_rows(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} entries for a {n}x{n} matrix", entries.len())));
        }
        Self::new(vec![n], CMatrix::from_row_slice(n, n, entries))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.side();
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Re-checks Hermiticity and sets the flag.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new_hermitian(self.dims, self.data)
    }

    /// Replaces the subsystem labelling of the same matrix.
    pub fn relabel(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        if dims.iter().product::<usize>() != self.side() {
            return Err(Error::DimensionMismatch(format!("cannot relabel side {} as {:?}", self.side(), dims)));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), data: self.data.adjoint(), hermitian: self.hermitian }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dims: self.dims.clone(), data: &self.data * C64::new(c, 0.0), hermitian: self.hermitian }
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        Self { dims: self.dims.clone(), data: &self.data * c, hermitian: self.hermitian && c.im == 0.0 }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            data: &self.data + &other.data,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            data: &self.data - &other.data,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// `self · other` on the same space.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        Ok(Self { dims: self.dims.clone(), data: &self.data * &other.data, hermitian: false })
    }

    /// `u · self · u†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.side() || u.ncols() != self.side() {
            return Err(Error::DimensionMismatch("conjugating unitary has wrong side".into()));
        }
        Ok(Self { dims: self.dims.clone(), data: u * &self.data * u.adjoint(), hermitian: self.hermitian })
    }

    /// Hilbert–Schmidt inner product `Tr[self† other]`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.same_dims(other)?;
        Ok(self.data.iter().zip(other.data.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self.data.iter().zip(other.data.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, data: self.data.kronecker(&other.data), hermitian: self.hermitian && other.hermitian }
    }

    pub fn partial_trace(&self, subsystems: &[usize], mode: TraceMode) -> Result<Self> {
        partial_trace(self, subsystems, mode)
    }

    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<Self> {
        partial_transpose(self, subsystems)
    }

    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        permute_subsystems(self, perm)
    }

    /// Sorted eigenvalues of the Hermitian operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(self)
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("zero subsystem dimension in {dims:?}")));
    }
    Ok(())
}

fn check_indices(subsystems: &[usize], len: usize) -> Result<()> {
    for &s in subsystems {
        if s >= len {
            return Err(Error::IndexOutOfRange { index: s, len });
        }
    }
    Ok(())
}

/// Digit expansion of every flat index of a space with the given dims.
pub(crate) fn digit_table(dims: &[usize]) -> Vec<Vec<usize>> {
    let side: usize = dims.iter().product();
    (0..side)
        .map(|mut f| {
            let mut digits = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                digits[k] = f % dims[k];
                f /= dims[k];
            }
            digits
        })
        .collect()
}

pub(crate) fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Kronecker product of the operators in order; dims concatenate.
pub fn kron_compose(ops: &[LabeledOperator]) -> Result<LabeledOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::DimensionMismatch("kron of an empty operator list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.kron(op)))
}

/// Partial trace. With [`TraceMode::Keep`] the listed subsystems survive, in
/// their original order; with [`TraceMode::Drop`] they are traced out.
pub fn partial_trace(x: &LabeledOperator, subsystems: &[usize], mode: TraceMode) -> Result<LabeledOperator> {
    let n = x.dims.len();
    check_indices(subsystems, n)?;
    let keep: Vec<usize> = match mode {
        TraceMode::Keep => (0..n).filter(|k| subsystems.contains(k)).collect(),
        TraceMode::Drop => (0..n).filter(|k| !subsystems.contains(k)).collect(),
    };
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let kdims: Vec<usize> = keep.iter().map(|&k| x.dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| x.dims[k]).collect();
    let ksize: usize = kdims.iter().product();
    let tsize: usize = tdims.iter().product();

    // groups[t][k] = flat input index with traced part t and kept part k
    let mut groups = vec![vec![0usize; ksize]; tsize];
    for (f, digits) in digit_table(&x.dims).iter().enumerate() {
        let kd: Vec<usize> = keep.iter().map(|&k| digits[k]).collect();
        let td: Vec<usize> = traced.iter().map(|&k| digits[k]).collect();
        groups[flat_index(&td, &tdims)][flat_index(&kd, &kdims)] = f;
    }
    let mut out = CMatrix::zeros(ksize, ksize);
    for g in &groups {
        for (c, &gc) in g.iter().enumerate() {
            for (r, &gr) in g.iter().enumerate() {
                out[(r, c)] += x.data[(gr, gc)];
            }
        }
    }
    let dims = if kdims.is_empty() { vec![1] } else { kdims };
    Ok(LabeledOperator { dims, data: out, hermitian: x.hermitian })
}

/// Computational-basis partial transpose on the listed subsystems.
pub fn partial_transpose(x: &LabeledOperator, subsystems: &[usize]) -> Result<LabeledOperator> {
    check_indices(subsystems, x.dims.len())?;
    let table = digit_table(&x.dims);
    let side = x.side();
    let mut out = CMatrix::zeros(side, side);
    let mut a2 = vec![0; x.dims.len()];
    let mut b2 = vec![0; x.dims.len()];
    for (b, bd) in table.iter().enumerate() {
        for (a, ad) in table.iter().enumerate() {
            a2.copy_from_slice(ad);
            b2.copy_from_slice(bd);
            for &s in subsystems {
                a2[s] = bd[s];
                b2[s] = ad[s];
            }
            out[(flat_index(&a2, &x.dims), flat_index(&b2, &x.dims))] = x.data[(a, b)];
        }
    }
    Ok(LabeledOperator { dims: x.dims.clone(), data: out, hermitian: x.hermitian })
}

/// Reorders subsystems: output subsystem `k` is input subsystem `perm[k]`.
pub fn permute_subsystems(x: &LabeledOperator, perm: &[usize]) -> Result<LabeledOperator> {
    let map = permutation_map(&x.dims, perm)?;
    let side = x.side();
    let mut out = CMatrix::zeros(side, side);
    for b in 0..side {
        for a in 0..side {
            out[(map[a], map[b])] = x.data[(a, b)];
        }
    }
    let dims = perm.iter().map(|&p| x.dims[p]).collect();
    Ok(LabeledOperator { dims, data: out, hermitian: x.hermitian })
}

/// Flat-index map of a subsystem permutation: input index `f` lands on
/// output index `map[f]`.
pub(crate) fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    Ok(digit_table(dims)
        .iter()
        .map(|d| {
            let nd: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            flat_index(&nd, &new_dims)
        })
        .collect())
}

/// Real symmetric embedding `[[X, -Y], [Y, X]]` of `H = X + iY`.
pub fn real_embedding(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

fn require_hermitian(x: &LabeledOperator) -> Result<()> {
    let dev = x.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Sorted spectrum of a Hermitian operator, computed from the real
/// embedding (whose spectrum is the original one with every value doubled).
pub fn hermitian_eigenvalues(x: &LabeledOperator) -> Result<Vec<f64>> {
    require_hermitian(x)?;
    let eig = SymmetricEigen::new(real_embedding(&x.data)).eigenvalues;
    let mut vals: Vec<f64> = eig.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals.into_iter().step_by(2).collect())
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(x: &LabeledOperator) -> Result<f64> {
    require_hermitian(x)?;
    let eig = SymmetricEigen::new(real_embedding(&x.data)).eigenvalues;
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

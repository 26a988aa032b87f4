//! States, channels and the handful of channel identities the bounds rely on.
//!
//! Choi operators are ordered `[inputs..., outputs...]` and built as
//! `(id ⊗ N)(Γ)` with `Γ = Σ |ii⟩⟨jj|`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{partial_trace, CMatrix, LabeledOperator, TraceMode, C64, ONE, ZERO};

/// Tolerance for the state and channel invariants.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// A unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    op: LabeledOperator,
}

impl DensityState {
    pub fn new(op: LabeledOperator) -> Result<Self> {
        let op = op.into_hermitian()?;
        let tr = op.trace();
        if (tr - ONE).norm() > PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = op.min_eigenvalue()?;
        if min < -PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    /// Normalized maximally entangled state `Φ = Γ/d`.
    pub fn max_entangled(d: usize) -> Self {
        Self { op: max_entangled_unnormalized(d).scale(1.0 / d as f64) }
    }

    /// Maximally mixed state on the given subsystems.
    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let side: usize = dims.iter().product();
        Self { op: LabeledOperator::identity(dims).scale(1.0 / side as f64) }
    }

    /// Pure state from an (unnormalized) ket.
    pub fn pure(dims: &[usize], ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let v = nalgebra::DVector::from_iterator(ket.len(), ket.iter().map(|z| z / norm));
        Self::new(LabeledOperator::new(dims.to_vec(), &v * v.adjoint())?)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self { op: self.op.kron(&other.op) }
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    /// `⟨Φ_d|ρ|Φ_d⟩` for a state on two `d`-dimensional subsystems.
    pub fn fidelity_with_max_entangled(&self) -> Result<f64> {
        let dims = self.dims();
        if dims.len() != 2 || dims[0] != dims[1] {
            return Err(Error::DimensionMismatch(format!("expected [d, d], got {dims:?}")));
        }
        let phi = DensityState::max_entangled(dims[0]);
        Ok(phi.op.inner(&self.op)?.re)
    }
}

/// A completely positive, trace-preserving map in Choi form.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiChannel {
    choi: LabeledOperator,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl ChoiChannel {
    pub fn new(choi: LabeledOperator, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        let ch = Self::unchecked(choi, in_dims, out_dims)?;
        let min = ch.choi.min_eigenvalue()?;
        if min < -PHYSICAL_TOL {
            return Err(Error::InvalidChannel(format!("Choi operator has eigenvalue {min:e}")));
        }
        let dev = ch.tp_deviation()?;
        if dev > PHYSICAL_TOL {
            return Err(Error::InvalidChannel(format!("trace preservation violated by {dev:e}")));
        }
        Ok(ch)
    }

    /// Checks shapes and Hermiticity only. Used for solver reconstructions
    /// that are validated with a looser tolerance afterwards.
    pub fn unchecked(choi: LabeledOperator, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        let mut dims = in_dims.clone();
        dims.extend_from_slice(&out_dims);
        let choi = choi.relabel(dims)?.into_hermitian()?;
        Ok(Self { choi, in_dims, out_dims })
    }

    pub fn identity(d: usize) -> Self {
        Self { choi: max_entangled_unnormalized(d), in_dims: vec![d], out_dims: vec![d] }
    }

    /// The channel discarding its input and preparing `sigma`.
    pub fn replacer(d_in: usize, sigma: &DensityState) -> Self {
        let choi = LabeledOperator::identity(&[d_in]).kron(sigma.op());
        Self { choi, in_dims: vec![d_in], out_dims: sigma.dims().to_vec() }
    }

    pub fn choi(&self) -> &LabeledOperator {
        &self.choi
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dim(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    /// Largest entrywise deviation of `Tr_out Γ` from the identity.
    pub fn tp_deviation(&self) -> Result<f64> {
        let n_in = self.in_dims.len();
        let out: Vec<usize> = (n_in..n_in + self.out_dims.len()).collect();
        let marginal = partial_trace(&self.choi, &out, TraceMode::Drop)?;
        let id = LabeledOperator::identity(&self.in_dims);
        let marginal = marginal.relabel(self.in_dims.clone())?;
        marginal.max_abs_diff(&id)
    }

    /// Checks CP and TP with a caller-chosen tolerance.
    pub fn is_valid(&self, tol: f64) -> Result<bool> {
        Ok(self.choi.min_eigenvalue()? >= -tol && self.tp_deviation()? <= tol)
    }
}

/// A channel given by Kraus operators (each `out × in`).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (rows, cols) = first.shape();
        if kraus.iter().any(|k| k.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let sum = kraus.iter().fold(CMatrix::zeros(cols, cols), |acc, k| acc + k.adjoint() * k);
        let dev = (sum - CMatrix::identity(cols, cols)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > PHYSICAL_TOL {
            return Err(Error::InvalidChannel(format!("Σ K†K deviates from I by {dev:e}")));
        }
        Ok(Self { kraus })
    }

    /// Mixture of unitaries with the given weights.
    pub fn mixed_unitary(terms: &[(f64, CMatrix)]) -> Result<Self> {
        Self::new(terms.iter().map(|(w, u)| u * C64::new(w.sqrt(), 0.0)).collect())
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.kraus.iter().fold(CMatrix::zeros(self.out_dim(), self.out_dim()), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// `Γ = Σ_{ij} |ii⟩⟨jj|` on two `d`-dimensional subsystems.
pub fn max_entangled_unnormalized(d: usize) -> LabeledOperator {
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = ONE;
        }
    }
    LabeledOperator::new_hermitian(vec![d, d], m).expect("Γ is Hermitian")
}

/// Heisenberg–Weyl unitary `Z(z) X(x)` with `Z(z)|k⟩ = e^{2πikz/d}|k⟩`
/// and `X(x)|k⟩ = |k ⊕ x⟩`.
pub fn heisenberg_weyl(d: usize, z: usize, x: usize) -> Result<CMatrix> {
    if z >= d || x >= d {
        return Err(Error::Domain(format!("Heisenberg–Weyl indices ({z}, {x}) out of range for d = {d}")));
    }
    let mut w = CMatrix::zeros(d, d);
    for k in 0..d {
        let row = (k + x) % d;
        let phase = 2.0 * std::f64::consts::PI * (row * z) as f64 / d as f64;
        w[(row, k)] = C64::from_polar(1.0, phase);
    }
    Ok(w)
}

/// Choi operator `(dI − Γ)/(d² − 1)` of the randomizing channel.
pub fn randomizing_channel_choi(d: usize) -> Result<ChoiChannel> {
    if d < 2 {
        return Err(Error::Domain(format!("randomizing channel needs d ≥ 2, got {d}")));
    }
    let g = max_entangled_unnormalized(d);
    let choi = LabeledOperator::identity(&[d, d]).scale(d as f64).sub(&g)?.scale(1.0 / (d * d - 1) as f64);
    Ok(ChoiChannel { choi, in_dims: vec![d], out_dims: vec![d] })
}

/// `Σ_K (I ⊗ K) Γ (I ⊗ K)†`.
pub fn choi_from_kraus(k: &KrausChannel, in_dims: &[usize], out_dims: &[usize]) -> Result<ChoiChannel> {
    let din: usize = in_dims.iter().product();
    let dout: usize = out_dims.iter().product();
    if k.in_dim() != din || k.out_dim() != dout {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operators are {}x{}, dims need {dout}x{din}",
            k.out_dim(),
            k.in_dim()
        )));
    }
    let side = din * dout;
    let mut choi = CMatrix::zeros(side, side);
    // (I ⊗ K)|Γ⟩ has entries K[b, a] at index (a, b); outer products summed
    for kk in k.kraus() {
        let v = nalgebra::DVector::from_fn(side, |idx, _| {
            let (a, b) = (idx / dout, idx % dout);
            kk[(b, a)]
        });
        choi += &v * v.adjoint();
    }
    let mut dims = in_dims.to_vec();
    dims.extend_from_slice(out_dims);
    let choi = LabeledOperator::new(dims, choi)?.into_hermitian()?;
    Ok(ChoiChannel { choi, in_dims: in_dims.to_vec(), out_dims: out_dims.to_vec() })
}

/// `N(ρ) = Tr_in[(ρᵀ ⊗ I) Γ^N]`.
pub fn apply_channel(c: &ChoiChannel, rho: &DensityState) -> Result<DensityState> {
    if rho.dims() != c.in_dims() {
        return Err(Error::DimensionMismatch(format!("state dims {:?} vs channel input {:?}", rho.dims(), c.in_dims())));
    }
    let out = contract_input(c.choi(), c.in_dims.len(), rho.op())?;
    DensityState::new(out)
}

/// `Tr_in[(Xᵀ ⊗ I) Γ]` without any positivity checks.
pub(crate) fn contract_input(choi: &LabeledOperator, n_in: usize, x: &LabeledOperator) -> Result<LabeledOperator> {
    let dout: usize = choi.dims()[n_in..].iter().product();
    let lhs = x.data().transpose().kronecker(&CMatrix::identity(dout, dout));
    let prod = LabeledOperator::new(choi.dims().to_vec(), lhs * choi.data())?;
    let kept: Vec<usize> = (n_in..choi.dims().len()).collect();
    let out = partial_trace(&prod, &kept, TraceMode::Keep)?;
    let dims = out.dims().to_vec();
    LabeledOperator::new(dims, out.into_data())?.into_hermitian()
}

/// Propagation rule `Γ^K_{CD} = Tr_{AB}[T_{AB}(Γ^N_{AB}) Γ^P_{CBAD}]`.
///
/// `gamma_p` is the superchannel Choi with inputs `[C, B]` and outputs
/// `[A, D]`; `gamma_n` maps `A` to `B`.
pub fn propagate_superchannel(gamma_p: &ChoiChannel, gamma_n: &ChoiChannel) -> Result<ChoiChannel> {
    let (pin, pout) = (gamma_p.in_dims(), gamma_p.out_dims());
    if pin.len() != 2 || pout.len() != 2 {
        return Err(Error::DimensionMismatch("superchannel Choi must be ordered [C, B, A, D]".into()));
    }
    let (dc, db, da, dd) = (pin[0], pin[1], pout[0], pout[1]);
    if gamma_n.in_dim() != da || gamma_n.out_dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "channel maps {} -> {}, superchannel slots need {da} -> {db}",
            gamma_n.in_dim(),
            gamma_n.out_dim()
        )));
    }
    // reorder Γ^P to [C, D, A, B] so the contraction acts on the trailing pair
    let p = gamma_p.choi().clone().relabel(vec![dc, db, da, dd])?.permute_subsystems(&[0, 3, 2, 1])?;
    let n = gamma_n.choi().clone().relabel(vec![da, db])?.partial_transpose(&[0, 1])?;
    let lhs = CMatrix::identity(dc * dd, dc * dd).kronecker(n.data());
    let prod = LabeledOperator::new(vec![dc, dd, da, db], lhs * p.data())?;
    let k = partial_trace(&prod, &[0, 1], TraceMode::Keep)?.into_hermitian()?;
    ChoiChannel::new(k, vec![dc], vec![dd])
}

/// Closed form of the `U ⊗ Ū` twirl on two `d`-dimensional subsystems.
pub fn bilateral_twirl(x: &LabeledOperator, d: usize) -> Result<LabeledOperator> {
    if x.dims() != [d, d] {
        return Err(Error::DimensionMismatch(format!("twirl expects [{d}, {d}], got {:?}", x.dims())));
    }
    let phi = max_entangled_unnormalized(d).scale(1.0 / d as f64);
    let rest = LabeledOperator::identity(&[d, d]).sub(&phi)?;
    let a = phi.inner(x)?;
    let b = rest.inner(x)?;
    phi.scale_complex(a).add(&rest.scale_complex(b / (d * d - 1) as f64))
}

/// Haar-random unitary: Ginibre matrix, QR, then a phase fix of `R`'s
/// diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            ZERO
        } else {
            let rii = r[(i, i)];
            if rii.norm() == 0.0 {
                ONE
            } else {
                rii / rii.norm()
            }
        }
    });
    q * phases
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

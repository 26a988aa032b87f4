//! Resource states and channels for the numerical experiments, and the
//! parameter grids that sweep over them.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::quantum::{ginibre, DensityState, KrausChannel};
use crate::tensor::{CMatrix, LabeledOperator, C64, ZERO};

/// Identifier of the generator behind every seeded draw in this crate.
pub const PRNG_ID: &str = "chacha20";

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// `p Φ + (1 − p) σ_Â ⊗ σ_B̂`.
pub fn mixed_resource(p: f64, sigma_a: &DensityState, sigma_b: &DensityState) -> Result<DensityState> {
    check_unit("p", p)?;
    let d = sigma_a.op().side();
    if sigma_b.op().side() != d {
        return Err(Error::DimensionMismatch(format!(
            "local states have dimensions {d} and {}",
            sigma_b.op().side()
        )));
    }
    let phi = DensityState::max_entangled(d);
    let product = sigma_a.tensor(sigma_b);
    DensityState::new(phi.op().scale(p).add(&product.op().scale(1.0 - p))?)
}

/// Two-mode squeezed vacuum cut off after `n_max` photons, normalized:
/// amplitudes `λⁿ / √(Σ_k λ^{2k})` on `|n⟩|n⟩`.
pub fn tmsv_truncated(lambda: f64, n_max: usize) -> Result<DensityState> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("squeezing λ = {lambda} is outside [0, 1)")));
    }
    let d = n_max + 1;
    let mut ket = vec![ZERO; d * d];
    for n in 0..d {
        ket[n * d + n] = C64::new(lambda.powi(n as i32), 0.0);
    }
    DensityState::pure(&[d, d], &ket)
}

fn basis_op(d: usize, entries: &[(usize, usize, f64)]) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for &(i, j, v) in entries {
        m[(i, j)] = C64::new(v, 0.0);
    }
    m
}

/// Qutrit cascade amplitude damping with decay rates `γ_{1→0}`, `γ_{2→1}`
/// and `γ_{2→0}`.
pub fn amp_damp3(g10: f64, g21: f64, g20: f64) -> Result<KrausChannel> {
    check_unit("γ10", g10)?;
    check_unit("γ21", g21)?;
    check_unit("γ20", g20)?;
    if g21 + g20 > 1.0 {
        return Err(Error::Domain(format!("γ21 + γ20 = {} exceeds 1", g21 + g20)));
    }
    KrausChannel::new(vec![
        basis_op(3, &[(0, 0, 1.0), (1, 1, (1.0 - g10).sqrt()), (2, 2, (1.0 - g21 - g20).max(0.0).sqrt())]),
        basis_op(3, &[(0, 1, g10.sqrt())]),
        basis_op(3, &[(1, 2, g21.sqrt())]),
        basis_op(3, &[(0, 2, g20.sqrt())]),
    ])
}

/// Qubit amplitude damping with decay probability `γ`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_unit("γ", gamma)?;
    KrausChannel::new(vec![
        basis_op(2, &[(0, 0, 1.0), (1, 1, (1.0 - gamma).sqrt())]),
        basis_op(2, &[(0, 1, gamma.sqrt())]),
    ])
}

/// Qubit dephasing: `Z` applied with probability `p`.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_unit("p", p)?;
    KrausChannel::new(vec![
        basis_op(2, &[(0, 0, (1.0 - p).sqrt()), (1, 1, (1.0 - p).sqrt())]),
        basis_op(2, &[(0, 0, p.sqrt()), (1, 1, -p.sqrt())]),
    ])
}

/// `G G† / Tr[G G†]` for a complex Ginibre `G` drawn from ChaCha20 seeded
/// with `seed`.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityState> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = ginibre(dim, dim, &mut rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace();
    DensityState::new(LabeledOperator::new(vec![dim], gg.map(|z| z / tr))?.into_hermitian()?)
}

/// Inclusive grid `start:stop:count`; a bare number is a one-point grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn point(x: f64) -> Self {
        Self { start: x, stop: x, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            // rounded to 12 significant digits so that 0:0.9:10 gives 0.3, not 0.30000000000000004
            n => (0..n)
                .map(|k| {
                    let v = self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64;
                    format!("{v:.11e}").parse().expect("formatted float parses")
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Domain(format!("grid `{s}`: {what}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        match parts.as_slice() {
            [x] => Ok(Self::point(num(x)?)),
            [a, b, n] => {
                let count = n.trim().parse::<usize>().map_err(|_| bad("count must be a non-negative integer"))?;
                Ok(Self { start: num(a)?, stop: num(b)?, count })
            }
            _ => Err(bad("expected `x` or `start:stop:count`")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 && self.start == self.stop {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.count)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// `mixed_resource` over `p`, with seeded random local states.
    MixedState,
    /// `tmsv_truncated(λ, 2)`.
    Tmsv,
    /// `amp_damp3` over `(γ10, γ21, γ20)`.
    AmpDamp,
}

impl SweepKind {
    pub fn axis_names(self) -> &'static [&'static str] {
        match self {
            SweepKind::MixedState => &["p"],
            SweepKind::Tmsv => &["lambda"],
            SweepKind::AmpDamp => &["gamma10", "gamma21", "gamma20"],
        }
    }
}

/// A parameter sweep. Points are the Cartesian product of the axes with the
/// first axis varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub axes: Vec<Grid>,
    /// Target dimension.
    pub d: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(kind: SweepKind, axes: Vec<Grid>, d: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, axes, d, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let names = self.kind.axis_names();
        if self.axes.len() != names.len() {
            return Err(Error::Domain(format!("{:?} sweeps take {} axes, got {}", self.kind, names.len(), self.axes.len())));
        }
        if self.d < 2 {
            return Err(Error::Domain(format!("target dimension {} is below 2", self.d)));
        }
        for (grid, name) in self.axes.iter().zip(names) {
            for x in [grid.start, grid.stop] {
                match self.kind {
                    SweepKind::Tmsv if !(0.0..1.0).contains(&x) => {
                        return Err(Error::Domain(format!("{name} = {x} is outside [0, 1)")));
                    }
                    _ => check_unit(name, x)?,
                }
            }
        }
        if self.kind == SweepKind::AmpDamp {
            let worst = [&self.axes[1], &self.axes[2]].iter().map(|g| g.start.max(g.stop)).sum::<f64>();
            if worst > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("γ21 + γ20 reaches {worst}, outside the CPTP region")));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for grid in &self.axes {
            let vals = grid.values();
            out = out.iter().flat_map(|prefix| vals.iter().map(move |&v| [prefix.as_slice(), &[v]].concat())).collect();
        }
        out
    }
}

//! Operator bases for the `Ū ⊗ U ⊗ U` commutant on `A B₁ B₂`.
//!
//! Index order for every six-element family is `[+, -, 0, 1, 2, 3]`. The
//! `S` operators span the operators invariant under the tripartite twirl;
//! `R` is the plain permutation-operator basis and `C` the `S` basis after
//! relabelling subsystems, both used to express partial transposes of `S`.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::tensor::{flat_index, CMatrix, LabeledOperator, TraceMode, C64, I, ONE, ZERO};

pub type Mat6 = SMatrix<C64, 6, 6>;

pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const ZERO_IDX: usize = 2;
pub const ONE_IDX: usize = 3;
pub const TWO_IDX: usize = 4;
pub const THREE_IDX: usize = 5;

pub const LABELS: [&str; 6] = ["+", "-", "0", "1", "2", "3"];

/// `g(i)`: `+` and `-` map to themselves, everything else to `0`.
pub fn g(i: usize) -> usize {
    if i <= MINUS {
        i
    } else {
        ZERO_IDX
    }
}

/// Sign picked up under the swap `B₁ ↔ B₂`.
pub fn swap_sign(i: usize) -> f64 {
    if i == TWO_IDX || i == THREE_IDX {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug)]
pub struct SymBasis {
    pub d: usize,
    /// False at `d = 2`, where `S⁻` vanishes.
    pub has_minus: bool,
    /// `[I, V_{AB₁}, V_{AB₂}, V_{B₁B₂}, V_{AB₁B₂}, V_{B₂B₁A}]`.
    pub v: [LabeledOperator; 6],
    /// `T_A` of each `V`, written out from the closed forms.
    pub tv: [LabeledOperator; 6],
    pub s: [LabeledOperator; 6],
    pub r: [LabeledOperator; 6],
    pub w: [LabeledOperator; 6],
    pub c: [LabeledOperator; 6],
    pub y: Mat6,
    pub z: Mat6,
    pub z_inv: Mat6,
    pub p: Mat6,
    pub yz_inv: Mat6,
    pub yp_inv_y_inv: Mat6,
    /// `Tr[S^{g(i)}]`.
    pub traces: [f64; 6],
    /// `Tr[R^{g(i)}]`.
    pub r_traces: [f64; 6],
    /// Symmetric and antisymmetric projectors on `B₁ B₂`.
    pub pi_sym: LabeledOperator,
    pub pi_anti: LabeledOperator,
}

/// Sum of `|out(i,j,k)⟩⟨in(i,j,k)|` over all index triples.
fn triple_sum(d: usize, f: impl Fn(usize, usize, usize) -> ([usize; 3], [usize; 3])) -> LabeledOperator {
    let dims = [d, d, d];
    let mut m = CMatrix::zeros(d * d * d, d * d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let (out, inp) = f(i, j, k);
                m[(flat_index(&out, &dims), flat_index(&inp, &dims))] += ONE;
            }
        }
    }
    LabeledOperator::new(dims.to_vec(), m).expect("side matches dims")
}

fn combo(coeffs: &[C64], ops: &[LabeledOperator]) -> LabeledOperator {
    let mut acc = LabeledOperator::zeros(ops[0].dims());
    for (c, op) in coeffs.iter().zip(ops) {
        if *c != ZERO {
            acc = acc.add(&op.scale_complex(*c)).expect("same dims");
        }
    }
    acc.into_hermitian().unwrap_or_else(|_| panic!("basis combination is not Hermitian"))
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The `+,-,0,1,2,3` combination shared by the `S` and `C` families:
/// `ops` are the six generators in the order the closed forms use them,
/// `[X⁺, X^{B₁B₂}, X^{AB₁}, X^{AB₂}, X^{AB₁B₂}, X^{B₂B₁A}]`.
fn s_family(d: f64, ops: [&LabeledOperator; 6]) -> [LabeledOperator; 6] {
    let [id, vb, va1, va2, v3, v3r] = ops;
    let s = (d * d - 1.0).sqrt();
    let all = [id.clone(), vb.clone(), va1.clone(), va2.clone(), v3.clone(), v3r.clone()];
    let plus = [re(0.5), re(0.5), re(-0.5 / (d + 1.0)), re(-0.5 / (d + 1.0)), re(-0.5 / (d + 1.0)), re(-0.5 / (d + 1.0))];
    let minus = [re(0.5), re(-0.5), re(-0.5 / (d - 1.0)), re(-0.5 / (d - 1.0)), re(0.5 / (d - 1.0)), re(0.5 / (d - 1.0))];
    let n = d * d - 1.0;
    let zero = [ZERO, ZERO, re(d / n), re(d / n), re(-1.0 / n), re(-1.0 / n)];
    let one = [ZERO, ZERO, re(-1.0 / n), re(-1.0 / n), re(d / n), re(d / n)];
    let two = [ZERO, ZERO, re(1.0 / s), re(-1.0 / s), ZERO, ZERO];
    let three = [ZERO, ZERO, ZERO, ZERO, I / s, -I / s];
    [plus, minus, zero, one, two, three].map(|c| combo(&c, &all))
}

impl SymBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("symmetry basis needs d ≥ 2, got {d}")));
        }
        let id = LabeledOperator::identity(&[d, d, d]);
        let v_ab1 = triple_sum(d, |i, j, k| ([i, j, k], [j, i, k]));
        let v_ab2 = triple_sum(d, |i, j, k| ([i, k, j], [j, k, i]));
        let v_b1b2 = triple_sum(d, |i, j, k| ([k, i, j], [k, j, i]));
        let v_ab1b2 = triple_sum(d, |i, j, k| ([k, i, j], [i, j, k]));
        let v_b2b1a = triple_sum(d, |i, j, k| ([j, k, i], [i, j, k]));
        let t_ab1 = triple_sum(d, |i, j, k| ([j, j, k], [i, i, k]));
        let t_ab2 = triple_sum(d, |i, j, k| ([j, k, j], [i, k, i]));
        let t_ab1b2 = triple_sum(d, |i, j, k| ([i, i, j], [k, j, k]));
        let t_b2b1a = triple_sum(d, |i, j, k| ([i, k, i], [j, j, k]));

        let df = d as f64;
        let s = s_family(df, [&id, &v_b1b2, &t_ab1, &t_ab2, &t_ab1b2, &t_b2b1a]);

        let v = [id.clone(), v_ab1, v_ab2, v_b1b2, v_ab1b2, v_b2b1a];
        let tv = [id.clone(), t_ab1, t_ab2, v[3].clone(), t_ab1b2, t_b2b1a];

        let sq3 = 3f64.sqrt();
        let r_coeffs: [[C64; 6]; 6] = [
            [re(1.0 / 6.0); 6],
            [re(1.0 / 6.0), re(-1.0 / 6.0), re(-1.0 / 6.0), re(-1.0 / 6.0), re(1.0 / 6.0), re(1.0 / 6.0)],
            [re(2.0 / 3.0), ZERO, ZERO, ZERO, re(-1.0 / 3.0), re(-1.0 / 3.0)],
            [ZERO, re(-1.0 / 3.0), re(-1.0 / 3.0), re(2.0 / 3.0), ZERO, ZERO],
            [ZERO, re(1.0 / sq3), re(-1.0 / sq3), ZERO, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ZERO, I / sq3, -I / sq3],
        ];
        let r = r_coeffs.map(|c| combo(&c, &v));

        let tb1 = |x: &LabeledOperator| x.partial_transpose(&[1]).expect("valid subsystem");
        let w = [id.clone(), tb1(&v[3]), tb1(&v[1]), v[2].clone(), tb1(&v[4]), tb1(&v[5])];
        let c = s_family(df, [&w[0], &w[3], &w[1], &w[2], &w[4], &w[5]]);

        let y = transfer_y(df);
        let z = Mat6::from_fn(|i, j| r_coeffs[i][j]);
        let z_inv = z.try_inverse().ok_or_else(|| Error::Domain("Z is singular".into()))?;
        let mut p = Mat6::zeros();
        for (j, k) in [0, 3, 1, 2, 4, 5].into_iter().enumerate() {
            p[(j, k)] = ONE;
        }
        let p_inv = p.transpose();
        let y_inv = y.try_inverse().ok_or_else(|| Error::Domain("Y is singular".into()))?;
        let yz_inv = y * z_inv;
        let yp_inv_y_inv = y * p_inv * y_inv;

        let n = df * (df * df - 1.0);
        let traces = [df * (df + 2.0) * (df - 1.0) / 2.0, df * (df - 2.0) * (df + 1.0) / 2.0, 2.0 * df, 2.0 * df, 2.0 * df, 2.0 * df];
        let r0 = 2.0 * n / 3.0;
        let r_traces = [df * (df + 1.0) * (df + 2.0) / 6.0, df * (df - 1.0) * (df - 2.0) / 6.0, r0, r0, r0, r0];

        let swap = v[3].partial_trace(&[1, 2], TraceMode::Keep)?.scale(1.0 / df);
        let id2 = LabeledOperator::identity(&[d, d]);
        let pi_sym = id2.add(&swap)?.scale(0.5);
        let pi_anti = id2.sub(&swap)?.scale(0.5);

        Ok(Self {
            d,
            has_minus: d > 2,
            v,
            tv,
            s,
            r,
            w,
            c,
            y,
            z,
            z_inv,
            p,
            yz_inv,
            yp_inv_y_inv,
            traces,
            r_traces,
            pi_sym,
            pi_anti,
        })
    }

    /// Labels that carry a variable: all six, minus `-` at `d = 2`.
    pub fn active(&self) -> Vec<usize> {
        (0..6).filter(|&i| self.has_minus || i != MINUS).collect()
    }

    pub fn sqrt_d2m1(&self) -> f64 {
        ((self.d * self.d - 1) as f64).sqrt()
    }
}

/// `S^i = Σ_j Y_{ij} T_A(V^j)`.
fn transfer_y(d: f64) -> Mat6 {
    let a = -1.0 / (2.0 * (d + 1.0));
    let b = 1.0 / (2.0 * (d - 1.0));
    let n = d * d - 1.0;
    let s = n.sqrt();
    let rows: [[C64; 6]; 6] = [
        [re(0.5), re(a), re(a), re(0.5), re(a), re(a)],
        [re(0.5), re(-b), re(-b), re(-0.5), re(b), re(b)],
        [ZERO, re(d / n), re(d / n), ZERO, re(-1.0 / n), re(-1.0 / n)],
        [ZERO, re(-1.0 / n), re(-1.0 / n), ZERO, re(d / n), re(d / n)],
        [ZERO, re(1.0 / s), re(-1.0 / s), ZERO, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ZERO, I / s, -I / s],
    ];
    Mat6::from_fn(|i, j| rows[i][j])
}

pub fn build_sym_basis(d: usize) -> Result<SymBasis> {
    SymBasis::new(d)
}

/// Closed-form tripartite twirl `Σ_i Tr[S^i x] S^i / Tr[S^{g(i)}]`.
pub fn tripartite_twirl(x: &LabeledOperator, basis: &SymBasis) -> Result<LabeledOperator> {
    let d = basis.d;
    if x.dims() != [d, d, d] {
        return Err(Error::DimensionMismatch(format!("tripartite twirl expects [{d}, {d}, {d}], got {:?}", x.dims())));
    }
    let mut acc = LabeledOperator::zeros(&[d, d, d]);
    for i in basis.active() {
        let s = &basis.s[i];
        let coeff = s.inner(x)? / basis.traces[g(i)];
        acc = acc.add(&s.scale_complex(coeff))?;
    }
    Ok(acc)
}

/// Residuals of every linear relation between the operator families.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransferDiagnostics {
    pub s_from_y: f64,
    pub r_from_z: f64,
    pub w_from_p: f64,
    pub c_from_y: f64,
    pub z_inverse: f64,
    /// `T_A(S^i) = Σ_k [YZ⁻¹]_{ik} R^k`.
    pub partial_transpose_a: f64,
    /// `T_{AB₁}(S^i) = Σ_j [YP⁻¹Y⁻¹]_{ij} C^j`.
    pub partial_transpose_ab1: f64,
    /// `tv[j] = T_A(v[j])`.
    pub transposed_perms: f64,
}

impl TransferDiagnostics {
    pub fn max(&self) -> f64 {
        [
            self.s_from_y,
            self.r_from_z,
            self.w_from_p,
            self.c_from_y,
            self.z_inverse,
            self.partial_transpose_a,
            self.partial_transpose_ab1,
            self.transposed_perms,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn relation_residual(lhs: &[LabeledOperator; 6], m: &Mat6, rhs: &[LabeledOperator; 6], rows: &[usize]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &i in rows {
        let mut acc = LabeledOperator::zeros(lhs[i].dims());
        for (k, op) in rhs.iter().enumerate() {
            acc = acc.add(&op.scale_complex(m[(i, k)]))?;
        }
        worst = worst.max(lhs[i].max_abs_diff(&acc)?);
    }
    Ok(worst)
}

pub fn transfer_matrices_check(basis: &SymBasis) -> Result<TransferDiagnostics> {
    let rows = basis.active();
    let all: Vec<usize> = (0..6).collect();
    let ta = basis.s.clone().map(|s| s.partial_transpose(&[0]).expect("valid subsystem"));
    let tab = basis.s.clone().map(|s| s.partial_transpose(&[0, 1]).expect("valid subsystem"));
    let tb1v = basis.v.clone().map(|v| v.partial_transpose(&[1]).expect("valid subsystem"));
    let mut transposed_perms: f64 = 0.0;
    for (v, tv) in basis.v.iter().zip(&basis.tv) {
        transposed_perms = transposed_perms.max(v.partial_transpose(&[0])?.max_abs_diff(tv)?);
    }
    let z_inverse = (basis.z * basis.z_inv - Mat6::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(TransferDiagnostics {
        s_from_y: relation_residual(&basis.s, &basis.y, &basis.tv, &all)?,
        r_from_z: relation_residual(&basis.r, &basis.z, &basis.v, &all)?,
        w_from_p: relation_residual(&basis.w, &basis.p, &tb1v, &all)?,
        c_from_y: relation_residual(&basis.c, &basis.y, &basis.w, &all)?,
        z_inverse,
        partial_transpose_a: relation_residual(&ta, &basis.yz_inv, &basis.r, &rows)?,
        partial_transpose_ab1: relation_residual(&tab, &basis.yp_inv_y_inv, &basis.c, &rows)?,
        transposed_perms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_values() {
        let b = SymBasis::new(2).unwrap();
        let tr: Vec<f64> = b.s.iter().map(|s| s.trace().re).collect();
        assert!((tr[PLUS] - 4.0).abs() < 1e-12 && tr[MINUS].abs() < 1e-12 && (tr[ZERO_IDX] - 4.0).abs() < 1e-12);
        let b = SymBasis::new(3).unwrap();
        let tr: Vec<f64> = b.s.iter().map(|s| s.trace().re).collect();
        assert!((tr[PLUS] - 15.0).abs() < 1e-12 && (tr[MINUS] - 6.0).abs() < 1e-12 && (tr[ZERO_IDX] - 6.0).abs() < 1e-12);
        assert!(SymBasis::new(1).is_err());
    }

    #[test]
    fn minus_vanishes_for_qubits() {
        let b = SymBasis::new(2).unwrap();
        assert!(!b.has_minus);
        assert!(b.s[MINUS].max_abs() < 1e-15);
        assert_eq!(b.active(), vec![0, 2, 3, 4, 5]);
    }

    #[test]
    fn z_inverse_is_inverse() {
        let b = SymBasis::new(3).unwrap();
        assert!((b.z * b.z_inv - Mat6::identity()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn transfer_relations_hold() {
        for d in 2..=4 {
            let b = SymBasis::new(d).unwrap();
            let diag = transfer_matrices_check(&b).unwrap();
            assert!(diag.max() < 1e-10, "d={d}: {diag:?}");
        }
    }

    #[test]
    fn swap_flips_two_and_three() {
        let b = SymBasis::new(3).unwrap();
        for (i, s) in b.s.iter().enumerate() {
            let swapped = s.permute_subsystems(&[0, 2, 1]).unwrap();
            assert!(swapped.max_abs_diff(&s.scale(swap_sign(i))).unwrap() < 1e-12, "label {}", LABELS[i]);
        }
    }

    #[test]
    fn twirl_fixes_basis_elements() {
        let b = SymBasis::new(3).unwrap();
        let t = tripartite_twirl(&b.s[PLUS], &b).unwrap();
        assert!(t.max_abs_diff(&b.s[PLUS]).unwrap() < 1e-12);
        let id = LabeledOperator::identity(&[3, 3, 3]);
        assert!(tripartite_twirl(&id, &b).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
    }
}

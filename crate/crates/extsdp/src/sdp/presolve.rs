//! Elimination of equality rows, leaving a pure linear matrix inequality.
//!
//! The rows `G y = h` are reduced by sparse Gauss–Jordan elimination with
//! threshold pivoting (among entries within a factor 10 of the row maximum,
//! the column that occurs least often wins). Each pivot parameter is then
//! an affine function of the free ones and is substituted into the blocks.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::embed::{RealSdp, SparseSym};
use crate::error::{Error, Result};

/// Maximize `objective·z + offset` subject to
/// `constant[b] + Σ_k z_k coeffs[k][b] ⪰ 0` for every block `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiProblem {
    pub block_sizes: Vec<usize>,
    pub constant: Vec<SparseSym>,
    /// For each variable, its `(block, matrix)` coefficients.
    pub coeffs: Vec<Vec<(usize, SparseSym)>>,
    pub objective: Vec<f64>,
    pub offset: f64,
}

impl LmiProblem {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Dense value of every block at `z`.
    pub fn blocks_at(&self, z: &[f64]) -> Vec<nalgebra::DMatrix<f64>> {
        let mut out: Vec<_> = self.constant.iter().zip(&self.block_sizes).map(|(c, &n)| c.to_dense(n)).collect();
        for (k, terms) in self.coeffs.iter().enumerate() {
            for (b, s) in terms {
                for &(i, j, v) in &s.entries {
                    out[*b][(i, j)] += v * z[k];
                    if i != j {
                        out[*b][(j, i)] += v * z[k];
                    }
                }
            }
        }
        out
    }
}

/// Maps a reduced solution `z` back to the full parameter vector `y`.
#[derive(Clone, Debug)]
pub struct Recovery {
    n_params: usize,
    /// Parameter index of each reduced variable.
    free: Vec<usize>,
    /// `y_p = h − Σ a_j y_j` over free parameters `j`.
    pivots: Vec<(usize, f64, Vec<(usize, f64)>)>,
}

impl Recovery {
    pub fn expand(&self, z: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_params];
        for (k, &p) in self.free.iter().enumerate() {
            y[p] = z[k];
        }
        for (p, h, row) in &self.pivots {
            y[*p] = h - row.iter().map(|&(j, a)| a * y[j]).sum::<f64>();
        }
        y
    }

    pub fn n_eliminated(&self) -> usize {
        self.pivots.len()
    }
}

#[derive(Clone, Debug)]
pub struct Presolved {
    pub lmi: LmiProblem,
    pub block_names: Vec<String>,
    pub recovery: Recovery,
}

struct PivotRow {
    col: usize,
    rhs: f64,
    row: BTreeMap<usize, f64>,
}

const DROP_TOL: f64 = 1e-14;

pub fn presolve(sdp: &RealSdp) -> Result<Presolved> {
    let n = sdp.n_params;
    let mut col_count = vec![0usize; n];
    for row in &sdp.eq_rows {
        for &(j, _) in row {
            col_count[j] += 1;
        }
    }

    let mut pivots: Vec<PivotRow> = Vec::new();
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    for (row, &rhs0) in sdp.eq_rows.iter().zip(&sdp.eq_rhs) {
        let scale = row.iter().map(|e| e.1.abs()).fold(rhs0.abs(), f64::max).max(1.0);
        let mut work: BTreeMap<usize, f64> = BTreeMap::new();
        for &(j, a) in row {
            *work.entry(j).or_insert(0.0) += a;
        }
        let mut rhs = rhs0;
        let mut heap: BinaryHeap<Reverse<usize>> = work.keys().filter_map(|&j| pivot_of[j]).map(Reverse).collect();
        while let Some(Reverse(k)) = heap.pop() {
            let pr = &pivots[k];
            let Some(f) = work.remove(&pr.col) else { continue };
            rhs -= f * pr.rhs;
            for (&j, &a) in &pr.row {
                let e = work.entry(j).or_insert(0.0);
                let fresh = *e == 0.0;
                *e -= f * a;
                if fresh {
                    if let Some(kj) = pivot_of[j] {
                        heap.push(Reverse(kj));
                    }
                }
            }
        }
        work.retain(|_, a| a.abs() > DROP_TOL * scale);
        let Some(max) = work.values().map(|a| a.abs()).reduce(f64::max) else {
            if rhs.abs() > 1e-9 * scale {
                return Err(Error::InconsistentEqualities(rhs.abs()));
            }
            continue;
        };
        if max <= 1e-10 * scale {
            // numerically dependent row
            if rhs.abs() > 1e-9 * scale {
                return Err(Error::InconsistentEqualities(rhs.abs()));
            }
            continue;
        }
        let (&col, &a) = work
            .iter()
            .filter(|(_, a)| a.abs() >= 0.1 * max)
            .min_by(|x, y| col_count[*x.0].cmp(&col_count[*y.0]).then(y.1.abs().total_cmp(&x.1.abs())).then(x.0.cmp(y.0)))
            .expect("nonempty row has a maximal entry");
        work.remove(&col);
        for v in work.values_mut() {
            *v /= a;
        }
        pivot_of[col] = Some(pivots.len());
        pivots.push(PivotRow { col, rhs: rhs / a, row: work });
    }

    // back-substitute so every pivot depends on free parameters only
    for k in (0..pivots.len()).rev() {
        let mut row = std::mem::take(&mut pivots[k].row);
        let mut rhs = pivots[k].rhs;
        let later: Vec<(usize, f64)> = row.iter().filter(|(j, _)| pivot_of[**j].is_some()).map(|(&j, &a)| (j, a)).collect();
        for (j, f) in later {
            row.remove(&j);
            let pr = &pivots[pivot_of[j].expect("pivot column")];
            rhs -= f * pr.rhs;
            for (&c, &a) in &pr.row {
                *row.entry(c).or_insert(0.0) -= f * a;
            }
        }
        row.retain(|_, a| a.abs() > DROP_TOL);
        pivots[k].row = row;
        pivots[k].rhs = rhs;
    }

    // dependents[j]: pivots whose expression involves free column j
    let mut dependents: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for pr in &pivots {
        for (&j, &a) in &pr.row {
            dependents.entry(j).or_default().push((pr.col, a));
        }
    }

    let nb = sdp.blocks.len();
    let mut param_mats: Vec<HashMap<usize, &SparseSym>> = vec![HashMap::new(); nb];
    for (b, blk) in sdp.blocks.iter().enumerate() {
        for (p, s) in &blk.terms {
            param_mats[b].insert(*p, s);
        }
    }

    let mut constant = Vec::with_capacity(nb);
    for (b, blk) in sdp.blocks.iter().enumerate() {
        let mut entries = blk.constant.entries.clone();
        for pr in &pivots {
            if let Some(s) = param_mats[b].get(&pr.col) {
                entries.extend(s.entries.iter().map(|&(i, j, v)| (i, j, v * pr.rhs)));
            }
        }
        constant.push(prune(SparseSym::from_unsorted(entries)));
    }

    let mut offset = sdp.offset;
    for pr in &pivots {
        offset += sdp.objective[pr.col] * pr.rhs;
    }

    let mut free = Vec::new();
    let mut coeffs = Vec::new();
    let mut objective = Vec::new();
    for j in (0..n).filter(|&j| pivot_of[j].is_none()) {
        let deps = dependents.get(&j).map(Vec::as_slice).unwrap_or(&[]);
        let mut c = sdp.objective[j];
        for &(p, a) in deps {
            c -= a * sdp.objective[p];
        }
        let mut terms = Vec::new();
        for b in 0..nb {
            let mut entries = Vec::new();
            if let Some(s) = param_mats[b].get(&j) {
                entries.extend_from_slice(&s.entries);
            }
            for &(p, a) in deps {
                if let Some(s) = param_mats[b].get(&p) {
                    entries.extend(s.entries.iter().map(|&(i, k, v)| (i, k, -a * v)));
                }
            }
            if !entries.is_empty() {
                let s = prune(SparseSym::from_unsorted(entries));
                if !s.is_empty() {
                    terms.push((b, s));
                }
            }
        }
        if terms.is_empty() {
            if c.abs() > 1e-12 {
                return Err(Error::Model(format!("objective is unbounded along parameter {j}")));
            }
            continue;
        }
        free.push(j);
        coeffs.push(terms);
        objective.push(c);
    }

    let pivots = pivots.into_iter().map(|pr| (pr.col, pr.rhs, pr.row.into_iter().collect())).collect();
    Ok(Presolved {
        lmi: LmiProblem {
            block_sizes: sdp.blocks.iter().map(|b| b.size).collect(),
            constant,
            coeffs,
            objective,
            offset,
        },
        block_names: sdp.blocks.iter().map(|b| b.name.clone()).collect(),
        recovery: Recovery { n_params: n, free, pivots },
    })
}

/// Drops entries that are rounding leftovers of cancellation.
fn prune(mut s: SparseSym) -> SparseSym {
    let tol = 1e-13 * s.max_abs();
    s.entries.retain(|e| e.2.abs() > tol);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::embed::{embed_real, RealBlock};
    use crate::sdp::model::{MatrixExpr, Sense, SdpProblem};

    fn with_rows(n: usize, rows: Vec<Vec<(usize, f64)>>, rhs: Vec<f64>) -> RealSdp {
        let mut p = SdpProblem::new();
        for k in 0..n {
            p.add_variable(&format!("y{k}"), &[1], None).unwrap();
        }
        p.set_objective(Sense::Maximize, MatrixExpr::zero(&[1])).unwrap();
        let mut r = embed_real(&p).unwrap();
        r.blocks = vec![RealBlock {
            name: "diag".into(),
            size: n,
            constant: SparseSym::default(),
            terms: (0..n).map(|k| (k, SparseSym { entries: vec![(k, k, 1.0)] })).collect(),
        }];
        r.eq_rows = rows;
        r.eq_rhs = rhs;
        r
    }

    #[test]
    fn eliminates_and_recovers() {
        // y0 + y1 = 3, y1 − y2 = 1, and a redundant sum of the two
        let r = with_rows(
            4,
            vec![vec![(0, 1.0), (1, 1.0)], vec![(1, 1.0), (2, -1.0)], vec![(0, 1.0), (1, 2.0), (2, -1.0)]],
            vec![3.0, 1.0, 4.0],
        );
        let pre = presolve(&r).unwrap();
        assert_eq!(pre.recovery.n_eliminated(), 2);
        assert_eq!(pre.lmi.n_vars(), 2);
        let y = pre.recovery.expand(&[0.5, -2.0]);
        for (row, rhs) in r.eq_rows.iter().zip(&r.eq_rhs) {
            let lhs: f64 = row.iter().map(|&(j, a)| a * y[j]).sum();
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_rows_detected() {
        let r = with_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]], vec![1.0, 3.0]);
        assert!(matches!(presolve(&r), Err(Error::InconsistentEqualities(_))));
    }

    #[test]
    fn substituted_blocks_match_direct_evaluation() {
        let r = with_rows(3, vec![vec![(0, 2.0), (2, 1.0)]], vec![1.0]);
        let pre = presolve(&r).unwrap();
        let z: Vec<f64> = (0..pre.lmi.n_vars()).map(|k| 0.3 + k as f64).collect();
        let y = pre.recovery.expand(&z);
        let direct = crate::sdp::embed::block_value(&r.blocks[0], &y);
        let reduced = &pre.lmi.blocks_at(&z)[0];
        assert!((direct - reduced).abs().max() < 1e-14);
    }
}

//! Direct solvers for the symmetric systems arising from graph Laplacians.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot tolerance for all direct solves.
pub const PIVOT_TOL: f64 = 1e-14;

/// Symmetric banded matrix stored by its lower band.
///
/// `lower[i][d]` holds `A[i][i - d]` for `d = 0..=bandwidth`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    bandwidth: usize,
    lower: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            bandwidth,
            lower: vec![vec![0.0; bandwidth + 1]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Add `value` to `A[i][j]` (and `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bandwidth, "entry ({i}, {j}) outside the band");
        self.lower[hi][d] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth {
            0.0
        } else {
            self.lower[hi][d]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            for d in 0..=self.bandwidth.min(i) {
                let a = self.lower[i][d];
                y[i] += a * x[i - d];
                if d > 0 {
                    y[i - d] += a * x[i];
                }
            }
        }
        y
    }

    /// Solve `A x = rhs` by an `L D L^T` factorisation without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let w = self.bandwidth;
        // l[i][d] = L[i][i-d] for d >= 1
        let mut l = vec![vec![0.0; w + 1]; n];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for d in (1..=w.min(i)).rev() {
                let j = i - d;
                let mut s = self.lower[i][d];
                for k in j.saturating_sub(w).max(i.saturating_sub(w))..j {
                    s -= l[i][i - k] * diag[k] * l[j][j - k];
                }
                l[i][d] = s / diag[j];
            }
            let mut s = self.lower[i][0];
            for d in 1..=w.min(i) {
                s -= l[i][d] * l[i][d] * diag[i - d];
            }
            let scale: f64 = (0..=w.min(i)).map(|d| self.lower[i][d].abs()).sum::<f64>()
                + (1..=w)
                    .filter(|d| i + d < n)
                    .map(|d| self.lower[i + d][d].abs())
                    .sum::<f64>();
            if s.is_nan() || s.abs() <= PIVOT_TOL * scale || !s.is_finite() {
                return Err(Error::SingularSystem { row: i, pivot: s });
            }
            diag[i] = s;
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            for d in 1..=w.min(i) {
                y[i] -= l[i][d] * y[i - d];
            }
        }
        for (yi, di) in y.iter_mut().zip(&diag) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            for d in 1..=w {
                if i + d < n {
                    y[i] -= l[i + d][d] * y[i + d];
                }
            }
        }
        Ok(y)
    }
}

/// Symmetric sparse matrix in row maps.
#[derive(Debug, Clone)]
pub struct SparseSym {
    rows: Vec<BTreeMap<usize, f64>>,
}

struct Eliminated {
    row: usize,
    pivot: f64,
    rhs: f64,
    couplings: Vec<(usize, f64)>,
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += value;
        if i != j {
            *self.rows[j].entry(i).or_insert(0.0) += value;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(&j, &a)| a * x[j]).sum())
            .collect()
    }

    /// Gaussian elimination that first removes vertices with at most two
    /// off-diagonal neighbours (no fill beyond their neighbours), then solves
    /// the remaining core densely.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut rows = self.rows.clone();
        let mut b = rhs.to_vec();
        let scales: Vec<f64> = rows.iter().map(|r| r.values().map(|a| a.abs()).sum()).collect();
        let mut alive = vec![true; n];
        let off_degree = |r: &BTreeMap<usize, f64>, i: usize| r.keys().filter(|&&j| j != i).count();
        let mut stack: Vec<usize> = (0..n).filter(|&i| off_degree(&rows[i], i) <= 2).collect();
        let mut steps = Vec::new();
        while let Some(i) = stack.pop() {
            if !alive[i] || off_degree(&rows[i], i) > 2 {
                continue;
            }
            let pivot = rows[i].get(&i).copied().unwrap_or(0.0);
            if pivot.is_nan() || pivot.abs() <= PIVOT_TOL * scales[i] {
                return Err(Error::SingularSystem { row: i, pivot });
            }
            let couplings: Vec<(usize, f64)> = rows[i].iter().filter(|(&j, _)| j != i).map(|(&j, &a)| (j, a)).collect();
            for &(j, aji) in &couplings {
                rows[j].remove(&i);
                for &(k, aik) in &couplings {
                    *rows[j].entry(k).or_insert(0.0) -= aji * aik / pivot;
                }
                b[j] -= aji * b[i] / pivot;
            }
            alive[i] = false;
            steps.push(Eliminated {
                row: i,
                pivot,
                rhs: b[i],
                couplings: couplings.clone(),
            });
            for &(j, _) in &couplings {
                if off_degree(&rows[j], j) <= 2 {
                    stack.push(j);
                }
            }
        }
        let core: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let mut x = vec![0.0; n];
        if !core.is_empty() {
            let pos: BTreeMap<usize, usize> = core.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let m = core.len();
            let mut dense = DMatrix::<f64>::zeros(m, m);
            for (p, &i) in core.iter().enumerate() {
                for (&j, &a) in &rows[i] {
                    dense[(p, pos[&j])] = a;
                }
            }
            let rhs_core = DVector::from_iterator(m, core.iter().map(|&i| b[i]));
            let lu = dense.clone().full_piv_lu();
            let min_pivot = (0..m).map(|k| lu.u()[(k, k)].abs()).fold(f64::INFINITY, f64::min);
            let scale = dense.iter().map(|a| a.abs()).fold(0.0, f64::max);
            if min_pivot.is_nan() || min_pivot <= PIVOT_TOL * scale {
                return Err(Error::SingularSystem {
                    row: core[0],
                    pivot: min_pivot,
                });
            }
            let sol = lu
                .solve(&rhs_core)
                .ok_or_else(|| Error::SolverFailure("dense core solve failed".into()))?;
            for (p, &i) in core.iter().enumerate() {
                x[i] = sol[p];
            }
        }
        for step in steps.iter().rev() {
            let s: f64 = step.couplings.iter().map(|&(j, a)| a * x[j]).sum();
            x[step.row] = (step.rhs - s) / step.pivot;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
        a.clone()
            .lu()
            .solve(&DVector::from_column_slice(b))
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn tridiagonal_path_laplacian() {
        // Dirichlet Laplacian on a path of length 4 with unit weights
        let mut a = SymBanded::zeros(4, 1);
        for i in 0..4 {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x = a.solve(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let expected = [0.8, 0.6, 0.4, 0.2];
        for (u, v) in x.iter().zip(expected) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_banded_is_reported() {
        let mut a = SymBanded::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(0, 1, -1.0);
        assert!(matches!(a.solve(&[1.0, 0.0]), Err(Error::SingularSystem { .. })));
    }

    proptest! {
        #[test]
        fn pentadiagonal_matches_dense(seed in proptest::collection::vec(0.1f64..2.0, 30)) {
            let n = 10;
            let mut a = SymBanded::zeros(n, 2);
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                let d = 5.0 + seed[i];
                a.add(i, i, d);
                dense[(i, i)] += d;
                if i >= 1 {
                    let v = -seed[10 + i];
                    a.add(i, i - 1, v);
                    dense[(i, i - 1)] += v;
                    dense[(i - 1, i)] += v;
                }
                if i >= 2 {
                    let v = seed[20 + i] - 1.0;
                    a.add(i, i - 2, v);
                    dense[(i, i - 2)] += v;
                    dense[(i - 2, i)] += v;
                }
            }
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = a.solve(&rhs).unwrap();
            let y = dense_solve(&dense, &rhs);
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            let back = a.mul_vec(&x);
            for (u, v) in back.iter().zip(&rhs) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn sparse_solver_matches_dense(
            weights in proptest::collection::vec(0.1f64..3.0, 40),
            extra in proptest::collection::vec((0usize..12, 0usize..12), 0..8),
        ) {
            let n = 12;
            let mut a = SparseSym::zeros(n);
            let mut dense = DMatrix::<f64>::zeros(n, n);
            let mut link = |a: &mut SparseSym, i: usize, j: usize, w: f64| {
                a.add(i, i, w);
                a.add(j, j, w);
                a.add(i, j, -w);
                dense[(i, i)] += w;
                dense[(j, j)] += w;
                dense[(i, j)] -= w;
                dense[(j, i)] -= w;
            };
            for (i, &w) in weights.iter().take(n - 1).enumerate() {
                link(&mut a, i, i + 1, w);
            }
            for (k, &(i, j)) in extra.iter().enumerate() {
                if i != j {
                    link(&mut a, i, j, weights[20 + k]);
                }
            }
            // grounding keeps the system definite
            a.add(0, 0, 1.0);
            dense[(0, 0)] += 1.0;
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
            let x = a.solve(&rhs).unwrap();
            let y = dense_solve(&dense, &rhs);
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()));
            }
        }
    }
}

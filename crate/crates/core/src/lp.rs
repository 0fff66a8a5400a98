//! Dense two-phase simplex for small linear programs.
//!
//! Pivoting follows Bland's rule, so results are deterministic and cycling cannot occur.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    /// Index of the right-hand-side column (also the objective row).
    rhs: usize,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        self.t.row_mut(row).scale_mut(1.0 / p);
        let pivot_row = self.t.row(row).into_owned();
        for r in 0..self.t.nrows() {
            let f = self.t[(r, col)];
            if r != row && f != 0.0 {
                for (j, &p) in pivot_row.iter().enumerate() {
                    self.t[(r, j)] -= f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimises the objective row over columns `< allowed`; `Ok(false)` means unbounded.
    fn optimise(&mut self, allowed: usize) -> Result<bool> {
        let obj = self.rows();
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..allowed).find(|&j| self.t[(obj, j)] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..obj {
                let a = self.t[(r, col)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(r, self.rhs)] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((best, br)) => {
                            if ratio < br - 1e-12 * br.abs().max(1.0)
                                || (ratio <= br + 1e-12 * br.abs().max(1.0) && self.basis[r] < self.basis[best])
                            {
                                Some((r, ratio))
                            } else {
                                Some((best, br))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return Ok(false),
            }
        }
        Err(Error::Conditioning("simplex pivot limit reached".into()))
    }
}

/// Solves `min cᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn solve_standard(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<LpOutcome> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n {
        return Err(Error::Argument("LP dimensions disagree".into()));
    }
    // Columns: n structural, m artificial, rhs. Rows: m constraints, objective.
    let rhs = n + m;
    let mut t = DMatrix::zeros(m + 1, rhs + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, rhs)] = sign * b[i];
    }
    for j in (0..n).chain(std::iter::once(rhs)) {
        t[(m, j)] = -(0..m).map(|i| t[(i, j)]).sum::<f64>();
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), rhs };
    tab.optimise(n + m)?;

    let scale = b.amax().max(1.0);
    if -tab.t[(m, rhs)] > 1e-9 * scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive zero-level artificials out of the basis; rows that cannot be repaired are redundant.
    let mut keep = vec![true; m];
    for r in 0..m {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| tab.t[(r, j)].abs() > 1e-9) {
                Some(j) => tab.pivot(r, j),
                None => keep[r] = false,
            }
        }
    }
    let kept: Vec<usize> = (0..m).filter(|&r| keep[r]).collect();
    let mut t2 = DMatrix::zeros(kept.len() + 1, n + 1);
    let mut basis = Vec::with_capacity(kept.len());
    for (i, &r) in kept.iter().enumerate() {
        for j in 0..n {
            t2[(i, j)] = tab.t[(r, j)];
        }
        t2[(i, n)] = tab.t[(r, rhs)];
        basis.push(tab.basis[r]);
    }
    let obj = kept.len();
    for j in 0..n {
        t2[(obj, j)] = c[j];
    }
    for (i, &bj) in basis.iter().enumerate() {
        let cb = c[bj];
        if cb != 0.0 {
            for j in 0..=n {
                t2[(obj, j)] -= cb * t2[(i, j)];
            }
        }
    }
    let mut tab = Tableau { t: t2, basis, rhs: n };
    if !tab.optimise(n)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = DVector::zeros(n);
    for (i, &bj) in tab.basis.iter().enumerate() {
        x[bj] = tab.t[(i, n)].max(0.0);
    }
    let objective = c.dot(&x);
    Ok(LpOutcome::Optimal { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(out: LpOutcome) -> (DVector<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let a = DMatrix::from_row_slice(3, 5, &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, 3.0, 2.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 12.0, 18.0]);
        let c = DVector::from_vec(vec![-3.0, -5.0, 0.0, 0.0, 0.0]);
        let (x, obj) = optimum(solve_standard(&a, &b, &c).unwrap());
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
        assert!((obj + 36.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // x + y = 2 twice, -x = -0.5, min y.
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, -1.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 2.0, -0.5]);
        let c = DVector::from_vec(vec![0.0, 1.0]);
        let (x, obj) = optimum(solve_standard(&a, &b, &c).unwrap());
        assert!((x[0] - 0.5).abs() < 1e-12 && (obj - 1.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![-1.0]);
        assert_eq!(solve_standard(&a, &b, &DVector::from_vec(vec![1.0, 1.0])).unwrap(), LpOutcome::Infeasible);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0]);
        assert_eq!(solve_standard(&a, &b, &DVector::from_vec(vec![0.0, -1.0])).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let a = DMatrix::from_row_slice(
            3,
            7,
            &[0.5, -5.5, -2.5, 9.0, 1.0, 0.0, 0.0, 0.5, -1.5, -0.5, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        );
        let b = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let c = DVector::from_vec(vec![-10.0, 57.0, 9.0, 24.0, 0.0, 0.0, 0.0]);
        let (x, obj) = optimum(solve_standard(&a, &b, &c).unwrap());
        assert!((obj + 1.0).abs() < 1e-9, "objective {obj}, x = {x}");
    }
}

//! Dense two-phase simplex for small standard-form programs
//! `maximize cᵀx  s.t.  A x = b, x ≥ 0`, with Bland's rule against cycling.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const FEASIBILITY_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs `c_B B⁻¹ A_j − c_j`; the last entry is the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = col;
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let rhs = self.rhs();
        let mut obj = vec![0.0; rhs + 1];
        for (j, o) in obj.iter_mut().enumerate().take(rhs) {
            *o = -cost[j];
        }
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(row) {
                    *o += cb * v;
                }
            }
        }
        self.obj = obj;
    }

    /// Runs simplex iterations over the allowed columns. Returns `false` if unbounded.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        let rhs = self.rhs();
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..allowed).find(|&j| self.obj[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14
                                || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, col),
            }
        }
        Err(Error::LinearProgram("pivot limit reached".into()))
    }
}

/// Solves `maximize cᵀx s.t. A x = b, x ≥ 0`. `a` is row-major with `c.len()` columns.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::LinearProgram(
            "inconsistent problem dimensions".into(),
        ));
    }
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width + 1];
        for (j, v) in row.iter().enumerate() {
            t[j] = sign * v;
        }
        t[n + i] = 1.0;
        t[width] = sign * bi;
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        obj: Vec::new(),
        basis: (n..n + m).collect(),
        width,
    };

    // Phase 1: maximize −Σ artificials.
    let mut phase1_cost = vec![0.0; width];
    phase1_cost[n..].iter_mut().for_each(|c| *c = -1.0);
    tab.set_objective(&phase1_cost);
    tab.optimize(width)?;
    let infeasibility = -tab.obj[width];
    if infeasibility > FEASIBILITY_TOL {
        return Err(Error::LinearProgram(format!(
            "infeasible (phase-1 residual {infeasibility:e})"
        )));
    }

    // Pivot remaining artificials out of the basis; rows where that is impossible are redundant.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            let col = (0..n)
                .filter(|&j| tab.rows[r][j].abs() > PIVOT_TOL)
                .max_by(|&x, &y| tab.rows[r][x].abs().total_cmp(&tab.rows[r][y].abs()));
            match col {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(c);
    tab.set_objective(&cost);
    if !tab.optimize(n)? {
        return Err(Error::LinearProgram("unbounded".into()));
    }
    let mut x = vec![0.0; n];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.rows[i][width].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let c = [3.0, 5.0, 0.0, 0.0, 0.0];
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 1.0, 0.0],
            vec![3.0, 2.0, 0.0, 0.0, 1.0],
        ];
        let s = maximize(&c, &a, &[4.0, 12.0, 18.0]).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_and_negative_rhs() {
        // x + y = 1 stated twice, −x = −0.25
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![-1.0, 0.0]];
        let s = maximize(&[0.0, 1.0], &a, &[1.0, 2.0, -0.25]).unwrap();
        assert!((s.x[0] - 0.25).abs() < 1e-12 && (s.x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert!(maximize(&[1.0, 0.0], &a, &[-1.0]).is_err());
        let a = vec![vec![1.0, -1.0]];
        let e = maximize(&[1.0, 0.0], &a, &[0.0]).unwrap_err();
        assert!(e.to_string().contains("unbounded"));
    }
}

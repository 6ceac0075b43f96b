//! Primal active-set solver for `minimize ½ vᵀ G v  s.t.  dᵀv = 1, v ≥ 0`
//! with `G` symmetric positive semidefinite (possibly singular) and `d ≥ 0`.
//!
//! Equality-constrained subproblems are solved through the SVD pseudo-inverse
//! of the KKT matrix, which stays well defined when `G` restricted to the free
//! variables is singular: a convex quadratic bounded below on an affine set
//! always has a consistent KKT system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub v: Vec<f64>,
    pub objective: f64,
    /// Multiplier of `dᵀv = 1`.
    pub lambda: f64,
    /// Scaled KKT residual (stationarity, dual feasibility, complementarity, primal feasibility).
    pub kkt_residual: f64,
    pub iterations: usize,
}

fn gradient(g: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    g * v
}

/// Least-squares multiplier of `dᵀv = 1` from the free coordinates.
fn fit_lambda(grad: &DVector<f64>, d: &DVector<f64>, free: &[usize]) -> f64 {
    let num: f64 = free.iter().map(|&i| grad[i] * d[i]).sum();
    let den: f64 = free.iter().map(|&i| d[i] * d[i]).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn minimize_on_slice(g: &DMatrix<f64>, d: &[f64]) -> Result<QpSolution> {
    let n = d.len();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::QuadraticProgram(format!(
            "{}x{} Hessian for {n} variables",
            g.nrows(),
            g.ncols()
        )));
    }
    let d = DVector::from_column_slice(d);
    if d.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::QuadraticProgram(
            "constraint vector must be finite and nonnegative".into(),
        ));
    }
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let dscale = d.amax();
    if dscale <= 0.0 {
        return Err(Error::QuadraticProgram(
            "dᵀv = 1 is infeasible for d = 0".into(),
        ));
    }

    // Start at the best feasible vertex e_j / d_j.
    let start = (0..n)
        .filter(|&j| d[j] > 0.0)
        .min_by(|&a, &b| (g[(a, a)] / (d[a] * d[a])).total_cmp(&(g[(b, b)] / (d[b] * d[b]))))
        .expect("some d_j > 0");
    let mut v = DVector::zeros(n);
    v[start] = 1.0 / d[start];
    let mut active: Vec<bool> = (0..n).map(|j| j != start).collect();

    // A direction this small relative to v is KKT-solve noise; stopping there
    // costs O(zero_step²) in the objective since the face optimum is stationary.
    let zero_step = 1e-10;
    let mut just_released: Option<usize> = None;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::QuadraticProgram("iteration limit reached".into()));
        }
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let grad = gradient(g, &v);
        let f = free.len();

        // [G_FF d_F; d_Fᵀ 0] [p_F; −λ] = [−(G v)_F; 0]
        let mut kkt = DMatrix::zeros(f + 1, f + 1);
        let mut rhs = DVector::zeros(f + 1);
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                kkt[(a, b)] = g[(i, j)];
            }
            kkt[(a, f)] = d[i];
            kkt[(f, a)] = d[i];
            rhs[a] = -grad[i];
        }
        let svd = kkt.svd(true, true);
        let eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let sol = svd
            .solve(&rhs, eps)
            .map_err(|e| Error::QuadraticProgram(e.to_string()))?;
        let mut p = DVector::zeros(n);
        for (a, &i) in free.iter().enumerate() {
            p[i] = sol[a];
        }

        let vnorm = v.amax();
        if p.amax() <= zero_step * vnorm {
            let lambda = fit_lambda(&grad, &d, &free);
            let worst = (0..n)
                .filter(|&i| active[i])
                .map(|i| (i, grad[i] - lambda * d[i]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((i, mu)) if mu < -1e-12 * scale * vnorm => {
                    active[i] = false;
                    just_released = Some(i);
                }
                _ => return Ok(finish(g, &d, v, lambda, iterations)),
            }
            continue;
        }

        let mut step = 1.0;
        let mut blocking = None;
        for &i in &free {
            if p[i] < 0.0 {
                let ratio = -v[i] / p[i];
                if ratio < step {
                    step = ratio;
                    blocking = Some(i);
                }
            }
        }
        // A bound released on a noise-level multiplier blocks at once: the face optimum is final.
        if let Some(i) = blocking.filter(|&i| Some(i) == just_released && step <= zero_step) {
            active[i] = true;
            let free: Vec<usize> = (0..n).filter(|&j| !active[j]).collect();
            let lambda = fit_lambda(&grad, &d, &free);
            return Ok(finish(g, &d, v, lambda, iterations));
        }
        just_released = None;
        v += &p * step;
        if let Some(i) = blocking {
            v[i] = 0.0;
            active[i] = true;
        }
        for i in 0..n {
            if v[i] < 0.0 {
                v[i] = 0.0;
            }
        }
    }
}

fn finish(
    g: &DMatrix<f64>,
    d: &DVector<f64>,
    v: DVector<f64>,
    lambda: f64,
    iterations: usize,
) -> QpSolution {
    let objective = 0.5 * v.dot(&(g * &v));
    let kkt_residual = kkt_residual(g, d, &v, lambda);
    QpSolution {
        v: v.iter().copied().collect(),
        objective,
        lambda,
        kkt_residual,
        iterations,
    }
}

/// Max-norm KKT violation scaled by `‖G‖·‖v‖ + |λ|·‖d‖`.
pub fn kkt_residual(g: &DMatrix<f64>, d: &DVector<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    let grad = g * v;
    let scale = g.amax() * v.amax() + lambda.abs() * d.amax();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut r: f64 = (d.dot(v) - 1.0).abs();
    for i in 0..v.len() {
        let mu = grad[i] - lambda * d[i];
        if v[i] > 0.0 {
            r = r.max(mu.abs() / scale);
        } else {
            r = r.max((-mu).max(0.0) / scale);
        }
        r = r.max((-v[i]).max(0.0));
    }
    r
}

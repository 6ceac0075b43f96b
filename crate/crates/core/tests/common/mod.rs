//! Scalar formulas for commuting (simultaneously diagonal) channels and shared
//! fixture channels. Nothing here touches the operator code path.

#![allow(dead_code)]

use cq_covert::{CqWiretapChannel, DensityOperator};
use num_complex::Complex64;

pub fn diag(p: &[f64]) -> DensityOperator {
    DensityOperator::diagonal(p).unwrap()
}

/// Diagonal of a diagonal density operator.
pub fn spectrum(d: &DensityOperator) -> Vec<f64> {
    (0..d.dim()).map(|i| d.matrix()[(i, i)].re).collect()
}

pub fn shannon(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>()
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in p.iter().zip(q) {
        if *a > 0.0 {
            if *b == 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).ln();
        }
    }
    s
}

pub fn chi_sq(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * a / b).sum::<f64>() - 1.0
}

pub fn mix(weights: &[f64], dists: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; dists[0].len()];
    for (w, d) in weights.iter().zip(dists) {
        for (o, v) in out.iter_mut().zip(d) {
            *o += w * v;
        }
    }
    out
}

/// Mutual information `I(X;Y)` for input `p` and rows `W(·|x)`.
pub fn mutual_information(p: &[f64], rows: &[Vec<f64>]) -> f64 {
    let avg = mix(p, rows);
    p.iter()
        .zip(rows)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, r)| w * kl(r, &avg))
        .sum()
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-13 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..n {
                    a[r][j] -= f * a[c][j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// The square-root-law constant of a commuting channel by enumeration of the
/// support of `P̃`: on a support `S` with invertible centered Gram matrix `G_S`
/// the stationary point is `v ∝ G_S⁻¹ d_S` with ratio `√(2 d_Sᵀ G_S⁻¹ d_S)`;
/// the maximum over supports with `v > 0` is `L`.
pub fn classical_l(sigma: &[Vec<f64>], rho: &[Vec<f64>]) -> f64 {
    let k = sigma.len();
    let d: Vec<f64> = (1..k).map(|x| kl(&sigma[x], &sigma[0])).collect();
    let g = |x: usize, y: usize| -> f64 {
        rho[0]
            .iter()
            .enumerate()
            .map(|(z, r0)| rho[x][z] * rho[y][z] / r0)
            .sum::<f64>()
            - 1.0
    };
    let m = k - 1;
    let mut best: f64 = 0.0;
    for mask in 1u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let gs: Vec<Vec<f64>> = s
            .iter()
            .map(|&i| s.iter().map(|&j| g(i + 1, j + 1)).collect())
            .collect();
        let ds: Vec<f64> = s.iter().map(|&i| d[i]).collect();
        let Some(w) = solve(gs, ds.clone()) else {
            continue;
        };
        if w.iter().all(|&x| x > 0.0) {
            let q: f64 = ds.iter().zip(&w).map(|(a, b)| a * b).sum();
            best = best.max((2.0 * q).sqrt());
        }
    }
    best
}

/// `ρ(1), ρ(2)` average to `ρ(0)` while `σ(1) = |0⟩⟨0|`, `σ(2) = |1⟩⟨1|`.
pub fn witness_channel() -> CqWiretapChannel {
    CqWiretapChannel::new(
        vec![diag(&[0.5, 0.5]), diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
        vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25]), diag(&[0.25, 0.75])],
    )
    .unwrap()
}

pub fn two_symbol_channel() -> CqWiretapChannel {
    CqWiretapChannel::new(
        vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
        vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
    )
    .unwrap()
}

/// `σ(1) = |+⟩⟨+|` leaves `supp σ(0) = span{|0⟩}`.
pub fn off_support_channel() -> CqWiretapChannel {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
    CqWiretapChannel::new(
        vec![diag(&[1.0, 0.0]), plus],
        vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
    )
    .unwrap()
}

/// The fixed channel of the simulator checks: χ²(ρ(1), ρ(0)) = 0.01.
pub fn simulator_channel() -> CqWiretapChannel {
    CqWiretapChannel::new(
        vec![diag(&[0.9, 0.1]), diag(&[0.1, 0.9])],
        vec![diag(&[0.5, 0.5]), diag(&[0.55, 0.45])],
    )
    .unwrap()
}

/// Kubo–Mori χ² from `∫₀^∞ tr[Δ (ρ0+t)⁻¹ Δ (ρ0+t)⁻¹] dt` with `t = u/(1−u)`,
/// composite Simpson on `u ∈ [0, 1]`.
pub fn kubo_mori_integral(rho_tilde: &DensityOperator, rho0: &DensityOperator) -> f64 {
    let n = rho0.dim();
    let delta = rho_tilde.matrix() - rho0.matrix();
    let integrand = |u: f64| -> f64 {
        if u >= 1.0 {
            return (&delta * &delta).trace().re;
        }
        let t = u / (1.0 - u);
        let shifted = rho0.matrix() + cq_covert::CMatrix::identity(n, n) * Complex64::new(t, 0.0);
        let inv = shifted.try_inverse().expect("ρ0 + t is invertible");
        let m = &delta * &inv;
        (&m * &m).trace().re / ((1.0 - u) * (1.0 - u))
    };
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let mut s = integrand(0.0) + integrand(1.0);
    for i in 1..steps {
        s += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

//! The square-root-law scaling constant
//!
//! ```text
//! L = max_{P̃ : P̃(0)=0}  Σ_x P̃(x) D(σ(x)‖σ(0)) / sqrt(½ (tr[ρ̃² ρ(0)⁻¹] − 1)),   ρ̃ = Σ_x P̃(x) ρ(x).
//! ```
//!
//! On the simplex `tr[ρ̃²ρ(0)⁻¹] − 1 = P̃ᵀ(Q − 𝟙𝟙ᵀ)P̃` with the Gram matrix
//! `Q[x][y] = ½ tr[{ρ(x), ρ(y)} ρ(0)⁻¹]`, and `Q − 𝟙𝟙ᵀ` is PSD because
//! `vᵀ(Q − 𝟙𝟙ᵀ)v = tr[(ρ̃_v − s ρ(0))² ρ(0)⁻¹]` for `ρ̃_v = Σ v_x ρ(x)`, `s = Σ v_x`.
//! The ratio is invariant under scaling `P̃`, so fixing the numerator
//! `dᵀv = 1` turns the maximization into a convex QP whose minimum `m` gives
//! `L = 1/√m`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{average_output_state, CqWiretapChannel, InputDistribution, Side};
use crate::density::DensityOperator;
use crate::divergence::{chi_squared, relative_entropy};
use crate::error::{Error, Result};
use crate::operator::{
    matrix_fn, trace_of_product, CMatrix, HermitianOperator, ScalarFn, SUPPORT_TOL,
};
use crate::qp;
use crate::regime::indistinguishable_symbols;

/// Tolerance of the runtime check of the PSD identity behind the QP.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstantResult {
    /// The scaling constant, in nats per `√(nδ)`.
    pub l: f64,
    /// Maximizer `P̃*` with `P̃*(0) = 0`.
    pub optimizer: InputDistribution,
    /// `d[x − 1] = D(σ(x)‖σ(0))` for `x = 1..k`.
    pub d: Vec<f64>,
    /// `Q[x − 1][y − 1]` for `x, y = 1..k`.
    pub gram: Vec<Vec<f64>>,
    /// Minimum of `½ vᵀ(Q − 𝟙𝟙ᵀ)v` subject to `dᵀv = 1, v ≥ 0`; absent when `d ≡ 0`.
    pub qp_objective: Option<f64>,
    pub kkt_residual: f64,
    /// `|vᵀ(Q − 𝟙𝟙ᵀ)v − tr[(ρ̃_v − sρ(0))²ρ(0)⁻¹]|` at the optimum.
    pub identity_residual: f64,
    /// The ratio evaluated directly at `optimizer` through the χ²-divergence.
    pub ratio_at_optimizer: f64,
    /// Smallest eigenvalue of `Q − 𝟙𝟙ᵀ`.
    pub centered_gram_min_eigenvalue: f64,
    /// Symbols carrying positive mass in `optimizer`.
    pub support: Vec<usize>,
    /// Symbols `x ≠ 0` with `σ(x) = σ(0)`.
    pub indistinguishable: Vec<usize>,
    /// The maximum over `P̃` supported on receiver-distinguishable symbols only.
    pub l_distinguishable_only: f64,
}

/// `d(x) = D(σ(x)‖σ(0))` for `x = 1..k`. Infinite entries mean the receiver
/// support condition fails and the channel is not in the square-root regime.
pub fn divergence_vector(ch: &CqWiretapChannel) -> Result<Vec<f64>> {
    let mut d = Vec::with_capacity(ch.k() - 1);
    for x in 1..ch.k() {
        let v = relative_entropy(ch.sigma(x), ch.sigma(0))?.value();
        if !v.is_finite() {
            return Err(Error::WrongRegime(format!(
                "D(sigma({x}) || sigma(0)) is infinite: receiver support condition fails"
            )));
        }
        d.push(v);
    }
    Ok(d)
}

fn inverse_rho0(ch: &CqWiretapChannel) -> Result<HermitianOperator> {
    let min = ch.rho(0).operator().min_eigenvalue()?;
    if min <= SUPPORT_TOL {
        return Err(Error::SingularReference {
            min_eigenvalue: min,
        });
    }
    matrix_fn(ch.rho(0).operator(), ScalarFn::Power(-1.0), false)
}

/// `Q[x][y] = ½ tr[(ρ(x)ρ(y) + ρ(y)ρ(x)) ρ(0)⁻¹]` over `x, y = 1..k`.
pub fn chi_sq_gram(ch: &CqWiretapChannel) -> Result<Vec<Vec<f64>>> {
    let inv = inverse_rho0(ch)?;
    let m = ch.k() - 1;
    let mut q = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let (a, b) = (ch.rho(i + 1).matrix(), ch.rho(j + 1).matrix());
            let anti: CMatrix = a * b + b * a;
            let v = 0.5 * trace_of_product(&anti, inv.matrix()).re;
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    Ok(q)
}

/// `Σ_x P̃(x) D(σ(x)‖σ(0)) / sqrt(½ χ²(ρ̃, ρ(0)))` evaluated literally; `P̃(0)` must be 0.
pub fn scaling_ratio(ch: &CqWiretapChannel, p_tilde: &InputDistribution) -> Result<f64> {
    if p_tilde.probs()[0] != 0.0 {
        return Err(Error::InvalidDistribution("P̃(0) must be 0".into()));
    }
    let d = divergence_vector(ch)?;
    let num: f64 = p_tilde.probs()[1..]
        .iter()
        .zip(&d)
        .map(|(p, d)| p * d)
        .sum();
    let rho_tilde = average_output_state(ch, p_tilde, Side::Eavesdropper)?;
    let chi2 = chi_squared(&rho_tilde, ch.rho(0))?.value();
    if chi2 <= 0.0 {
        return Err(Error::WrongRegime(
            "χ² denominator vanishes: the channel admits a covert mixture".into(),
        ));
    }
    Ok(num / (0.5 * chi2).sqrt())
}

fn unnormalized_mixture(ch: &CqWiretapChannel, weights: &[f64]) -> CMatrix {
    let dz = ch.dz();
    let mut acc = CMatrix::zeros(dz, dz);
    for (x, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            acc += ch.rho(x).matrix() * Complex64::new(w, 0.0);
        }
    }
    acc
}

fn solve_subset(
    centered: &DMatrix<f64>,
    d: &[f64],
    subset: &[usize],
) -> Result<Option<(qp::QpSolution, Vec<usize>)>> {
    let idx: Vec<usize> = subset.iter().copied().collect();
    if idx.iter().all(|&i| d[i] <= 0.0) {
        return Ok(None);
    }
    let g = DMatrix::from_fn(idx.len(), idx.len(), |a, b| centered[(idx[a], idx[b])]);
    let dd: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    Ok(Some((qp::minimize_on_slice(&g, &dd)?, idx)))
}

/// Maximizes the scaling ratio over all `P̃` with `P̃(0) = 0`.
///
/// Precondition: the channel is sanitized and in the square-root regime.
pub fn scaling_constant(ch: &CqWiretapChannel) -> Result<ScalingConstantResult> {
    let k = ch.k();
    let d = divergence_vector(ch)?;
    let gram = chi_sq_gram(ch)?;
    let m = k - 1;
    let centered = DMatrix::from_fn(m, m, |i, j| gram[i][j] - 1.0);
    let centered_gram_min_eigenvalue = centered
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let indistinguishable = indistinguishable_symbols(ch, 1e-9)?;

    let all: Vec<usize> = (0..m).collect();
    let distinguishable: Vec<usize> = (0..m)
        .filter(|i| !indistinguishable.contains(&(i + 1)))
        .collect();

    let Some((sol, idx)) = solve_subset(&centered, &d, &all)? else {
        let mut probs = vec![0.0; k];
        probs[1] = 1.0;
        return Ok(ScalingConstantResult {
            l: 0.0,
            optimizer: InputDistribution::new(probs)?,
            d,
            gram,
            qp_objective: None,
            kkt_residual: 0.0,
            identity_residual: 0.0,
            ratio_at_optimizer: 0.0,
            centered_gram_min_eigenvalue,
            support: vec![1],
            indistinguishable,
            l_distinguishable_only: 0.0,
        });
    };
    let min_value = sol.objective;
    if min_value <= 1e-14 {
        return Err(Error::WrongRegime(
            "χ² denominator vanishes at the optimum: the channel admits a covert mixture".into(),
        ));
    }
    let l = 1.0 / min_value.sqrt();

    let mut weights = vec![0.0; k];
    for (&i, &v) in idx.iter().zip(&sol.v) {
        weights[i + 1] = v;
    }
    let s: f64 = weights.iter().sum();

    // vᵀ(Q − 𝟙𝟙ᵀ)v = tr[(ρ̃_v − sρ(0))² ρ(0)⁻¹]
    let inv = inverse_rho0(ch)?;
    let dev = unnormalized_mixture(ch, &weights) - ch.rho(0).matrix() * Complex64::new(s, 0.0);
    let direct = trace_of_product(&(&dev * &dev), inv.matrix()).re;
    let quad = 2.0 * min_value;
    let identity_residual = (quad - direct).abs();
    if identity_residual > IDENTITY_TOL * quad.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "Gram identity violated at the optimum: {quad:e} vs {direct:e}"
        )));
    }

    let optimizer = InputDistribution::new(weights.iter().map(|w| w / s).collect())?;
    let ratio_at_optimizer = scaling_ratio(ch, &optimizer)?;
    let support = optimizer.support();

    let l_distinguishable_only = if distinguishable.len() == all.len() {
        l
    } else {
        match solve_subset(&centered, &d, &distinguishable)? {
            Some((s, _)) if s.objective > 0.0 => 1.0 / s.objective.sqrt(),
            _ => 0.0,
        }
    };

    Ok(ScalingConstantResult {
        l,
        optimizer,
        d,
        gram,
        qp_objective: Some(min_value),
        kkt_residual: sol.kkt_residual,
        identity_residual,
        ratio_at_optimizer,
        centered_gram_min_eigenvalue,
        support,
        indistinguishable,
        l_distinguishable_only,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOracleResult {
    pub value: f64,
    /// Best grid point as a distribution over all `k` symbols.
    pub best: Vec<f64>,
    pub points: u64,
    pub resolution: f64,
}

/// Number of compositions of `steps` into `parts` nonnegative parts.
pub fn grid_size(steps: u64, parts: usize) -> u64 {
    // C(steps + parts − 1, parts − 1)
    let r = parts.saturating_sub(1) as u64;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (steps + r - i) as u128 / (i + 1) as u128;
    }
    acc.min(u64::MAX as u128) as u64
}

/// Default cap on the number of oracle grid points.
pub const DEFAULT_GRID_CAP: u64 = 50_000_000;

/// Brute-force maximum of the scaling ratio over the simplex grid with the given
/// step on the nonzero symbols. Lower-bounds [`scaling_constant`]; evaluates the
/// χ²-divergence literally for every point and never touches the Gram matrix.
pub fn scaling_constant_grid_oracle(
    ch: &CqWiretapChannel,
    resolution: f64,
    max_points: u64,
) -> Result<GridOracleResult> {
    let k = ch.k();
    if k > 5 {
        return Err(Error::InvalidParameter(format!(
            "grid oracle supports k ≤ 5, got {k}"
        )));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} outside (0, 1]"
        )));
    }
    let steps = (1.0 / resolution).round() as u64;
    let parts = k - 1;
    let points = grid_size(steps, parts);
    if points > max_points {
        return Err(Error::InvalidParameter(format!(
            "grid of {points} points exceeds the cap of {max_points}"
        )));
    }
    let mut d = Vec::with_capacity(parts);
    for x in 1..k {
        d.push(relative_entropy(ch.sigma(x), ch.sigma(0))?.value());
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::WrongRegime("infinite receiver divergence".into()));
    }
    let inv = {
        let rho0: &DensityOperator = ch.rho(0);
        let min = rho0.operator().min_eigenvalue()?;
        if min <= SUPPORT_TOL {
            return Err(Error::SingularReference {
                min_eigenvalue: min,
            });
        }
        matrix_fn(rho0.operator(), ScalarFn::Power(-1.0), false)?
    };
    let states: Vec<CMatrix> = (1..k).map(|x| ch.rho(x).matrix().clone()).collect();

    let eval = |counts: &[u64]| -> f64 {
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
        let num: f64 = probs.iter().zip(&d).map(|(p, d)| p * d).sum();
        if num <= 0.0 {
            return 0.0;
        }
        let dz = states[0].nrows();
        let mut rho = CMatrix::zeros(dz, dz);
        for (p, s) in probs.iter().zip(&states) {
            if *p != 0.0 {
                rho += s * Complex64::new(*p, 0.0);
            }
        }
        let chi2 = trace_of_product(&(&rho * &rho), inv.matrix()).re - 1.0;
        if chi2 <= 0.0 {
            f64::INFINITY
        } else {
            num / (0.5 * chi2).sqrt()
        }
    };

    // The first coordinate indexes independent chunks.
    let chunk = |first: u64| -> (f64, Vec<u64>) {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut counts = vec![0u64; parts];
        counts[0] = first;
        visit_compositions(&mut counts, 1, steps - first, &mut |c| {
            let v = eval(c);
            if v > best.0 {
                best = (v, c.to_vec());
            }
        });
        best
    };
    let firsts: Vec<u64> = (0..=steps).collect();
    #[cfg(feature = "parallel")]
    let results: Vec<(f64, Vec<u64>)> = {
        use rayon::prelude::*;
        firsts.par_iter().map(|&f| chunk(f)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(f64, Vec<u64>)> = firsts.iter().map(|&f| chunk(f)).collect();

    let (value, counts) = results
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, r| {
            if r.0 > acc.0 {
                r
            } else {
                acc
            }
        });
    let mut best = vec![0.0; k];
    for (i, c) in counts.iter().enumerate() {
        best[i + 1] = *c as f64 / steps as f64;
    }
    Ok(GridOracleResult {
        value,
        best,
        points,
        resolution,
    })
}

/// Calls `f` on every way to fill `counts[pos..]` with nonnegative integers summing to `remaining`.
fn visit_compositions(counts: &mut [u64], pos: usize, remaining: u64, f: &mut impl FnMut(&[u64])) {
    if pos == counts.len() {
        if remaining == 0 {
            f(counts);
        }
        return;
    }
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        visit_compositions(counts, pos + 1, remaining - c, f);
    }
    counts[pos] = 0;
}

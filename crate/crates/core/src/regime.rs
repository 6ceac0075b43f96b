//! Which covert-communication regime a (sanitized) channel falls in.
//!
//! * `PositiveRate`: some `P` mixes the eavesdropper states back to `ρ(0)` while
//!   putting mass on a symbol the receiver can tell apart from 0.
//! * `SquareRoot`: no such mixture, and every receiver state lies in `supp σ(0)`.
//! * `SuperSquareRoot`: no such mixture, but some receiver state leaves `supp σ(0)`.

use serde::{Deserialize, Serialize};

use crate::channel::{CqWiretapChannel, InputDistribution};
use crate::divergence::holevo_information;
use crate::error::{Error, Result};
use crate::lp;
use crate::operator::{support_contained, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityTolerances {
    /// Minimum mass on receiver-distinguishable symbols for a witness.
    pub min_mass: f64,
    /// Maximum Frobenius residual of `Σ P(x)ρ(x) − ρ(0)`.
    pub residual: f64,
    /// Trace-norm distance below which two states count as equal.
    pub state_equality: f64,
}

impl Default for FeasibilityTolerances {
    fn default() -> Self {
        Self {
            min_mass: 1e-7,
            residual: 1e-8,
            state_equality: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    PositiveRate,
    SquareRoot,
    SuperSquareRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub mixture_witness: Option<InputDistribution>,
    pub support_violations: Vec<usize>,
    pub lp_residual: f64,
    /// Symbols `x ≠ 0` with `σ(x) = σ(0)`.
    pub indistinguishable: Vec<usize>,
    /// `ρ(0)` is a mixture of the other eavesdropper states, but only through
    /// symbols the receiver cannot distinguish from 0.
    pub mixture_only_via_indistinguishable: bool,
}

/// Outcome of the phase-1 feasibility solve behind [`mixture_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSearch {
    pub witness: Option<InputDistribution>,
    /// Largest attainable mass on the candidate symbols.
    pub max_mass: f64,
    pub residual: f64,
}

/// Trace-norm test for `a = b`.
pub fn states_equal(
    a: &crate::density::DensityOperator,
    b: &crate::density::DensityOperator,
    tol: f64,
) -> Result<bool> {
    Ok(a.operator().sub(b.operator())?.trace_norm()? <= tol)
}

pub fn indistinguishable_symbols(ch: &CqWiretapChannel, tol: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for x in 1..ch.k() {
        if states_equal(ch.sigma(x), ch.sigma(0), tol)? {
            out.push(x);
        }
    }
    Ok(out)
}

/// Real coordinates of a traceless Hermitian matrix: diagonal except the last
/// entry (fixed by tracelessness), then real and imaginary upper off-diagonals.
fn traceless_coordinates(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d - 1);
    for i in 0..d.saturating_sub(1) {
        v.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

/// Maximizes `objective · P` over `{P on the simplex over symbols : Σ P(x) ρ(x) = ρ(0)}`,
/// where `symbols` must contain 0. Returns `P` indexed like `symbols`.
pub(crate) fn optimize_over_mixture_polytope(
    ch: &CqWiretapChannel,
    symbols: &[usize],
    objective: &[f64],
) -> Result<lp::LpSolution> {
    let rho0 = ch.rho(0).matrix();
    let columns: Vec<Vec<f64>> = symbols
        .iter()
        .map(|&x| traceless_coordinates(&(ch.rho(x).matrix() - rho0)))
        .collect();
    let rows = columns.first().map(|c| c.len()).unwrap_or(0);
    let mut a: Vec<Vec<f64>> = (0..rows)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    let mut b = vec![0.0; rows];
    a.push(vec![1.0; symbols.len()]);
    b.push(1.0);
    lp::maximize(objective, &a, &b)
}

/// `‖Σ P(x) ρ(x) − ρ(0)‖_F`.
pub fn mixture_residual(ch: &CqWiretapChannel, p: &InputDistribution) -> f64 {
    let mut acc = -ch.rho(0).matrix().clone();
    for (x, &w) in p.probs().iter().enumerate() {
        if w != 0.0 {
            acc += ch.rho(x).matrix() * num_complex::Complex64::new(w, 0.0);
        }
    }
    acc.norm()
}

fn search(
    ch: &CqWiretapChannel,
    candidates: &[usize],
    tol: &FeasibilityTolerances,
) -> Result<MixtureSearch> {
    if candidates.is_empty() {
        return Ok(MixtureSearch {
            witness: None,
            max_mass: 0.0,
            residual: 0.0,
        });
    }
    // Every symbol may take part in the mixture; only mass on candidates counts.
    let symbols: Vec<usize> = (0..ch.k()).collect();
    let objective: Vec<f64> = symbols
        .iter()
        .map(|x| if candidates.contains(x) { 1.0 } else { 0.0 })
        .collect();
    let sol = optimize_over_mixture_polytope(ch, &symbols, &objective)?;
    let mut probs = sol.x.clone();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let p = InputDistribution::new(probs)?;
    let residual = mixture_residual(ch, &p);
    let max_mass = sol.objective;
    if max_mass > tol.min_mass {
        if residual > tol.residual {
            return Err(Error::LinearProgram(format!(
                "witness residual {residual:e} exceeds tolerance {:e}",
                tol.residual
            )));
        }
        Ok(MixtureSearch {
            witness: Some(p),
            max_mass,
            residual,
        })
    } else {
        Ok(MixtureSearch {
            witness: None,
            max_mass,
            residual,
        })
    }
}

/// Searches for `P` with `Σ P(x)ρ(x) = ρ(0)` that puts mass on some `x` with `σ(x) ≠ σ(0)`.
pub fn mixture_feasible(
    ch: &CqWiretapChannel,
    tol: &FeasibilityTolerances,
) -> Result<MixtureSearch> {
    let same = indistinguishable_symbols(ch, tol.state_equality)?;
    let candidates: Vec<usize> = (1..ch.k()).filter(|x| !same.contains(x)).collect();
    search(ch, &candidates, tol)
}

/// Symbols whose receiver state is not supported inside `supp σ(0)`.
pub fn check_support_condition(ch: &CqWiretapChannel) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for x in 1..ch.k() {
        if !support_contained(ch.sigma(x).operator(), ch.sigma(0).operator())? {
            out.push(x);
        }
    }
    Ok(out)
}

pub fn classify(ch: &CqWiretapChannel, tol: &FeasibilityTolerances) -> Result<RegimeReport> {
    let same = indistinguishable_symbols(ch, tol.state_equality)?;
    let found = mixture_feasible(ch, tol)?;
    let support_violations = check_support_condition(ch)?;
    let regime = match (&found.witness, support_violations.is_empty()) {
        (Some(_), _) => Regime::PositiveRate,
        (None, true) => Regime::SquareRoot,
        (None, false) => Regime::SuperSquareRoot,
    };
    let mixture_only_via_indistinguishable =
        found.witness.is_none() && !same.is_empty() && search(ch, &same, tol)?.witness.is_some();
    if let Some(w) = &found.witness {
        debug_assert!(
            holevo_information(ch.states(crate::channel::Side::Receiver), w)?.value() >= 0.0
        );
    }
    Ok(RegimeReport {
        regime,
        mixture_witness: found.witness,
        support_violations,
        lp_residual: found.residual,
        indistinguishable: same,
        mixture_only_via_indistinguishable,
    })
}

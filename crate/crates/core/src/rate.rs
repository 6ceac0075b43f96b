//! Covert capacity in the positive-rate regime:
//! `max χ(P)` over `{P on the simplex : Σ_x P(x) ρ(x) = ρ(0)}`.
//!
//! Away-step conditional gradient. The ascent vertex comes from an LP over the
//! mixture polytope; the active vertex set is kept explicitly so that mass can
//! be removed from poor vertices, which the plain method only does slowly.

use serde::{Deserialize, Serialize};

use crate::channel::{average_output_state, CqWiretapChannel, InputDistribution, Side};
use crate::divergence::{holevo_information, relative_entropy};
use crate::error::{Error, Result};
use crate::regime::{
    classify, mixture_residual, optimize_over_mixture_polytope, FeasibilityTolerances, Regime,
};

pub const GAP_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 10_000;
/// Stand-in for an infinite partial derivative of `χ`.
const GRADIENT_CLAMP: f64 = 1e3;
const VERTEX_MERGE_TOL: f64 = 1e-12;
const LINE_SEARCH_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// Nats per channel use.
    pub rate: f64,
    pub optimizer: InputDistribution,
    /// `‖Σ P(x)ρ(x) − ρ(0)‖_F` at the optimizer.
    pub feasibility_residual: f64,
    /// Conditional-gradient duality gap, an upper bound on the suboptimality.
    pub gap: f64,
    pub iterations: usize,
    pub regime: Regime,
}

fn chi(ch: &CqWiretapChannel, p: &[f64]) -> Result<f64> {
    Ok(holevo_information(
        ch.states(Side::Receiver),
        &InputDistribution::new(p.to_vec())?,
    )?
    .value())
}

/// `∂χ/∂P(x) = D(σ(x)‖σ̄_P) − 1`.
fn gradient(ch: &CqWiretapChannel, p: &[f64]) -> Result<Vec<f64>> {
    let avg = average_output_state(ch, &InputDistribution::new(p.to_vec())?, Side::Receiver)?;
    let mut g = Vec::with_capacity(ch.k());
    for x in 0..ch.k() {
        let d = relative_entropy(ch.sigma(x), &avg)?.value();
        g.push(
            if d.is_finite() {
                d.min(GRADIENT_CLAMP)
            } else {
                GRADIENT_CLAMP
            } - 1.0,
        );
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x + t * (y - x)).max(0.0))
        .collect()
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// Maximizes the concave `t ↦ χ(from + t (to − from))` on `[0, t_max]`.
fn line_search(ch: &CqWiretapChannel, from: &[f64], to: &[f64], t_max: f64) -> Result<f64> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |t: f64| chi(ch, &normalize(lerp(from, to, t)));
    let (mut lo, mut hi) = (0.0, t_max);
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    for _ in 0..LINE_SEARCH_STEPS {
        if hi - lo <= 1e-15 * t_max.max(1.0) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = eval(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = eval(a)?;
        }
    }
    // The endpoints are not probed by the golden-section interior points.
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, eval(mid)?);
    for t in [0.0, t_max] {
        let v = eval(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best.0)
}

struct ActiveSet {
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn point(&self, k: usize) -> Vec<f64> {
        let mut p = vec![0.0; k];
        for (v, w) in self.vertices.iter().zip(&self.weights) {
            for (pi, vi) in p.iter_mut().zip(v) {
                *pi += w * vi;
            }
        }
        normalize(p.into_iter().map(|x| x.max(0.0)).collect())
    }

    fn index_of(&self, v: &[f64]) -> Option<usize> {
        self.vertices.iter().position(|u| {
            u.iter()
                .zip(v)
                .all(|(a, b)| (a - b).abs() <= VERTEX_MERGE_TOL)
        })
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= 1e-15 {
                self.weights.remove(i);
                self.vertices.remove(i);
            } else {
                i += 1;
            }
        }
        let s: f64 = self.weights.iter().sum();
        self.weights.iter_mut().for_each(|w| *w /= s);
    }
}

fn lp_vertex(ch: &CqWiretapChannel, objective: &[f64]) -> Result<Vec<f64>> {
    let symbols: Vec<usize> = (0..ch.k()).collect();
    let sol = optimize_over_mixture_polytope(ch, &symbols, objective).map_err(|e| {
        Error::LinearProgram(format!(
            "mixture polytope LP failed in the positive-rate regime: {e}"
        ))
    })?;
    Ok(normalize(sol.x))
}

/// Maximizes the Holevo information over input distributions whose eavesdropper
/// average equals `ρ(0)`. Outside the positive-rate regime the rate is 0 at the
/// point mass on symbol 0.
pub fn covert_rate(ch: &CqWiretapChannel, tol: &FeasibilityTolerances) -> Result<RateResult> {
    let report = classify(ch, tol)?;
    let k = ch.k();
    let Some(witness) = report
        .mixture_witness
        .filter(|_| report.regime == Regime::PositiveRate)
    else {
        return Ok(RateResult {
            rate: 0.0,
            optimizer: InputDistribution::point_mass(k, 0),
            feasibility_residual: 0.0,
            gap: 0.0,
            iterations: 0,
            regime: report.regime,
        });
    };

    let start = lp_vertex(ch, &gradient(ch, witness.probs())?)?;
    let mut active = ActiveSet {
        vertices: vec![start],
        weights: vec![1.0],
    };
    let mut p = active.point(k);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = gradient(ch, &p)?;
        let s = lp_vertex(ch, &g)?;
        let gp = dot(&g, &p);
        gap = dot(&g, &s) - gp;
        if gap < GAP_TOL {
            break;
        }

        let (away_idx, away_val) = active
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (i, dot(&g, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set is never empty");
        let away_gain = gp - away_val;

        if gap >= away_gain || active.vertices.len() == 1 {
            let t = line_search(ch, &p, &s, 1.0)?;
            if t <= 0.0 {
                break;
            }
            active.weights.iter_mut().for_each(|w| *w *= 1.0 - t);
            match active.index_of(&s) {
                Some(i) => active.weights[i] += t,
                None => {
                    active.vertices.push(s);
                    active.weights.push(t);
                }
            }
        } else {
            let w = active.weights[away_idx];
            let t_max = w / (1.0 - w);
            // p + t (p − v) = p − t (v − p): moving from p away from v.
            let v = active.vertices[away_idx].clone();
            let target: Vec<f64> = p
                .iter()
                .zip(&v)
                .map(|(pi, vi)| pi + t_max * (pi - vi))
                .collect();
            let u = line_search(ch, &p, &target, 1.0)?;
            if u <= 0.0 {
                break;
            }
            let t = u * t_max;
            active.weights.iter_mut().for_each(|wi| *wi *= 1.0 + t);
            active.weights[away_idx] -= t;
            if u >= 1.0 {
                active.weights[away_idx] = 0.0;
            }
        }
        active.prune();
        p = active.point(k);
    }

    let optimizer = InputDistribution::new(p)?;
    let rate = holevo_information(ch.states(Side::Receiver), &optimizer)?.value();
    let feasibility_residual = mixture_residual(ch, &optimizer);
    Ok(RateResult {
        rate,
        optimizer,
        feasibility_residual,
        gap,
        iterations,
        regime: Regime::PositiveRate,
    })
}

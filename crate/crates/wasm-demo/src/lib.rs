//! Browser bindings for a family of qubit wiretap channels.
//!
//! Every channel here has three inputs. The eavesdropper sees `ρ(0) = I/2`
//! and two states of Bloch radius `r` in the x–z plane at angles `φ` and
//! `φ + Δ`; the receiver sees `I/2` and the two z-polarized states of radius
//! `s`. The pair can average to `ρ(0)` only at `Δ = π`, which is the single
//! positive-rate configuration in the family.
//!
//! The plain Rust functions return serializable reports; the `#[wasm_bindgen]`
//! wrappers hand JSON strings to JavaScript.

use cq_covert::{
    chi_sq_expansion_check, classify, covert_rate, scaling_constant, scaling_ratio,
    CqWiretapChannel, DensityOperator, FeasibilityTolerances, InputDistribution, Regime,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub fn qubit_channel(s: f64, r: f64, phi: f64, delta: f64) -> cq_covert::Result<CqWiretapChannel> {
    let bloch = |radius: f64, angle: f64| {
        DensityOperator::qubit_bloch(radius * angle.sin(), 0.0, radius * angle.cos())
    };
    let mixed = DensityOperator::qubit_bloch(0.0, 0.0, 0.0)?;
    CqWiretapChannel::new(
        vec![
            mixed.clone(),
            bloch(s, 0.0)?,
            bloch(s, std::f64::consts::PI)?,
        ],
        vec![mixed, bloch(r, phi)?, bloch(r, phi + delta)?],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "regime")]
pub enum ChannelAnalysis {
    PositiveRate { rate: f64, optimizer: Vec<f64> },
    SquareRoot { l: f64, optimizer: Vec<f64> },
    SuperSquareRoot,
}

pub fn analyze(s: f64, r: f64, phi: f64, delta: f64) -> cq_covert::Result<ChannelAnalysis> {
    let ch = qubit_channel(s, r, phi, delta)?;
    let tol = FeasibilityTolerances::default();
    Ok(match classify(&ch, &tol)?.regime {
        Regime::PositiveRate => {
            let res = covert_rate(&ch, &tol)?;
            ChannelAnalysis::PositiveRate {
                rate: res.rate,
                optimizer: res.optimizer.probs().to_vec(),
            }
        }
        Regime::SquareRoot => {
            let res = scaling_constant(&ch)?;
            ChannelAnalysis::SquareRoot {
                l: res.l,
                optimizer: res.optimizer.probs().to_vec(),
            }
        }
        Regime::SuperSquareRoot => ChannelAnalysis::SuperSquareRoot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCurve {
    /// Weight on input 1 of `P̃ = (0, t, 1 − t)`.
    pub t: Vec<f64>,
    pub ratio: Vec<f64>,
}

/// The ratio `√2 P̃ᵀd / √(χ²)` along the edge of the simplex away from input 0.
pub fn ratio_curve(
    s: f64,
    r: f64,
    phi: f64,
    delta: f64,
    points: usize,
) -> cq_covert::Result<RatioCurve> {
    let ch = qubit_channel(s, r, phi, delta)?;
    let points = points.max(2);
    let mut curve = RatioCurve {
        t: Vec::with_capacity(points),
        ratio: Vec::with_capacity(points),
    };
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let p = InputDistribution::new(vec![0.0, t, 1.0 - t])?;
        curve.t.push(t);
        curve.ratio.push(scaling_ratio(&ch, &p)?);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCurve {
    pub alpha: Vec<f64>,
    /// `D((1−α)ρ₀ + αρ̃ ‖ ρ₀) / (½ α² χ²)`.
    pub ratio: Vec<f64>,
    pub limit: f64,
    pub chi_squared: f64,
    pub kubo_mori_chi_squared: f64,
}

/// `ρ₀` on the z axis at `z0`, `ρ̃` of radius `r` tilted by `theta` from it.
/// `alpha` runs log-uniformly over `[10^log10_min, 10^-1]`.
pub fn expansion_curve(
    z0: f64,
    r: f64,
    theta: f64,
    log10_min: f64,
    points: usize,
) -> cq_covert::Result<ExpansionCurve> {
    let rho0 = DensityOperator::qubit_bloch(0.0, 0.0, z0)?;
    let rho_tilde = DensityOperator::qubit_bloch(r * theta.sin(), 0.0, r * theta.cos())?;
    let points = points.max(2);
    let hi = -1.0;
    let lo = log10_min.min(hi - 0.5);
    let alphas: Vec<f64> = (0..points)
        .map(|i| 10f64.powf(hi + (lo - hi) * i as f64 / (points - 1) as f64))
        .collect();
    let report = chi_sq_expansion_check(&rho0, &rho_tilde, &alphas)?;
    Ok(ExpansionCurve {
        alpha: report.rows.iter().map(|row| row.alpha).collect(),
        ratio: report.rows.iter().map(|row| row.ratio).collect(),
        limit: report.limit,
        chi_squared: report.chi_squared,
        kubo_mori_chi_squared: report.kubo_mori_chi_squared,
    })
}

fn to_js<T: Serialize>(value: cq_covert::Result<T>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = analyzeChannel)]
pub fn analyze_channel_js(s: f64, r: f64, phi: f64, delta: f64) -> Result<String, JsError> {
    to_js(analyze(s, r, phi, delta))
}

#[wasm_bindgen(js_name = ratioCurve)]
pub fn ratio_curve_js(
    s: f64,
    r: f64,
    phi: f64,
    delta: f64,
    points: usize,
) -> Result<String, JsError> {
    to_js(ratio_curve(s, r, phi, delta, points))
}

#[wasm_bindgen(js_name = expansionCurve)]
pub fn expansion_curve_js(
    z0: f64,
    r: f64,
    theta: f64,
    log10_min: f64,
    points: usize,
) -> Result<String, JsError> {
    to_js(expansion_curve(z0, r, theta, log10_min, points))
}

//! Numerical checks of the two small-`α` expansions behind the square-root law:
//! `D((1−α)ρ₀ + αρ̃ ‖ ρ₀) ≈ ½ α² χ²(ρ̃, ρ₀)` and
//! `χ((1−α)δ₀ + αP̃) ≈ α Σ_x P̃(x) D(σ(x)‖σ(0))`.
//!
//! The first holds with `χ² = tr[ρ̃²ρ₀⁻¹] − 1` only when `ρ̃` commutes with `ρ₀`.
//! In general the exact second-order coefficient is the Kubo–Mori χ², which is
//! smaller, so the ratio tends to `limit = χ²_KM / χ² ≤ 1`.

use serde::{Deserialize, Serialize};

use crate::channel::{CqWiretapChannel, InputDistribution, Side};
use crate::density::DensityOperator;
use crate::divergence::{chi_squared, holevo_information, kubo_mori_chi_squared, relative_entropy};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// χ² at or below this value is treated as `ρ̃ = ρ₀`.
pub const DEGENERATE_CHI_SQ: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSqRow {
    pub alpha: f64,
    pub divergence: f64,
    /// `D(ρ_α‖ρ₀) / (½ α² χ²)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSqExpansionReport {
    pub chi_squared: f64,
    pub kubo_mori_chi_squared: f64,
    /// `lim_{α→0} r(α) = χ²_KM / χ²`; 1 exactly when `ρ̃` and `ρ₀` commute.
    pub limit: f64,
    pub degenerate: bool,
    pub rows: Vec<ChiSqRow>,
    /// `|r(α_min) − limit| < |r(α_max) − limit|`; absent for degenerate input or a single α.
    pub converging: Option<bool>,
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty α list".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::InvalidParameter(format!("α = {a} outside (0, 1]")));
    }
    Ok(())
}

fn converging(rows: &[(f64, f64)], limit: f64) -> Option<bool> {
    if rows.len() < 2 {
        return None;
    }
    let min = rows.iter().min_by(|a, b| a.0.total_cmp(&b.0))?;
    let max = rows.iter().max_by(|a, b| a.0.total_cmp(&b.0))?;
    Some((min.1 - limit).abs() < (max.1 - limit).abs())
}

pub fn chi_sq_expansion_check(
    rho0: &DensityOperator,
    rho_tilde: &DensityOperator,
    alphas: &[f64],
) -> Result<ChiSqExpansionReport> {
    check_alphas(alphas)?;
    let chi2 = chi_squared(rho_tilde, rho0)?.value();
    let km = kubo_mori_chi_squared(rho_tilde, rho0)?.value();
    if chi2 <= DEGENERATE_CHI_SQ {
        return Ok(ChiSqExpansionReport {
            chi_squared: chi2,
            kubo_mori_chi_squared: km,
            limit: 1.0,
            degenerate: true,
            rows: Vec::new(),
            converging: None,
        });
    }
    let limit = km / chi2;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mixed = DensityOperator::mixture(&[1.0 - alpha, alpha], &[rho0, rho_tilde])?;
        let divergence = relative_entropy(&mixed, rho0)?.value();
        rows.push(ChiSqRow {
            alpha,
            divergence,
            ratio: divergence / (0.5 * alpha * alpha * chi2),
        });
    }
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.ratio)).collect();
    Ok(ChiSqExpansionReport {
        chi_squared: chi2,
        kubo_mori_chi_squared: km,
        limit,
        degenerate: false,
        converging: converging(&pairs, limit),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoRow {
    pub alpha: f64,
    pub holevo: f64,
    /// `χ(P_α) / α`.
    pub slope: f64,
    /// `|slope − limit| / limit`, or the absolute gap when the limit is 0.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoExpansionReport {
    /// `Σ_{x≠0} P̃(x) D(σ(x)‖σ(0))`.
    pub limit: f64,
    pub rows: Vec<HolevoRow>,
}

pub fn holevo_expansion_check(
    ch: &CqWiretapChannel,
    p_tilde: &InputDistribution,
    alphas: &[f64],
) -> Result<HolevoExpansionReport> {
    check_alphas(alphas)?;
    if p_tilde.len() != ch.k() {
        return Err(Error::DimensionMismatch(format!(
            "P̃ over {} symbols, k = {}",
            p_tilde.len(),
            ch.k()
        )));
    }
    if p_tilde.probs()[0] != 0.0 {
        return Err(Error::InvalidDistribution("P̃(0) must be 0".into()));
    }
    let mut limit = 0.0;
    for (x, &w) in p_tilde.probs().iter().enumerate().skip(1) {
        if w > 0.0 {
            limit += w * relative_entropy(ch.sigma(x), ch.sigma(0))?.value();
        }
    }
    let delta0 = InputDistribution::point_mass(ch.k(), 0);
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let p = p_tilde.mix(alpha, &delta0)?;
        let holevo = holevo_information(ch.states(Side::Receiver), &p)?.value();
        let slope = holevo / alpha;
        let relative_error = if limit > 0.0 {
            (slope - limit).abs() / limit
        } else {
            (slope - limit).abs()
        };
        rows.push(HolevoRow {
            alpha,
            holevo,
            slope,
            relative_error,
        });
    }
    Ok(HolevoExpansionReport { limit, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_full_rank_density, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    #[test]
    fn degenerate_input_is_flagged() {
        let r = chi_sq_expansion_check(&diag(&[0.3, 0.7]), &diag(&[0.3, 0.7]), &DEFAULT_ALPHAS)
            .unwrap();
        assert!(r.degenerate);
        assert!(r.rows.is_empty());
    }

    #[test]
    fn commuting_pair_ratio_near_one() {
        let r = chi_sq_expansion_check(&diag(&[0.5, 0.5]), &diag(&[0.75, 0.25]), &[1e-3]).unwrap();
        assert!((r.chi_squared - 0.25).abs() < 1e-14);
        assert!((r.limit - 1.0).abs() < 1e-12);
        assert!((0.99..=1.01).contains(&r.rows[0].ratio));
    }

    #[test]
    fn non_commuting_pair_tends_to_kubo_mori_limit() {
        // ρ̃ = |+⟩⟨+| mixed with I/2 against a diagonal ρ₀.
        let rho0 = diag(&[0.8, 0.2]);
        let rt = DensityOperator::qubit_bloch(0.6, 0.0, 0.0).unwrap();
        let r = chi_sq_expansion_check(&rho0, &rt, &[1e-4]).unwrap();
        assert!(r.limit < 0.95);
        assert!((r.rows[0].ratio - r.limit).abs() < 1e-3);
    }

    #[test]
    fn ratio_converges_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in [2, 3] {
            let rho0 = random_full_rank_density(&mut rng, dim, 0.1);
            let rt = random_full_rank_density(&mut rng, dim, 0.1);
            let r = chi_sq_expansion_check(&rho0, &rt, &DEFAULT_ALPHAS).unwrap();
            assert_eq!(r.converging, Some(true), "{r:?}");
        }
    }

    #[test]
    fn holevo_slope_for_commuting_channel() {
        let ch = CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
        )
        .unwrap();
        let p = InputDistribution::point_mass(2, 1);
        let r = holevo_expansion_check(&ch, &p, &[1e-4]).unwrap();
        assert!((r.limit - 0.130812).abs() < 1e-6);
        assert!(r.rows[0].relative_error < 1e-2);
    }

    #[test]
    fn uninformative_symbols_give_zero_holevo() {
        let ch =
            CqWiretapChannel::new(vec![diag(&[0.4, 0.6]); 3], vec![diag(&[0.5, 0.5]); 3]).unwrap();
        let p = InputDistribution::new(vec![0.0, 0.5, 0.5]).unwrap();
        let r = holevo_expansion_check(&ch, &p, &DEFAULT_ALPHAS).unwrap();
        assert_eq!(r.limit, 0.0);
        assert!(r.rows.iter().all(|row| row.holevo.abs() < 1e-14));
    }

    #[test]
    fn slope_invariant_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let p = InputDistribution::new(vec![0.0, 0.3, 0.7]).unwrap();
        let u = random_unitary(&mut rng, 2);
        let a = holevo_expansion_check(&ch, &p, &[1e-3]).unwrap();
        let b = holevo_expansion_check(&ch.conjugate(Side::Receiver, &u).unwrap(), &p, &[1e-3])
            .unwrap();
        assert!((a.rows[0].slope - b.rows[0].slope).abs() < 1e-9);
        assert!((a.limit - b.limit).abs() < 1e-12);
    }
}

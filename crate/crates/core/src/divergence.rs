//! Entropies and divergences, all in nats.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::InputDistribution;
use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::operator::{matrix_fn, same_dim, support_contained, ScalarFn, SUPPORT_TOL};

/// Values in `[-NEGATIVE_SLACK, 0)` are floating-point cancellation and are clipped to 0.
pub const NEGATIVE_SLACK: f64 = 1e-9;

/// An information quantity in nats. May be `+∞` for relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Nats(pub f64);

impl Nats {
    pub const ZERO: Nats = Nats(0.0);
    pub const INFINITY: Nats = Nats(f64::INFINITY);

    /// Clips `[-NEGATIVE_SLACK, 0)` to zero and rejects anything more negative.
    pub fn nonnegative(value: f64) -> Result<Nats> {
        if value.is_nan() {
            return Err(Error::Numerical("NaN information quantity".into()));
        }
        if value < -NEGATIVE_SLACK {
            return Err(Error::Numerical(format!(
                "information quantity {value:e} is negative"
            )));
        }
        Ok(Nats(value.max(0.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn to_bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nats", self.0)
    }
}

/// `-Σ λ ln λ` over the spectrum with `0 ln 0 = 0`.
pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&l| l > SUPPORT_TOL)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

pub fn von_neumann_entropy(a: &DensityOperator) -> Result<Nats> {
    Nats::nonnegative(entropy_of_spectrum(a.operator().eigenvalues()?))
}

/// `tr[A log A − A log B]` when `supp(A) ⊆ supp(B)`, `+∞` otherwise.
pub fn relative_entropy(a: &DensityOperator, b: &DensityOperator) -> Result<Nats> {
    same_dim(a.dim(), b.dim())?;
    if !support_contained(a.operator(), b.operator())? {
        return Ok(Nats::INFINITY);
    }
    let neg_entropy = -entropy_of_spectrum(a.operator().eigenvalues()?);
    let log_b = matrix_fn(b.operator(), ScalarFn::Log, true)?;
    let cross = a.operator().trace_product(&log_b);
    Nats::nonnegative(neg_entropy - cross)
}

fn inverse_of_full_rank(rho0: &DensityOperator) -> Result<crate::operator::HermitianOperator> {
    let min = rho0.operator().min_eigenvalue()?;
    if min <= SUPPORT_TOL {
        return Err(Error::SingularReference {
            min_eigenvalue: min,
        });
    }
    matrix_fn(rho0.operator(), ScalarFn::Power(-1.0), false)
}

/// `tr[ρ̃² ρ0⁻¹] − 1`. `rho0` must be full rank.
pub fn chi_squared(rho_tilde: &DensityOperator, rho0: &DensityOperator) -> Result<Nats> {
    same_dim(rho_tilde.dim(), rho0.dim())?;
    let inv = inverse_of_full_rank(rho0)?;
    let sq = rho_tilde.matrix() * rho_tilde.matrix();
    let value = crate::operator::trace_of_product(&sq, inv.matrix()).re - 1.0;
    Nats::nonnegative(value)
}

/// The same quantity as [`chi_squared`] computed as `‖ρ0^{-1/2}(ρ̃ − ρ0)‖_F²`.
pub fn chi_squared_whitened(rho_tilde: &DensityOperator, rho0: &DensityOperator) -> Result<Nats> {
    same_dim(rho_tilde.dim(), rho0.dim())?;
    let min = rho0.operator().min_eigenvalue()?;
    if min <= SUPPORT_TOL {
        return Err(Error::SingularReference {
            min_eigenvalue: min,
        });
    }
    let inv_sqrt = matrix_fn(rho0.operator(), ScalarFn::Power(-0.5), false)?;
    let diff = rho_tilde.matrix() - rho0.matrix();
    Nats::nonnegative((inv_sqrt.matrix() * diff).norm_squared())
}

/// Kubo–Mori χ²: `Σᵢⱼ |Δᵢⱼ|² (ln λᵢ − ln λⱼ)/(λᵢ − λⱼ)` with `Δ = ρ̃ − ρ0` in the
/// eigenbasis of `ρ0` (the diagonal weight is `1/λᵢ`). This is the exact second
/// derivative of `D((1−α)ρ0 + αρ̃ ‖ ρ0)` at `α = 0`. It never exceeds
/// [`chi_squared`] and equals it when `ρ̃` commutes with `ρ0`. `rho0` must be full rank.
pub fn kubo_mori_chi_squared(rho_tilde: &DensityOperator, rho0: &DensityOperator) -> Result<Nats> {
    same_dim(rho_tilde.dim(), rho0.dim())?;
    let eig = rho0.operator().eigen()?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= SUPPORT_TOL {
        return Err(Error::SingularReference {
            min_eigenvalue: min,
        });
    }
    let v = &eig.vectors;
    let delta = v.adjoint() * (rho_tilde.matrix() - rho0.matrix()) * v;
    let mut total = 0.0;
    for (i, &a) in eig.values.iter().enumerate() {
        for (j, &b) in eig.values.iter().enumerate() {
            let weight = if a == b {
                1.0 / a
            } else {
                ((a - b) / b).ln_1p() / (a - b)
            };
            total += delta[(i, j)].norm_sqr() * weight;
        }
    }
    Nats::nonnegative(total)
}

/// `H(Σ P(x) σ(x)) − Σ P(x) H(σ(x))`.
pub fn holevo_information(states: &[DensityOperator], p: &InputDistribution) -> Result<Nats> {
    if states.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} states for a distribution over {} symbols",
            states.len(),
            p.len()
        )));
    }
    let refs: Vec<&DensityOperator> = states.iter().collect();
    let avg = DensityOperator::mixture(p.probs(), &refs)?;
    let mut conditional = 0.0;
    for (w, s) in p.probs().iter().zip(states) {
        if *w > 0.0 {
            conditional += w * von_neumann_entropy(s)?.value();
        }
    }
    Nats::nonnegative(von_neumann_entropy(&avg)?.value() - conditional)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_full_rank_density, random_unitary};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(
            (von_neumann_entropy(&diag(&[0.5, 0.5])).unwrap().value() - std::f64::consts::LN_2)
                .abs()
                < 1e-15
        );
        let pure =
            DensityOperator::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().value() < 1e-12);
        let h = von_neumann_entropy(&diag(&[0.25, 0.75])).unwrap().value();
        assert!((h - 0.5623351446188083).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_density(&mut rng, 3, 3);
        assert!(relative_entropy(&a, &a).unwrap().value() < 1e-12);
        let zero = diag(&[1.0, 0.0]);
        let one = diag(&[0.0, 1.0]);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), Nats::INFINITY);
        let d = relative_entropy(&diag(&[0.5, 0.5]), &diag(&[0.25, 0.75]))
            .unwrap()
            .value();
        let expect = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_with_rank_deficient_first_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_density(&mut rng, 3, 1);
        let b = random_full_rank_density(&mut rng, 3, 0.05);
        assert!(relative_entropy(&a, &b).unwrap().is_finite());
        assert_eq!(relative_entropy(&b, &a).unwrap(), Nats::INFINITY);
    }

    #[test]
    fn chi_squared_examples() {
        let rho0 = diag(&[0.5, 0.5]);
        assert!(chi_squared(&rho0, &rho0).unwrap().value() < 1e-15);
        let c = chi_squared(&diag(&[0.75, 0.25]), &rho0).unwrap().value();
        assert!((c - 0.25).abs() < 1e-14);
        assert!(matches!(
            chi_squared(&rho0, &diag(&[1.0, 0.0])),
            Err(Error::SingularReference { .. })
        ));
    }

    #[test]
    fn chi_squared_unitary_invariance_and_whitened_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in 2..=4 {
            let rho0 = random_full_rank_density(&mut rng, dim, 0.05);
            let rt = random_density(&mut rng, dim, dim);
            let u = random_unitary(&mut rng, dim);
            let c = chi_squared(&rt, &rho0).unwrap().value();
            let cu = chi_squared(
                &rt.conjugate_by(&u).unwrap(),
                &rho0.conjugate_by(&u).unwrap(),
            )
            .unwrap()
            .value();
            assert!((c - cu).abs() < 1e-9 * c.max(1.0));
            let cw = chi_squared_whitened(&rt, &rho0).unwrap().value();
            assert!((c - cw).abs() < 1e-9 * c.max(1.0));
        }
    }

    #[test]
    fn holevo_examples() {
        let s0 = diag(&[1.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus =
            DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let states = vec![s0.clone(), plus];
        let point = InputDistribution::point_mass(2, 1);
        assert!(holevo_information(&states, &point).unwrap().value() < 1e-12);
        let same = vec![s0.clone(), s0];
        assert!(
            holevo_information(&same, &InputDistribution::uniform(2))
                .unwrap()
                .value()
                < 1e-12
        );
        let chi = holevo_information(&states, &InputDistribution::uniform(2))
            .unwrap()
            .value();
        let l1: f64 = 0.5 * (1.0 + h);
        let l2: f64 = 0.5 * (1.0 - h);
        let expect = -(l1 * l1.ln() + l2 * l2.ln());
        assert!((chi - expect).abs() < 1e-12);
        assert!((chi - 0.416496).abs() < 1e-6);
    }

    #[test]
    fn nats_clipping() {
        assert_eq!(Nats::nonnegative(-5e-10).unwrap(), Nats::ZERO);
        assert!(Nats::nonnegative(-1e-6).is_err());
        assert!((Nats(std::f64::consts::LN_2).to_bits() - 1.0).abs() < 1e-15);
    }
}

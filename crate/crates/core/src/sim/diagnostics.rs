//! Quantities from the achievability analysis that can be evaluated exactly at
//! small blocklength: covertness of a sampled code, type-set membership, the
//! error exponent `ψₙ(s)`, the pinched hypothesis-test statistic and `â`.

use crate::channel::{
    average_output_state, product_output_state, Codeword, CqWiretapChannel, InputDistribution, Side,
};
use crate::converse::{ensemble_divergence, Ensemble};
use crate::density::DensityOperator;
use crate::divergence::relative_entropy;
use crate::error::{Error, Result};
use crate::operator::{
    matrix_fn, pinch, positive_part_projector, CMatrix, DimCap, HermitianOperator, ScalarFn,
    DEFAULT_GROUP_TOL, SUPPORT_TOL,
};

use super::codebook::{chi_sq_scale, Codebook};

/// `D(ρⁿ‖ρ(0)^⊗n)` with `ρⁿ = (1/M) Σₘ ρⁿ(xⁿ(m))` for this specific codebook.
pub fn covertness_divergence(ch: &CqWiretapChannel, cb: &Codebook, cap: DimCap) -> Result<f64> {
    ensemble_divergence(ch, &Ensemble::uniform(cb.codewords.clone())?, cap)
}

/// `n D(ρₙ‖ρ(0))` with `ρₙ = Σ_x Pₙ(x) ρ(x)`: the covertness averaged over the
/// random code, where the output is the product state `ρₙ^⊗n`.
pub fn ensemble_average_divergence(
    ch: &CqWiretapChannel,
    pn: &InputDistribution,
    n: usize,
) -> Result<f64> {
    let rho_n = average_output_state(ch, pn, Side::Eavesdropper)?;
    Ok(n as f64 * relative_entropy(&rho_n, ch.rho(0))?.value())
}

/// Whether `Q_{xⁿ}(x) ≥ (1 − γ) Pₙ(x)` for every `x ≠ 0`.
pub fn type_set_membership(xn: &Codeword, gamma: f64, pn: &InputDistribution) -> bool {
    let q = xn.empirical_type(pn.len());
    q.iter()
        .zip(pn.probs())
        .skip(1)
        .all(|(qx, px)| *qx >= (1.0 - gamma) * px)
}

/// `ψₙ(s) = −n Σ_x Q_{xⁿ}(x) log tr[ρ(x) ρₙ^{s/2} ρ(x)^{−s} ρₙ^{s/2}]`, with
/// `ρ(x)^{−s}` taken on `supp ρ(x)`.
pub fn psi_n(ch: &CqWiretapChannel, pn: &InputDistribution, xn: &Codeword, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} outside (0, 1)")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let rho_n = average_output_state(ch, pn, Side::Eavesdropper)?;
    let min = rho_n.operator().min_eigenvalue()?;
    if min <= SUPPORT_TOL {
        return Err(Error::SingularReference {
            min_eigenvalue: min,
        });
    }
    let half = matrix_fn(rho_n.operator(), ScalarFn::Power(s / 2.0), false)?;
    let q = xn.empirical_type(ch.k());
    let mut acc = 0.0;
    for (x, &qx) in q.iter().enumerate() {
        if qx == 0.0 {
            continue;
        }
        let neg = matrix_fn(ch.rho(x).operator(), ScalarFn::Power(-s), true)?;
        let sandwich: CMatrix = half.matrix() * neg.matrix() * half.matrix();
        let t = crate::operator::trace_of_product(ch.rho(x).matrix(), &sandwich).re;
        if t <= 0.0 {
            return Err(Error::Numerical(format!(
                "non-positive trace {t:e} inside ψₙ logarithm"
            )));
        }
        acc += qx * t.ln();
    }
    Ok(-(xn.len() as f64) * acc)
}

/// `tr[ρⁿ(xⁿ) Π]` with `Π = {ℰ(ρⁿ(xⁿ)) − e^{√(nδ)·a} ρₙ^⊗n > 0}`, where `ℰ`
/// pinches onto the eigenspaces of `ρₙ^⊗n`.
pub fn pinched_test_statistic(
    ch: &CqWiretapChannel,
    pn: &InputDistribution,
    xn: &Codeword,
    a: f64,
    delta: f64,
    cap: DimCap,
) -> Result<f64> {
    let n = xn.len();
    let threshold = ((n as f64 * delta).sqrt() * a).exp();
    if threshold.is_infinite() {
        return Ok(0.0);
    }
    let state = product_output_state(ch, xn, Side::Eavesdropper, cap)?;
    let rho_n = average_output_state(ch, pn, Side::Eavesdropper)?;
    let reference = product_output_state_of(&rho_n, n, cap)?;
    let pinched = pinch(state.operator(), reference.operator(), DEFAULT_GROUP_TOL)?;
    let diff = pinched.sub(&reference.operator().scale(threshold))?;
    let proj = positive_part_projector(&diff)?;
    Ok(state.operator().trace_product(proj.operator()))
}

fn product_output_state_of(
    rho: &DensityOperator,
    n: usize,
    cap: DimCap,
) -> Result<DensityOperator> {
    cap.check_power(rho.dim(), n)?;
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = acc.tensor(rho, cap)?;
    }
    Ok(acc)
}

/// `(1−θ)(1−γ)(1−β) Σ_{x≠0} P̃*(x) D(ρ(x)‖ρ(0)) / √(½ χ²(ρ̃*, ρ(0)))`.
pub fn a_hat(
    ch: &CqWiretapChannel,
    p_tilde: &InputDistribution,
    theta: f64,
    gamma: f64,
    beta: f64,
) -> Result<f64> {
    if p_tilde.probs()[0] != 0.0 {
        return Err(Error::InvalidDistribution("P̃(0) must be 0".into()));
    }
    let mut num = 0.0;
    for (x, &w) in p_tilde.probs().iter().enumerate().skip(1) {
        if w > 0.0 {
            num += w * relative_entropy(ch.rho(x), ch.rho(0))?.value();
        }
    }
    Ok((1.0 - theta) * (1.0 - gamma) * (1.0 - beta) * num / chi_sq_scale(ch, p_tilde)?)
}

/// The projector-free form of [`pinched_test_statistic`]: in the eigenbasis of
/// `ρₙ^⊗n` the pinched state is block diagonal, so the statistic is the sum of
/// the block eigenvalues `μ` exceeding `e^{√(nδ)·a} λ` for the block eigenvalue `λ`.
pub fn pinched_test_statistic_blockwise(
    ch: &CqWiretapChannel,
    pn: &InputDistribution,
    xn: &Codeword,
    a: f64,
    delta: f64,
    cap: DimCap,
) -> Result<f64> {
    let n = xn.len();
    let threshold = ((n as f64 * delta).sqrt() * a).exp();
    let state = product_output_state(ch, xn, Side::Eavesdropper, cap)?;
    let rho_n = average_output_state(ch, pn, Side::Eavesdropper)?;
    let reference = product_output_state_of(&rho_n, n, cap)?;
    let spec = crate::operator::eig_hermitian(reference.operator(), DEFAULT_GROUP_TOL)?;
    let mut total = 0.0;
    for (lambda, p) in spec.eigenvalues.iter().zip(&spec.projectors) {
        let block = HermitianOperator::symmetrized(p.matrix() * state.matrix() * p.matrix());
        for &mu in block.eigenvalues()? {
            if mu - threshold * lambda > SUPPORT_TOL {
                total += mu;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    #[test]
    fn type_set_examples() {
        let pn = InputDistribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(type_set_membership(
            &Codeword::new(vec![0, 0, 1, 2], 3).unwrap(),
            0.1,
            &pn
        ));
        assert!(!type_set_membership(
            &Codeword::new(vec![0, 0, 0, 0], 3).unwrap(),
            0.5,
            &pn
        ));
    }

    #[test]
    fn psi_vanishes_at_zero_and_on_the_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let pn = InputDistribution::new(vec![0.8, 0.1, 0.1]).unwrap();
        let xn = Codeword::new(vec![0, 1, 2, 0], 3).unwrap();
        assert_eq!(psi_n(&ch, &pn, &xn, 0.0).unwrap(), 0.0);
        let zeros = Codeword::new(vec![0; 4], 3).unwrap();
        let delta0 = InputDistribution::point_mass(3, 0);
        for s in [0.1, 0.5, 0.9] {
            assert!(psi_n(&ch, &delta0, &zeros, s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn psi_slope_is_the_type_weighted_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let pn = InputDistribution::new(vec![0.6, 0.3, 0.1]).unwrap();
        let xn = Codeword::new(vec![0, 1, 1, 2, 0], 3).unwrap();
        let rho_n = average_output_state(&ch, &pn, Side::Eavesdropper).unwrap();
        let q = xn.empirical_type(3);
        let expect: f64 = 5.0
            * q.iter()
                .enumerate()
                .map(|(x, qx)| qx * relative_entropy(ch.rho(x), &rho_n).unwrap().value())
                .sum::<f64>();
        let s = 1e-5;
        let slope = psi_n(&ch, &pn, &xn, s).unwrap() / s;
        assert!((slope - expect).abs() < 1e-2 * expect);
    }

    #[test]
    fn pinched_statistic_limits_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ch = random_channel(&mut rng, 2, 2, 2);
        let pn = InputDistribution::new(vec![0.7, 0.3]).unwrap();
        let xn = Codeword::new(vec![1, 0], 2).unwrap();
        let cap = DimCap::DEFAULT;
        assert_eq!(
            pinched_test_statistic(&ch, &pn, &xn, 1e6, 0.05, cap).unwrap(),
            0.0
        );
        assert!(
            (pinched_test_statistic(&ch, &pn, &xn, -1e6, 0.05, cap).unwrap() - 1.0).abs() < 1e-9
        );
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let a = -20.0 + 40.0 * i as f64 / 49.0;
            let v = pinched_test_statistic(&ch, &pn, &xn, a, 0.05, cap).unwrap();
            assert!((-1e-9..=1.0 + 1e-9).contains(&v));
            assert!(v <= prev + 1e-9);
            let blockwise = pinched_test_statistic_blockwise(&ch, &pn, &xn, a, 0.05, cap).unwrap();
            assert!((v - blockwise).abs() < 1e-9, "a={a}: {v} vs {blockwise}");
            prev = v;
        }
    }

    #[test]
    fn a_hat_examples() {
        let ch = CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.9, 0.1])],
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
        )
        .unwrap();
        let p = InputDistribution::point_mass(2, 1);
        let d = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        let bare = a_hat(&ch, &p, 0.0, 0.0, 0.0).unwrap();
        assert!((bare - d / 0.125f64.sqrt()).abs() < 1e-12);
        let base = a_hat(&ch, &p, 0.2, 0.2, 0.2).unwrap();
        for (t, g, b) in [(0.3, 0.2, 0.2), (0.2, 0.3, 0.2), (0.2, 0.2, 0.3)] {
            assert!(a_hat(&ch, &p, t, g, b).unwrap() < base);
        }
    }

    #[test]
    fn covertness_of_special_codebooks() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let mk = |words: Vec<Vec<usize>>| Codebook {
            n: words[0].len(),
            m: words.len(),
            codewords: words
                .into_iter()
                .map(|w| Codeword::new(w, 3).unwrap())
                .collect(),
            sampling_distribution: InputDistribution::uniform(3),
        };
        let zero = mk(vec![vec![0; 3]; 2]);
        assert!(
            covertness_divergence(&ch, &zero, DimCap::DEFAULT)
                .unwrap()
                .abs()
                < 1e-12
        );
        let word: Vec<usize> = (0..3).map(|_| rng.random_range(0..3)).collect();
        let additive: f64 = word
            .iter()
            .map(|&x| relative_entropy(ch.rho(x), ch.rho(0)).unwrap().value())
            .sum();
        let single = mk(vec![word]);
        assert!(
            (covertness_divergence(&ch, &single, DimCap::DEFAULT).unwrap() - additive).abs() < 1e-9
        );
    }
}

//! Both inequality chains of the converse, evaluated exactly on an explicit
//! codeword ensemble.
//!
//! Receiver: `χⁿ(Pⁿ) ≤ Σᵢ χ(Pᵢ) ≤ n χ(P̄)`.
//! Eavesdropper: `D(ρⁿ‖ρ(0)^⊗n) ≥ Σᵢ D(ρᵢ‖ρ(0)) ≥ n D(ρ̄‖ρ(0))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{
    average_output_state, product_output_state, Codeword, CqWiretapChannel, InputDistribution, Side,
};
use crate::density::DensityOperator;
use crate::divergence::{holevo_information, relative_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::operator::{matrix_fn, support_contained, CMatrix, DimCap, HermitianOperator, ScalarFn};

/// Slack allowed on every link of the chains.
pub const CHAIN_TOL: f64 = 1e-9;

/// A probability distribution over equal-length codewords.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    codewords: Vec<Codeword>,
    weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(codewords: Vec<Codeword>, weights: Vec<f64>) -> Result<Self> {
        if codewords.is_empty() || codewords.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} codewords with {} weights",
                codewords.len(),
                weights.len()
            )));
        }
        let n = codewords[0].len();
        if n == 0 || codewords.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidParameter(
                "codewords must share a positive length".into(),
            ));
        }
        // Validates the weights as a probability vector.
        InputDistribution::new(weights.clone())?;
        Ok(Self { codewords, weights })
    }

    /// Every codeword with weight `1/M`.
    pub fn uniform(codewords: Vec<Codeword>) -> Result<Self> {
        let m = codewords.len();
        Self::new(codewords, vec![1.0 / m.max(1) as f64; m])
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn blocklength(&self) -> usize {
        self.codewords[0].len()
    }

    /// Distribution `Pᵢ` of the `i`-th symbol.
    pub fn marginal(&self, i: usize, k: usize) -> Result<InputDistribution> {
        let mut p = vec![0.0; k];
        for (c, w) in self.codewords.iter().zip(&self.weights) {
            p[c.symbols()[i]] += w;
        }
        InputDistribution::from_weights(&p)
    }

    /// `P̄ = (1/n) Σᵢ Pᵢ`.
    pub fn average_marginal(&self, k: usize) -> Result<InputDistribution> {
        let n = self.blocklength() as f64;
        let mut p = vec![0.0; k];
        for (c, w) in self.codewords.iter().zip(&self.weights) {
            for &s in c.symbols() {
                p[s] += w / n;
            }
        }
        InputDistribution::from_weights(&p)
    }
}

/// `Σ_c w(c) state(c₁) ⊗ ··· ⊗ state(cₙ)`.
pub fn ensemble_output_state(
    ch: &CqWiretapChannel,
    ens: &Ensemble,
    side: Side,
    cap: DimCap,
) -> Result<DensityOperator> {
    let dim = cap.check_power(ch.states(side)[0].dim(), ens.blocklength())?;
    let mut acc = CMatrix::zeros(dim, dim);
    for (c, &w) in ens.codewords.iter().zip(&ens.weights) {
        if w > 0.0 {
            acc += product_output_state(ch, c, side, cap)?.matrix() * Complex64::new(w, 0.0);
        }
    }
    DensityOperator::from_operator(HermitianOperator::symmetrized(acc))
}

/// `χⁿ = H(Σ_c w(c) σⁿ(c)) − Σ_c w(c) Σᵢ H(σ(cᵢ))`, using additivity for the product states.
pub fn ensemble_holevo(ch: &CqWiretapChannel, ens: &Ensemble, cap: DimCap) -> Result<f64> {
    let avg = ensemble_output_state(ch, ens, Side::Receiver, cap)?;
    let single: Vec<f64> = (0..ch.k())
        .map(|x| von_neumann_entropy(ch.sigma(x)).map(|h| h.value()))
        .collect::<Result<_>>()?;
    let conditional: f64 = ens
        .codewords
        .iter()
        .zip(&ens.weights)
        .map(|(c, w)| w * c.symbols().iter().map(|&s| single[s]).sum::<f64>())
        .sum();
    Ok((von_neumann_entropy(&avg)?.value() - conditional).max(0.0))
}

/// `D(ρⁿ‖ρ(0)^⊗n)` for the ensemble average `ρⁿ`. The cross term uses
/// `log ρ(0)^⊗n = Σᵢ 𝟙 ⊗ ··· ⊗ log ρ(0) ⊗ ··· ⊗ 𝟙`, so only `ρⁿ` is diagonalized.
pub fn ensemble_divergence(ch: &CqWiretapChannel, ens: &Ensemble, cap: DimCap) -> Result<f64> {
    let rho0 = ch.rho(0);
    let mut used = vec![false; ch.k()];
    for (c, &w) in ens.codewords.iter().zip(&ens.weights) {
        if w > 0.0 {
            for &s in c.symbols() {
                used[s] = true;
            }
        }
    }
    for (x, _) in used.iter().enumerate().filter(|(_, u)| **u) {
        if !support_contained(ch.rho(x).operator(), rho0.operator())? {
            return Ok(f64::INFINITY);
        }
    }
    let log_rho0 = matrix_fn(rho0.operator(), ScalarFn::Log, true)?;
    let cross_single: Vec<f64> = (0..ch.k())
        .map(|x| ch.rho(x).operator().trace_product(&log_rho0))
        .collect();
    let cross: f64 = ens
        .codewords
        .iter()
        .zip(&ens.weights)
        .map(|(c, w)| w * c.symbols().iter().map(|&s| cross_single[s]).sum::<f64>())
        .sum();
    let avg = ensemble_output_state(ch, ens, Side::Eavesdropper, cap)?;
    let value = -von_neumann_entropy(&avg)?.value() - cross;
    Ok(value.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn link(relation: &str, lhs: f64, rhs: f64) -> ChainLink {
    ChainLink {
        relation: relation.into(),
        lhs,
        rhs,
        holds: lhs <= rhs + CHAIN_TOL || lhs == rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: usize,
    /// `χⁿ(Pⁿ)`.
    pub holevo_n_letter: f64,
    /// `Σᵢ χ(Pᵢ)`.
    pub holevo_sum_marginals: f64,
    /// `n χ(P̄)`.
    pub holevo_average: f64,
    /// `D(ρⁿ‖ρ(0)^⊗n)`.
    pub divergence_n_letter: f64,
    /// `Σᵢ D(ρᵢ‖ρ(0))`.
    pub divergence_sum_marginals: f64,
    /// `n D(ρ̄‖ρ(0))`.
    pub divergence_average: f64,
    pub links: Vec<ChainLink>,
    pub all_hold: bool,
}

pub fn converse_chain(ch: &CqWiretapChannel, ens: &Ensemble, cap: DimCap) -> Result<ChainReport> {
    let n = ens.blocklength();
    let k = ch.k();
    if let Some(s) = ens
        .codewords
        .iter()
        .flat_map(|c| c.symbols())
        .find(|&&s| s >= k)
    {
        return Err(Error::InvalidParameter(format!(
            "symbol {s} outside alphabet of size {k}"
        )));
    }
    let holevo_n_letter = ensemble_holevo(ch, ens, cap)?;
    let divergence_n_letter = ensemble_divergence(ch, ens, cap)?;

    let mut holevo_sum_marginals = 0.0;
    let mut divergence_sum_marginals = 0.0;
    for i in 0..n {
        let p = ens.marginal(i, k)?;
        holevo_sum_marginals += holevo_information(ch.states(Side::Receiver), &p)?.value();
        let rho_i = average_output_state(ch, &p, Side::Eavesdropper)?;
        divergence_sum_marginals += relative_entropy(&rho_i, ch.rho(0))?.value();
    }
    let p_bar = ens.average_marginal(k)?;
    let holevo_average = n as f64 * holevo_information(ch.states(Side::Receiver), &p_bar)?.value();
    let rho_bar = average_output_state(ch, &p_bar, Side::Eavesdropper)?;
    let divergence_average = n as f64 * relative_entropy(&rho_bar, ch.rho(0))?.value();

    let links = vec![
        link(
            "holevo_n_letter <= holevo_sum_marginals",
            holevo_n_letter,
            holevo_sum_marginals,
        ),
        link(
            "holevo_sum_marginals <= holevo_average",
            holevo_sum_marginals,
            holevo_average,
        ),
        link(
            "divergence_sum_marginals <= divergence_n_letter",
            divergence_sum_marginals,
            divergence_n_letter,
        ),
        link(
            "divergence_average <= divergence_sum_marginals",
            divergence_average,
            divergence_sum_marginals,
        ),
    ];
    let all_hold = links.iter().all(|l| l.holds);
    Ok(ChainReport {
        n,
        holevo_n_letter,
        holevo_sum_marginals,
        holevo_average,
        divergence_n_letter,
        divergence_sum_marginals,
        divergence_average,
        links,
        all_hold,
    })
}

/// Fano upper bound on `ln M / √(nδ)` for any code with average error `ε` whose
/// average input type has Holevo information `χ(P̄)`:
/// `ln M ≤ (n χ(P̄) + ln 2) / (1 − ε)`.
pub fn fano_throughput_bound(n: usize, delta: f64, n_holevo_average: f64, epsilon: f64) -> f64 {
    if epsilon >= 1.0 {
        return f64::INFINITY;
    }
    (n_holevo_average + std::f64::consts::LN_2) / ((1.0 - epsilon) * (n as f64 * delta).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cw(s: &[usize]) -> Codeword {
        Codeword::new(s.to_vec(), 3).unwrap()
    }

    #[test]
    fn deterministic_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let ens = Ensemble::uniform(vec![cw(&[1, 2, 0])]).unwrap();
        let r = converse_chain(&ch, &ens, DimCap::DEFAULT).unwrap();
        assert!(r.holevo_n_letter.abs() < 1e-12);
        let additive: f64 = [1, 2, 0]
            .iter()
            .map(|&x| relative_entropy(ch.rho(x), ch.rho(0)).unwrap().value())
            .sum();
        assert!((r.divergence_n_letter - additive).abs() < 1e-9);
        assert!((r.divergence_sum_marginals - additive).abs() < 1e-12);
        assert!(r.all_hold);
    }

    #[test]
    fn divergence_matches_generic_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let ens = Ensemble::new(vec![cw(&[1, 2]), cw(&[0, 1])], vec![0.3, 0.7]).unwrap();
        let fast = ensemble_divergence(&ch, &ens, DimCap::DEFAULT).unwrap();
        let avg = ensemble_output_state(&ch, &ens, Side::Eavesdropper, DimCap::DEFAULT).unwrap();
        let reference = ch.rho(0).tensor(ch.rho(0), DimCap::DEFAULT).unwrap();
        let generic = relative_entropy(&avg, &reference).unwrap().value();
        assert!((fast - generic).abs() < 1e-10);
    }

    #[test]
    fn iid_ensemble_saturates_receiver_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = random_channel(&mut rng, 2, 2, 2);
        let p = [0.3, 0.7];
        let mut codewords = Vec::new();
        let mut weights = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                codewords.push(Codeword::new(vec![a, b], 2).unwrap());
                weights.push(p[a] * p[b]);
            }
        }
        let r = converse_chain(
            &ch,
            &Ensemble::new(codewords, weights).unwrap(),
            DimCap::DEFAULT,
        )
        .unwrap();
        assert!((r.holevo_n_letter - r.holevo_sum_marginals).abs() < 1e-9);
        assert!((r.holevo_sum_marginals - r.holevo_average).abs() < 1e-9);
        assert!(r.all_hold);
    }

    #[test]
    fn random_ensembles_obey_both_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ch = random_channel(&mut rng, 3, 2, 2);
        for _ in 0..5 {
            let codewords: Vec<Codeword> = (0..2)
                .map(|_| {
                    Codeword::new((0..3).map(|_| rng.random_range(0..3)).collect(), 3).unwrap()
                })
                .collect();
            let w: f64 = rng.random_range(0.1..0.9);
            let r = converse_chain(
                &ch,
                &Ensemble::new(codewords, vec![w, 1.0 - w]).unwrap(),
                DimCap::DEFAULT,
            )
            .unwrap();
            assert!(r.all_hold, "{r:?}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ch = random_channel(&mut rng, 2, 2, 2);
        let ens = Ensemble::uniform(vec![Codeword::new(vec![0; 6], 2).unwrap()]).unwrap();
        assert!(matches!(
            converse_chain(&ch, &ens, DimCap(32)),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn fano_bound() {
        assert_eq!(fano_throughput_bound(4, 0.05, 0.0, 1.0), f64::INFINITY);
        let b = fano_throughput_bound(4, 0.25, 1.0, 0.5);
        assert!((b - (1.0 + std::f64::consts::LN_2) / 0.5).abs() < 1e-15);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Codeword, CqWiretapChannel, InputDistribution};
use crate::converse::Ensemble;
use crate::divergence::chi_squared;
use crate::error::{Error, Result};

/// Constants of the random-coding construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Covertness budget in nats.
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Exponent parameter of the error analysis.
    pub s: f64,
    pub seed: u64,
    /// Number of messages.
    pub m: usize,
    /// Blocklength.
    pub n: usize,
}

impl SimParams {
    pub const DEFAULT_SLACK: f64 = 0.5;
    pub const DEFAULT_S: f64 = 0.1;

    pub fn new(delta: f64, n: usize, m: usize, seed: u64) -> Result<Self> {
        let p = Self {
            delta,
            beta: Self::DEFAULT_SLACK,
            gamma: Self::DEFAULT_SLACK,
            theta: Self::DEFAULT_SLACK,
            s: Self::DEFAULT_S,
            seed,
            m,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "δ = {} must be positive",
                self.delta
            )));
        }
        for (name, v) in [
            ("β", self.beta),
            ("γ", self.gamma),
            ("θ", self.theta),
            ("s", self.s),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside (0, 1)"
                )));
            }
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "blocklength must be positive".into(),
            ));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter(
                "message count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `√(½ χ²(ρ̃*, ρ(0)))` for `ρ̃* = Σ_x P̃*(x) ρ(x)`.
pub(crate) fn chi_sq_scale(ch: &CqWiretapChannel, p_tilde: &InputDistribution) -> Result<f64> {
    let rho_tilde =
        crate::channel::average_output_state(ch, p_tilde, crate::channel::Side::Eavesdropper)?;
    let chi2 = chi_squared(&rho_tilde, ch.rho(0))?.value();
    if chi2 <= 0.0 {
        return Err(Error::WrongRegime("χ²(ρ̃*, ρ(0)) vanishes".into()));
    }
    Ok((0.5 * chi2).sqrt())
}

/// `αₙ = (1−β) √(δ/n) / √(½ χ²(ρ̃*, ρ(0)))`, clamped to `(0, 1]`.
pub fn alpha_n(
    params: &SimParams,
    ch: &CqWiretapChannel,
    p_tilde: &InputDistribution,
) -> Result<f64> {
    let scale = chi_sq_scale(ch, p_tilde)?;
    let a = (1.0 - params.beta) * (params.delta / params.n as f64).sqrt() / scale;
    Ok(a.min(1.0))
}

/// `Pₙ(0) = 1 − αₙ`, `Pₙ(x) = αₙ P̃*(x)` for `x ≠ 0`.
pub fn build_input_distribution(
    alpha: f64,
    p_tilde: &InputDistribution,
) -> Result<InputDistribution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "αₙ = {alpha} outside (0, 1]"
        )));
    }
    if p_tilde.probs()[0] != 0.0 {
        return Err(Error::InvalidDistribution("P̃(0) must be 0".into()));
    }
    let mut probs: Vec<f64> = p_tilde.probs().iter().map(|p| alpha * p).collect();
    // Σ_{x≠0} αP̃(x) rounds to within an ulp of α, so P(0) absorbs the remainder.
    probs[0] = (1.0 - probs[1..].iter().sum::<f64>()).max(0.0);
    InputDistribution::new(probs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub m: usize,
    pub codewords: Vec<Codeword>,
    pub sampling_distribution: InputDistribution,
}

impl Codebook {
    /// The uniform-message ensemble over the codewords.
    pub fn ensemble(&self) -> Result<Ensemble> {
        Ensemble::uniform(self.codewords.clone())
    }
}

/// The generator behind every sampled codebook: ChaCha8 keyed by `seed`, on the
/// stream `(n << 32) | M` so that cells of a sweep sharing a seed stay independent.
pub fn codebook_rng(seed: u64, n: usize, m: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | (m as u64 & 0xffff_ffff));
    rng
}

/// Inverse-CDF draw; never returns a zero-probability symbol.
pub fn sample_symbol<R: Rng + ?Sized>(rng: &mut R, cdf: &[f64], probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < probs.len() && probs[idx] > 0.0 {
        idx
    } else {
        probs
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("a distribution has positive mass")
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// `M` codewords of length `n` with i.i.d. symbols from `Pₙ`.
pub fn sample_codebook(pn: &InputDistribution, n: usize, m: usize, seed: u64) -> Result<Codebook> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("n and M must be positive".into()));
    }
    let k = pn.len();
    let cdf = cumulative(pn.probs());
    let mut rng = codebook_rng(seed, n, m);
    let codewords = (0..m)
        .map(|_| {
            Codeword::new(
                (0..n)
                    .map(|_| sample_symbol(&mut rng, &cdf, pn.probs()))
                    .collect(),
                k,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Codebook {
        n,
        m,
        codewords,
        sampling_distribution: pn.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityOperator;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    fn diagonal_pair() -> CqWiretapChannel {
        CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
        )
        .unwrap()
    }

    #[test]
    fn alpha_examples() {
        let ch = diagonal_pair();
        let p = InputDistribution::point_mass(2, 1);
        let params = SimParams::new(0.01, 100, 2, 0).unwrap();
        let a = alpha_n(&params, &ch, &p).unwrap();
        assert!((a - 0.5 * 1e-4f64.sqrt() / 0.125f64.sqrt()).abs() < 1e-15);
        assert!((a - 0.014142).abs() < 1e-6);
        let quad = alpha_n(&SimParams { n: 400, ..params }, &ch, &p).unwrap();
        assert!((quad - a / 2.0).abs() < 1e-12);
        let tight = alpha_n(
            &SimParams {
                beta: 1.0 - 1e-12,
                ..params
            },
            &ch,
            &p,
        )
        .unwrap();
        assert!(tight < 1e-12);
    }

    #[test]
    fn input_distribution_examples() {
        let p = InputDistribution::new(vec![0.0, 0.25, 0.75]).unwrap();
        let pn = build_input_distribution(0.1, &p).unwrap();
        assert_eq!(pn.probs().iter().sum::<f64>(), 1.0);
        assert!((pn.probs()[0] - 0.9).abs() < 1e-15);
        let full = build_input_distribution(1.0, &p).unwrap();
        assert_eq!(full.probs(), p.probs());
        let two = build_input_distribution(0.2, &InputDistribution::point_mass(3, 2)).unwrap();
        assert_eq!(two.support(), vec![0, 2]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let pn = InputDistribution::new(vec![0.7, 0.2, 0.1]).unwrap();
        let a = sample_codebook(&pn, 6, 4, 99).unwrap();
        let b = sample_codebook(&pn, 6, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_codebook(&pn, 6, 4, 100).unwrap();
        assert_ne!(a.codewords, c.codewords);
        assert!(a.codewords.iter().all(|c| c.len() == 6));
    }

    #[test]
    fn point_mass_gives_all_zero_codebook() {
        let cb = sample_codebook(&InputDistribution::point_mass(3, 0), 5, 3, 1).unwrap();
        assert!(cb
            .codewords
            .iter()
            .all(|c| c.symbols().iter().all(|&s| s == 0)));
    }

    #[test]
    fn empirical_frequencies_concentrate() {
        let pn = InputDistribution::new(vec![0.6, 0.3, 0.1]).unwrap();
        let draws = 100_000;
        let cb = sample_codebook(&pn, draws, 1, 7).unwrap();
        let q = cb.codewords[0].empirical_type(3);
        for (qx, px) in q.iter().zip(pn.probs()) {
            let sd = (px * (1.0 - px) / draws as f64).sqrt();
            assert!((qx - px).abs() < 3.0 * sd, "{qx} vs {px}");
        }
    }
}

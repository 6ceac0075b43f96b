use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::channel::{CqWiretapChannel, InputDistribution};
use crate::converse::{converse_chain, fano_throughput_bound, ChainReport};
use crate::error::{Error, Result};
use crate::operator::DimCap;
use crate::scaling::scaling_constant;

use super::codebook::{alpha_n, build_input_distribution, sample_codebook, SimParams};
use super::decode::pgm_error_probability;
use super::diagnostics::{a_hat, ensemble_average_divergence, type_set_membership};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub s: f64,
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub epsilon_target: f64,
    pub seeds: Vec<u64>,
    pub cap: DimCap,
}

impl SweepConfig {
    pub fn new(delta: f64, n_list: Vec<usize>, m_list: Vec<usize>, seeds: Vec<u64>) -> Self {
        Self {
            delta,
            beta: SimParams::DEFAULT_SLACK,
            gamma: SimParams::DEFAULT_SLACK,
            theta: SimParams::DEFAULT_SLACK,
            s: SimParams::DEFAULT_S,
            n_list,
            m_list,
            epsilon_target: 0.1,
            seeds,
            cap: DimCap::DEFAULT,
        }
    }

    fn params(&self, n: usize, m: usize, seed: u64) -> SimParams {
        SimParams {
            delta: self.delta,
            beta: self.beta,
            gamma: self.gamma,
            theta: self.theta,
            s: self.s,
            seed,
            m,
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub alpha_n: f64,
    /// `ln M` in nats.
    pub k_n: f64,
    /// Average error of the square-root measurement.
    pub epsilon_n: f64,
    /// `D(ρⁿ‖ρ(0)^⊗n)` for the sampled codebook.
    pub covert_div: f64,
    /// `n D(ρₙ‖ρ(0))`, the covertness averaged over the code ensemble.
    pub covert_div_ensemble: f64,
    /// `K_n / √(nδ)`.
    pub normalized_throughput: f64,
    pub a_hat: f64,
    /// Fraction of codewords in the type set `𝒜ₙ`.
    pub type_set_fraction: f64,
    /// `epsilon_n ≤ ε_target` and `covert_div ≤ δ`.
    pub meets_targets: bool,
    /// Fano bound `(n χ(P̄) + ln 2) / ((1 − epsilon_n) √(nδ))` with `P̄` the codebook's average type.
    pub converse_bound: f64,
    pub converse_chain: ChainReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub scaling_constant: f64,
    pub p_tilde: InputDistribution,
    /// Sorted by `(n, M, seed)`.
    pub cells: Vec<SimulationReport>,
    pub skipped: Vec<SkippedCell>,
}

pub fn simulate_cell(
    ch: &CqWiretapChannel,
    p_tilde: &InputDistribution,
    params: &SimParams,
    epsilon_target: f64,
    cap: DimCap,
) -> Result<SimulationReport> {
    params.validate()?;
    let alpha = alpha_n(params, ch, p_tilde)?;
    let pn = build_input_distribution(alpha, p_tilde)?;
    let cb = sample_codebook(&pn, params.n, params.m, params.seed)?;
    let chain = converse_chain(ch, &cb.ensemble()?, cap)?;
    let covert_div = chain.divergence_n_letter;
    let epsilon_n = pgm_error_probability(ch, &cb, cap)?;
    let k_n = (params.m as f64).ln();
    let root = (params.n as f64 * params.delta).sqrt();
    let in_type_set = cb
        .codewords
        .iter()
        .filter(|c| type_set_membership(c, params.gamma, &pn))
        .count();
    Ok(SimulationReport {
        n: params.n,
        m: params.m,
        seed: params.seed,
        alpha_n: alpha,
        k_n,
        epsilon_n,
        covert_div,
        covert_div_ensemble: ensemble_average_divergence(ch, &pn, params.n)?,
        normalized_throughput: k_n / root,
        a_hat: a_hat(ch, p_tilde, params.theta, params.gamma, params.beta)?,
        type_set_fraction: in_type_set as f64 / params.m as f64,
        meets_targets: epsilon_n <= epsilon_target && covert_div <= params.delta,
        converse_bound: fano_throughput_bound(
            params.n,
            params.delta,
            chain.holevo_average,
            epsilon_n,
        ),
        converse_chain: chain,
    })
}

/// Samples and evaluates one codebook per `(n, M, seed)`. Cells whose tensor
/// dimension exceeds the cap are skipped and listed. The channel must be
/// sanitized and in the square-root regime.
pub fn sqrt_law_sweep(ch: &CqWiretapChannel, cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.n_list.is_empty() || cfg.m_list.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::InvalidParameter("empty n, M or seed list".into()));
    }
    let sc = scaling_constant(ch)?;
    let p_tilde = sc.optimizer;
    let mut jobs = Vec::new();
    for &n in &cfg.n_list {
        for &m in &cfg.m_list {
            for &seed in &cfg.seeds {
                let p = cfg.params(n, m, seed);
                p.validate()?;
                jobs.push(p);
            }
        }
    }
    let run = |p: &SimParams| {
        (
            *p,
            simulate_cell(ch, &p_tilde, p, cfg.epsilon_target, cfg.cap),
        )
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = jobs.iter().map(run).collect();

    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for (p, r) in results {
        match r {
            Ok(cell) => cells.push(cell),
            Err(e @ Error::DimensionCap { .. }) => skipped.push(SkippedCell {
                n: p.n,
                m: p.m,
                seed: p.seed,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    cells.sort_by_key(|c| (c.n, c.m, c.seed));
    skipped.sort_by_key(|c| (c.n, c.m, c.seed));
    Ok(SweepReport {
        config: cfg.clone(),
        scaling_constant: sc.l,
        p_tilde,
        cells,
        skipped,
    })
}

pub const CSV_HEADER: &str = "n,M,seed,K_n,epsilon_n,covert_div,normalized_throughput,a_hat";

pub fn write_csv<W: Write>(cells: &[SimulationReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.n, c.m, c.seed, c.k_n, c.epsilon_n, c.covert_div, c.normalized_throughput, c.a_hat
        )?;
    }
    Ok(())
}

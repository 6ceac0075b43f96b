//! Square-root (pretty-good) measurement decoding of a codebook at the receiver.

use num_complex::Complex64;

use crate::channel::{product_output_state, CqWiretapChannel, Side};
use crate::density::DensityOperator;
use crate::error::Result;
use crate::operator::{matrix_fn, CMatrix, DimCap, HermitianOperator, ScalarFn};

use super::codebook::Codebook;

/// POVM `{E_m} ∪ {E_⊥}` with `E_m = S^{−1/2} (σₘ/M) S^{−1/2}` on `supp S` and
/// `E_⊥ = 𝟙 − Π_S` declaring a decoding failure.
#[derive(Debug, Clone)]
pub struct Pgm {
    pub elements: Vec<HermitianOperator>,
    pub remainder: HermitianOperator,
}

impl Pgm {
    /// `‖Σ E_m + E_⊥ − 𝟙‖_F`.
    pub fn completeness_deviation(&self) -> f64 {
        let dim = self.remainder.dim();
        let mut acc = self.remainder.matrix() - CMatrix::identity(dim, dim);
        for e in &self.elements {
            acc += e.matrix();
        }
        acc.norm()
    }
}

fn codeword_states(
    ch: &CqWiretapChannel,
    cb: &Codebook,
    cap: DimCap,
) -> Result<Vec<DensityOperator>> {
    cb.codewords
        .iter()
        .map(|c| product_output_state(ch, c, Side::Receiver, cap))
        .collect()
}

struct Whitening {
    inv_sqrt: HermitianOperator,
    support: HermitianOperator,
}

fn whitening(states: &[DensityOperator]) -> Result<Whitening> {
    let dim = states[0].dim();
    let w = Complex64::new(1.0 / states.len() as f64, 0.0);
    let mut s = CMatrix::zeros(dim, dim);
    for st in states {
        s += st.matrix() * w;
    }
    let s = HermitianOperator::symmetrized(s);
    let inv_sqrt = matrix_fn(&s, ScalarFn::Power(-0.5), true)?;
    let support = crate::operator::support_projector(&s)?.operator().clone();
    Ok(Whitening { inv_sqrt, support })
}

pub fn pgm_povm(ch: &CqWiretapChannel, cb: &Codebook, cap: DimCap) -> Result<Pgm> {
    let states = codeword_states(ch, cb, cap)?;
    let wh = whitening(&states)?;
    let w = Complex64::new(1.0 / states.len() as f64, 0.0);
    let t = wh.inv_sqrt.matrix();
    let elements = states
        .iter()
        .map(|st| HermitianOperator::symmetrized(t * (st.matrix() * w) * t))
        .collect();
    let dim = wh.support.dim();
    let remainder =
        HermitianOperator::symmetrized(CMatrix::identity(dim, dim) - wh.support.matrix());
    Ok(Pgm {
        elements,
        remainder,
    })
}

/// `(1/M) Σₘ (1 − tr[Eₘ σⁿ(m)])` for the square-root measurement of the
/// uniformly weighted codeword states.
pub fn pgm_error_probability(ch: &CqWiretapChannel, cb: &Codebook, cap: DimCap) -> Result<f64> {
    let states = codeword_states(ch, cb, cap)?;
    let wh = whitening(&states)?;
    let m = states.len() as f64;
    let t = wh.inv_sqrt.matrix();
    let mut success = 0.0;
    for st in &states {
        // tr[Eₘ σₘ] = (1/M) tr[(T σₘ T) σₘ]
        let a = t * st.matrix() * t;
        success += crate::operator::trace_of_product(&a, st.matrix()).re / m;
    }
    Ok((1.0 - success / m).clamp(0.0, 1.0))
}

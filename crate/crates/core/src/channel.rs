//! The classical-quantum wiretap channel `x ↦ (σ(x), ρ(x))`.
//!
//! Symbol 0 is the "off" input. After [`sanitize`] every eavesdropper state is
//! supported inside `supp ρ(0)` and `ρ(0)` is full rank on the (compressed)
//! eavesdropper space, so `ρ(0)⁻¹` exists everywhere downstream.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::operator::{
    hermiticity_deviation, support_contained, CMatrix, DimCap, HermitianOperator, HERMITICITY_TOL,
    PSD_TOL, SUPPORT_TOL, TRACE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Receiver,
    Eavesdropper,
}

/// Probability vector over the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        InputDistribution::new(probs)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(p: InputDistribution) -> Self {
        p.probs
    }
}

impl InputDistribution {
    /// Entries must be `≥ -1e-12` and sum to 1 within `1e-10`; tiny negatives are clipped.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -1e-12) {
            return Err(Error::InvalidDistribution(format!("entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    /// Normalizes a nonnegative weight vector.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weights {weights:?}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(k: usize, x: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[x] = 1.0;
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| x)
            .collect()
    }

    /// `λ self + (1 − λ) other`.
    pub fn mix(&self, lambda: f64, other: &InputDistribution) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.len(),
                other.len()
            )));
        }
        Self::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        )
    }
}

/// A length-`n` input sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Codeword {
    symbols: Vec<usize>,
}

impl Codeword {
    pub fn new(symbols: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(s) = symbols.iter().find(|s| **s >= k) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} outside alphabet of size {k}"
            )));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Empirical distribution `Q_{xⁿ}` over an alphabet of size `k`.
    pub fn empirical_type(&self, k: usize) -> Vec<f64> {
        let mut q = vec![0.0; k];
        for &s in &self.symbols {
            q[s] += 1.0;
        }
        let n = self.symbols.len().max(1) as f64;
        q.iter_mut().for_each(|v| *v /= n);
        q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqWiretapChannel {
    sigma: Vec<DensityOperator>,
    rho: Vec<DensityOperator>,
}

impl CqWiretapChannel {
    pub fn new(sigma: Vec<DensityOperator>, rho: Vec<DensityOperator>) -> Result<Self> {
        if sigma.len() != rho.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} receiver states vs {} eavesdropper states",
                sigma.len(),
                rho.len()
            )));
        }
        if sigma.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size {} < 2",
                sigma.len()
            )));
        }
        for (name, states) in [("sigma", &sigma), ("rho", &rho)] {
            let d = states[0].dim();
            if let Some((x, s)) = states.iter().enumerate().find(|(_, s)| s.dim() != d) {
                return Err(Error::DimensionMismatch(format!(
                    "{name}[{x}] has dimension {} not {d}",
                    s.dim()
                )));
            }
        }
        Ok(Self { sigma, rho })
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn dy(&self) -> usize {
        self.sigma[0].dim()
    }

    pub fn dz(&self) -> usize {
        self.rho[0].dim()
    }

    pub fn sigma(&self, x: usize) -> &DensityOperator {
        &self.sigma[x]
    }

    pub fn rho(&self, x: usize) -> &DensityOperator {
        &self.rho[x]
    }

    pub fn states(&self, side: Side) -> &[DensityOperator] {
        match side {
            Side::Receiver => &self.sigma,
            Side::Eavesdropper => &self.rho,
        }
    }

    /// Sub-channel on the given symbols, in the given order.
    pub fn restrict(&self, symbols: &[usize]) -> Result<Self> {
        Self::new(
            symbols.iter().map(|&x| self.sigma[x].clone()).collect(),
            symbols.iter().map(|&x| self.rho[x].clone()).collect(),
        )
    }

    /// Applies `U · U^H` to every state on one side.
    pub fn conjugate(&self, side: Side, u: &CMatrix) -> Result<Self> {
        let conj = |v: &[DensityOperator]| {
            v.iter()
                .map(|s| s.conjugate_by(u))
                .collect::<Result<Vec<_>>>()
        };
        match side {
            Side::Receiver => Self::new(conj(&self.sigma)?, self.rho.clone()),
            Side::Eavesdropper => Self::new(self.sigma.clone(), conj(&self.rho)?),
        }
    }
}

/// Channel matrices as read from a file, before any validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    pub k: usize,
    pub dy: usize,
    pub dz: usize,
    pub sigma: Vec<CMatrix>,
    pub rho: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosticKind {
    Alphabet,
    Shape,
    Hermiticity,
    Trace,
    Positivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pass: bool,
    pub issues: Vec<Diagnostic>,
}

impl ChannelMatrices {
    /// Checks every channel invariant and reports all violations found.
    pub fn validate(&self) -> Diagnostics {
        let mut issues = Vec::new();
        if self.k < 2 {
            issues.push(Diagnostic {
                kind: DiagnosticKind::Alphabet,
                side: None,
                symbol: None,
                detail: format!("alphabet size {} < 2", self.k),
            });
        }
        for (side, states, dim) in [
            (Side::Receiver, &self.sigma, self.dy),
            (Side::Eavesdropper, &self.rho, self.dz),
        ] {
            if states.len() != self.k {
                issues.push(Diagnostic {
                    kind: DiagnosticKind::Shape,
                    side: Some(side),
                    symbol: None,
                    detail: format!("{} states for k = {}", states.len(), self.k),
                });
            }
            for (x, m) in states.iter().enumerate() {
                let mut push = |kind, detail: String| {
                    issues.push(Diagnostic {
                        kind,
                        side: Some(side),
                        symbol: Some(x),
                        detail,
                    });
                };
                if m.nrows() != dim || m.ncols() != dim {
                    push(
                        DiagnosticKind::Shape,
                        format!("{}x{} matrix, expected {dim}x{dim}", m.nrows(), m.ncols()),
                    );
                    continue;
                }
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    push(DiagnosticKind::Shape, "non-finite entry".into());
                    continue;
                }
                let dev = hermiticity_deviation(m);
                if dev > HERMITICITY_TOL {
                    push(
                        DiagnosticKind::Hermiticity,
                        format!("max |A - A^H| entry {dev:e}"),
                    );
                    continue;
                }
                let op = HermitianOperator::symmetrized(m.clone());
                let tr = op.trace();
                if (tr - 1.0).abs() > TRACE_TOL {
                    push(DiagnosticKind::Trace, format!("trace {tr}"));
                }
                match op.min_eigenvalue() {
                    Ok(min) if min < -PSD_TOL => {
                        push(DiagnosticKind::Positivity, format!("eigenvalue {min:e}"))
                    }
                    Ok(_) => {}
                    Err(e) => push(DiagnosticKind::Positivity, e.to_string()),
                }
            }
        }
        Diagnostics {
            pass: issues.is_empty(),
            issues,
        }
    }

    pub fn into_channel(self) -> std::result::Result<CqWiretapChannel, Diagnostics> {
        let diag = self.validate();
        if !diag.pass {
            return Err(diag);
        }
        let build = |v: Vec<CMatrix>| {
            v.into_iter()
                .map(DensityOperator::new)
                .collect::<Result<Vec<_>>>()
        };
        let wrap = |e: Error| Diagnostics {
            pass: false,
            issues: vec![Diagnostic {
                kind: DiagnosticKind::Shape,
                side: None,
                symbol: None,
                detail: e.to_string(),
            }],
        };
        let sigma = build(self.sigma).map_err(wrap)?;
        let rho = build(self.rho).map_err(wrap)?;
        CqWiretapChannel::new(sigma, rho).map_err(wrap)
    }
}

impl From<&CqWiretapChannel> for ChannelMatrices {
    fn from(ch: &CqWiretapChannel) -> Self {
        ChannelMatrices {
            k: ch.k(),
            dy: ch.dy(),
            dz: ch.dz(),
            sigma: ch.sigma.iter().map(|s| s.matrix().clone()).collect(),
            rho: ch.rho.iter().map(|s| s.matrix().clone()).collect(),
        }
    }
}

/// Result of [`sanitize`].
#[derive(Debug, Clone)]
pub struct Sanitized {
    pub channel: CqWiretapChannel,
    /// Original labels of the discarded symbols.
    pub removed: Vec<usize>,
    /// Original label of each symbol of the sanitized channel, `retained[0] == 0`.
    pub retained: Vec<usize>,
    /// Eavesdropper dimension before compression onto `supp ρ(0)`.
    pub original_dz: usize,
}

/// Drops every symbol whose eavesdropper state leaves `supp ρ(0)` and compresses
/// the eavesdropper space onto `supp ρ(0)`.
pub fn sanitize(ch: &CqWiretapChannel) -> Result<Sanitized> {
    let rho0 = ch.rho(0);
    let mut retained = vec![0];
    let mut removed = Vec::new();
    for x in 1..ch.k() {
        if support_contained(ch.rho(x).operator(), rho0.operator())? {
            retained.push(x);
        } else {
            removed.push(x);
        }
    }
    if retained.len() < 2 {
        return Err(Error::UnusableChannel(format!(
            "every input except 0 leaves the support of rho(0) (removed {removed:?})"
        )));
    }
    let restricted = ch.restrict(&retained)?;
    let eigen = rho0.operator().eigen()?;
    let rank = eigen.values.iter().filter(|&&l| l > SUPPORT_TOL).count();
    let channel = if rank == ch.dz() {
        restricted
    } else {
        let v = eigen.vectors.columns(0, rank).into_owned();
        let vh = v.adjoint();
        let compress = |s: &DensityOperator| -> Result<DensityOperator> {
            let m = &vh * s.matrix() * &v;
            let tr = m.trace().re;
            DensityOperator::from_operator(HermitianOperator::symmetrized(
                m / Complex64::new(tr, 0.0),
            ))
        };
        let rho = restricted
            .rho
            .iter()
            .map(compress)
            .collect::<Result<Vec<_>>>()?;
        CqWiretapChannel::new(restricted.sigma, rho)?
    };
    Ok(Sanitized {
        channel,
        removed,
        retained,
        original_dz: ch.dz(),
    })
}

/// `state(x₁) ⊗ ··· ⊗ state(xₙ)`.
pub fn product_output_state(
    ch: &CqWiretapChannel,
    codeword: &Codeword,
    side: Side,
    cap: DimCap,
) -> Result<DensityOperator> {
    let states = ch.states(side);
    let symbols = codeword.symbols();
    if symbols.is_empty() {
        return Err(Error::InvalidParameter("empty codeword".into()));
    }
    if let Some(s) = symbols.iter().find(|s| **s >= ch.k()) {
        return Err(Error::InvalidParameter(format!(
            "symbol {s} outside alphabet of size {}",
            ch.k()
        )));
    }
    cap.check_power(states[0].dim(), symbols.len())?;
    let mut acc = states[symbols[0]].clone();
    for &s in &symbols[1..] {
        acc = acc.tensor(&states[s], cap)?;
    }
    Ok(acc)
}

/// `Σ_x P(x) state(x)`.
pub fn average_output_state(
    ch: &CqWiretapChannel,
    p: &InputDistribution,
    side: Side,
) -> Result<DensityOperator> {
    if p.len() != ch.k() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} symbols, k = {}",
            p.len(),
            ch.k()
        )));
    }
    let refs: Vec<&DensityOperator> = ch.states(side).iter().collect();
    DensityOperator::mixture(p.probs(), &refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::partial_trace;
    use crate::random::{random_channel, random_probability};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    fn qubit_channel() -> CqWiretapChannel {
        CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
            vec![diag(&[0.5, 0.5]), diag(&[0.75, 0.25])],
        )
        .unwrap()
    }

    #[test]
    fn validate_passes_well_formed_channel() {
        assert!(ChannelMatrices::from(&qubit_channel()).validate().pass);
    }

    #[test]
    fn validate_reports_trace() {
        let mut m = ChannelMatrices::from(&qubit_channel());
        m.rho[1] = HermitianOperator::from_real_diagonal(&[0.65, 0.25]).into_matrix();
        let d = m.validate();
        assert!(!d.pass);
        assert_eq!(d.issues[0].kind, DiagnosticKind::Trace);
        assert_eq!(d.issues[0].side, Some(Side::Eavesdropper));
        assert_eq!(d.issues[0].symbol, Some(1));
    }

    #[test]
    fn validate_reports_hermiticity_and_shape() {
        let mut m = ChannelMatrices::from(&qubit_channel());
        m.sigma[0][(0, 1)] = Complex64::new(1e-6, 0.0);
        m.rho.push(CMatrix::identity(3, 3));
        let d = m.validate();
        let kinds: Vec<_> = d.issues.iter().map(|i| i.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::Hermiticity));
        assert!(kinds.contains(&DiagnosticKind::Shape));
    }

    #[test]
    fn validate_reports_negative_eigenvalue() {
        let mut m = ChannelMatrices::from(&qubit_channel());
        m.sigma[1] = diag(&[0.5, 0.5]).matrix().clone();
        m.sigma[1][(0, 0)] = Complex64::new(1.1, 0.0);
        m.sigma[1][(1, 1)] = Complex64::new(-0.1, 0.0);
        let d = m.validate();
        assert_eq!(d.issues[0].kind, DiagnosticKind::Positivity);
    }

    #[test]
    fn sanitize_leaves_full_rank_channel_alone() {
        let ch = qubit_channel();
        let s = sanitize(&ch).unwrap();
        assert!(s.removed.is_empty());
        assert_eq!(s.channel, ch);
    }

    #[test]
    fn sanitize_removes_orthogonal_symbol() {
        let ch = CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.9, 0.1]), diag(&[0.2, 0.8])],
            vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), diag(&[1.0, 0.0])],
        )
        .unwrap();
        let s = sanitize(&ch).unwrap();
        assert_eq!(s.removed, vec![1]);
        assert_eq!(s.retained, vec![0, 2]);
        assert_eq!(s.channel.dz(), 1);
        assert_eq!(s.channel.sigma(1), ch.sigma(2));
    }

    #[test]
    fn sanitize_errors_when_only_off_symbol_survives() {
        let ch = CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.9, 0.1])],
            vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
        )
        .unwrap();
        assert!(matches!(sanitize(&ch), Err(Error::UnusableChannel(_))));
    }

    #[test]
    fn sanitize_restricts_eavesdropper_space() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus =
            DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let ch = CqWiretapChannel::new(
            vec![diag(&[0.5, 0.5]), diag(&[0.9, 0.1])],
            vec![plus.clone(), plus],
        )
        .unwrap();
        let s = sanitize(&ch).unwrap();
        assert!(s.removed.is_empty());
        assert_eq!(s.channel.dz(), 1);
        assert!((s.channel.rho(0).matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let again = sanitize(&s.channel).unwrap();
        assert_eq!(again.channel, s.channel);
    }

    #[test]
    fn product_output_examples() {
        let ch = qubit_channel();
        let cap = DimCap::DEFAULT;
        let one = product_output_state(
            &ch,
            &Codeword::new(vec![1], 2).unwrap(),
            Side::Receiver,
            cap,
        )
        .unwrap();
        assert_eq!(&one, ch.sigma(1));
        let zeros = product_output_state(
            &ch,
            &Codeword::new(vec![0, 0, 0], 2).unwrap(),
            Side::Eavesdropper,
            cap,
        )
        .unwrap();
        let expect = ch
            .rho(0)
            .tensor(ch.rho(0), cap)
            .unwrap()
            .tensor(ch.rho(0), cap)
            .unwrap();
        assert_eq!(zeros, expect);
        assert!(matches!(
            product_output_state(
                &ch,
                &Codeword::new(vec![0; 13], 2).unwrap(),
                Side::Receiver,
                cap
            ),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn product_output_marginals_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = random_channel(&mut rng, 3, 2, 2);
        let cw = Codeword::new(vec![2, 0, 1], 3).unwrap();
        let state = product_output_state(&ch, &cw, Side::Receiver, DimCap::DEFAULT).unwrap();
        assert!((state.operator().trace() - 1.0).abs() < 1e-12);
        for (i, &x) in cw.symbols().iter().enumerate() {
            let m = partial_trace(state.operator(), &[2, 2, 2], i).unwrap();
            assert!((m.matrix() - ch.sigma(x).matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn average_output_examples() {
        let ch = CqWiretapChannel::new(
            vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
            vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
        )
        .unwrap();
        let avg = average_output_state(
            &ch,
            &InputDistribution::point_mass(2, 0),
            Side::Eavesdropper,
        )
        .unwrap();
        assert_eq!(&avg, ch.rho(0));
        let avg =
            average_output_state(&ch, &InputDistribution::uniform(2), Side::Receiver).unwrap();
        assert_eq!(avg, diag(&[0.5, 0.5]));
    }

    #[test]
    fn average_output_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ch = random_channel(&mut rng, 4, 3, 2);
        let p1 = InputDistribution::new(random_probability(&mut rng, 4)).unwrap();
        let p2 = InputDistribution::new(random_probability(&mut rng, 4)).unwrap();
        let lambda = 0.3;
        let mixed =
            average_output_state(&ch, &p1.mix(lambda, &p2).unwrap(), Side::Eavesdropper).unwrap();
        let a1 = average_output_state(&ch, &p1, Side::Eavesdropper).unwrap();
        let a2 = average_output_state(&ch, &p2, Side::Eavesdropper).unwrap();
        let expect = a1.matrix() * Complex64::new(lambda, 0.0)
            + a2.matrix() * Complex64::new(1.0 - lambda, 0.0);
        assert!((mixed.matrix() - expect).norm() < 1e-12);
    }

    #[test]
    fn distribution_and_codeword_checks() {
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(InputDistribution::new(vec![1.1, -0.1]).is_err());
        assert_eq!(
            InputDistribution::from_weights(&[1.0, 3.0])
                .unwrap()
                .probs(),
            &[0.25, 0.75]
        );
        assert!(Codeword::new(vec![0, 2], 2).is_err());
        assert_eq!(
            Codeword::new(vec![0, 1, 1, 1], 2)
                .unwrap()
                .empirical_type(2),
            vec![0.25, 0.75]
        );
    }
}

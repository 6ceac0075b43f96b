use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{tensor_product, CMatrix, DimCap, HermitianOperator, PSD_TOL, TRACE_TOL};

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    base: HermitianOperator,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::from_operator(HermitianOperator::new(matrix)?)
    }

    pub fn from_operator(base: HermitianOperator) -> Result<Self> {
        let trace = base.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Trace { trace });
        }
        let min = base.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { base })
    }

    /// Wraps the result of algebra that provably preserves the density
    /// constraints (mixtures, tensor products, partial traces).
    pub(crate) fn from_operator_unchecked(base: HermitianOperator) -> Self {
        Self { base }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::from_operator(HermitianOperator::from_real_diagonal(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            base: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self {
            base: HermitianOperator::symmetrized(&v * v.adjoint()),
        })
    }

    /// Qubit state `½(I + r·σ)` for a Bloch vector with `|r| ≤ 1`.
    pub fn qubit_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let half = 0.5;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(half * (1.0 + z), 0.0),
                Complex64::new(half * x, -half * y),
                Complex64::new(half * x, half * y),
                Complex64::new(half * (1.0 - z), 0.0),
            ],
        );
        Self::new(m)
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn tensor(&self, other: &DensityOperator, cap: DimCap) -> Result<DensityOperator> {
        Ok(Self {
            base: tensor_product(&self.base, &other.base, cap)?,
        })
    }

    /// `U ρ U^H`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<DensityOperator> {
        Ok(Self {
            base: self.base.conjugate_by(u)?,
        })
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[&DensityOperator]) -> Result<DensityOperator> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (&w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch(format!("{} vs {}", s.dim(), dim)));
            }
            if w != 0.0 {
                acc += s.matrix() * Complex64::new(w, 0.0);
            }
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < -1e-12) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights {weights:?}"
            )));
        }
        Ok(Self {
            base: HermitianOperator::symmetrized(acc),
        })
    }
}

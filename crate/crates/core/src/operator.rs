//! Dense Hermitian operator algebra on finite-dimensional Hilbert spaces.
//!
//! Everything is built on one cached spectral decomposition per operator:
//! matrix functions, support and positive-part projectors, and pinching all
//! work eigenvalue-wise in that basis.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues at or below this are treated as zero (outside the support).
pub const SUPPORT_TOL: f64 = 1e-12;
/// Maximum entrywise deviation from Hermiticity accepted at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are numerical noise and clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Default merge tolerance for degenerate eigenvalues.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;
/// Slack for the `supp(A) ⊆ supp(B)` test `‖Π_B Π_A − Π_A‖ ≤ SUPPORT_INCLUSION_TOL`.
pub const SUPPORT_INCLUSION_TOL: f64 = 1e-9;

/// Upper bound on the dimension of any tensor product the crate will form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DimCap(pub usize);

impl DimCap {
    pub const DEFAULT: DimCap = DimCap(4096);

    pub fn check(self, requested: usize) -> Result<()> {
        if requested > self.0 {
            Err(Error::DimensionCap {
                requested,
                cap: self.0,
            })
        } else {
            Ok(())
        }
    }

    /// `base^exp` with overflow and cap checks.
    pub fn check_power(self, base: usize, exp: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..exp {
            dim = dim
                .checked_mul(base)
                .filter(|d| *d <= self.0)
                .ok_or(Error::DimensionCap {
                    requested: base.saturating_pow(exp as u32),
                    cap: self.0,
                })?;
        }
        Ok(dim)
    }
}

impl Default for DimCap {
    fn default() -> Self {
        DimCap::DEFAULT
    }
}

/// Eigenvalues sorted descending with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(f(λ)) V^H`.
    fn rebuild(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    fn projector_onto(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.rebuild(|l| if keep(l) { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: CMatrix,
    eigen: OnceLock<Result<Arc<Eigen>>>,
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Checks squareness and Hermiticity within [`HERMITICITY_TOL`], then
    /// symmetrizes so the stored matrix is exactly Hermitian.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Symmetrizes without checking. Used for results of exact algebra on
    /// Hermitian inputs where only rounding noise breaks Hermiticity.
    pub(crate) fn symmetrized(matrix: CMatrix) -> Self {
        let herm = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            matrix: herm,
            eigen: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex64::new(d, 0.0)));
        Self::symmetrized(DMatrix::from_diagonal(&v))
    }

    pub fn identity(dim: usize) -> Self {
        Self::symmetrized(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::symmetrized(CMatrix::zeros(dim, dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigen(&self) -> Result<&Eigen> {
        match self
            .eigen
            .get_or_init(|| compute_eigen(&self.matrix).map(Arc::new))
        {
            Ok(e) => Ok(e),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.eigen()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.values.last().copied().unwrap_or(0.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::symmetrized(&self.matrix * Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrized(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrized(&self.matrix - &other.matrix))
    }

    /// `U A U^H` for a unitary (or isometry) `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "conjugating a {}-dim operator by a {}x{} matrix",
                self.dim(),
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(Self::symmetrized(u * &self.matrix * u.adjoint()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigen()?.values.iter().map(|l| l.abs()).sum())
    }

    /// `Re tr[A B]`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        trace_of_product(&self.matrix, &other.matrix).re
    }
}

/// `tr[A B]` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch(format!("{a} vs {b}")))
    } else {
        Ok(())
    }
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn compute_eigen(m: &CMatrix) -> Result<Eigen> {
    let dim = m.nrows();
    if dim == 1 {
        return Ok(Eigen {
            values: vec![m[(0, 0)].re],
            vectors: CMatrix::identity(1, 1),
        });
    }
    if is_diagonal(m) {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| m[(b, b)].re.total_cmp(&m[(a, a)].re));
        let values = order.iter().map(|&i| m[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(dim, dim);
        for (j, &i) in order.iter().enumerate() {
            vectors[(i, j)] = Complex64::new(1.0, 0.0);
        }
        return Ok(Eigen { values, vectors });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenFailure { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { dim });
    }
    let mut vectors = CMatrix::zeros(dim, dim);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    Ok(Eigen { values, vectors })
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// An orthogonal projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    base: HermitianOperator,
    rank: usize,
}

impl Projector {
    pub fn operator(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn from_eigen(eigen: &Eigen, keep: impl Fn(f64) -> bool) -> Self {
        let rank = eigen.values.iter().filter(|&&l| keep(l)).count();
        let base = HermitianOperator::symmetrized(eigen.projector_onto(keep));
        Projector { base, rank }
    }

    /// Whether the range of `self` lies inside the range of `outer`,
    /// i.e. `‖Π_outer Π_self − Π_self‖_F ≤ tol`.
    pub fn is_contained_in(&self, outer: &Projector, tol: f64) -> bool {
        let prod = outer.matrix() * self.matrix();
        (prod - self.matrix()).norm() <= tol
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// One value per eigenvalue group, descending.
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Projector>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> HermitianOperator {
        let dim = self.projectors.first().map(|p| p.dim()).unwrap_or(0);
        let mut acc = CMatrix::zeros(dim, dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc += p.matrix() * Complex64::new(*l, 0.0);
        }
        HermitianOperator::symmetrized(acc)
    }
}

/// Spectral decomposition with eigenvalues closer than `group_tol` merged into
/// one eigenprojector.
pub fn eig_hermitian(a: &HermitianOperator, group_tol: f64) -> Result<SpectralDecomposition> {
    let eigen = a.eigen()?;
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    for group in group_indices(&eigen.values, group_tol) {
        let mean = group.iter().map(|&i| eigen.values[i]).sum::<f64>() / group.len() as f64;
        let cols: Vec<_> = group.iter().map(|&i| eigen.vectors.column(i)).collect();
        let v = CMatrix::from_columns(&cols);
        let p = HermitianOperator::symmetrized(&v * v.adjoint());
        eigenvalues.push(mean);
        projectors.push(Projector {
            base: p,
            rank: group.len(),
        });
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
    })
}

/// Partition of descending eigenvalue indices into runs within `tol` of the run's head.
fn group_indices(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut head = f64::NAN;
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (head - v).abs() <= tol => g.push(i),
            _ => {
                groups.push(vec![i]);
                head = v;
            }
        }
    }
    groups
}

/// Scalar function lifted to operators by [`matrix_fn`].
#[derive(Clone, Copy)]
pub enum ScalarFn<'a> {
    /// Natural logarithm.
    Log,
    Exp,
    Power(f64),
    Other(&'a dyn Fn(f64) -> f64),
}

impl ScalarFn<'_> {
    fn singular_at_zero(&self) -> bool {
        match self {
            ScalarFn::Log => true,
            ScalarFn::Power(p) => *p <= 0.0,
            _ => false,
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Log => x.ln(),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Power(p) => x.powf(*p),
            ScalarFn::Other(f) => f(x),
        }
    }
}

/// Applies `f` eigenvalue-wise.
///
/// For `Log` and non-positive powers, `on_support_only` maps eigenvalues at or
/// below [`SUPPORT_TOL`] to 0 (the `0 log 0 = 0` convention); without it such
/// eigenvalues are an error. Eigenvalues in `[-PSD_TOL, 0)` are clipped to 0
/// before a log or power is taken.
pub fn matrix_fn(
    a: &HermitianOperator,
    f: ScalarFn<'_>,
    on_support_only: bool,
) -> Result<HermitianOperator> {
    let eigen = a.eigen()?;
    let singular = f.singular_at_zero();
    let is_power_like = matches!(f, ScalarFn::Log | ScalarFn::Power(_));
    if singular && !on_support_only {
        if let Some(&l) = eigen.values.iter().find(|&&l| l <= SUPPORT_TOL) {
            return Err(Error::SingularFunction { eigenvalue: l });
        }
    }
    if is_power_like {
        if let Some(&l) = eigen.values.iter().find(|&&l| l < -PSD_TOL) {
            return Err(Error::NotPositive { min_eigenvalue: l });
        }
    }
    let m = eigen.rebuild(|l| {
        let l = if is_power_like { l.max(0.0) } else { l };
        if singular && l <= SUPPORT_TOL {
            0.0
        } else {
            f.apply(l)
        }
    });
    Ok(HermitianOperator::symmetrized(m))
}

/// Kronecker product `A ⊗ B`.
pub fn tensor_product(
    a: &HermitianOperator,
    b: &HermitianOperator,
    cap: DimCap,
) -> Result<HermitianOperator> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(Error::DimensionCap {
        requested: usize::MAX,
        cap: cap.0,
    })?;
    cap.check(dim)?;
    Ok(HermitianOperator::symmetrized(
        a.matrix().kronecker(b.matrix()),
    ))
}

/// The marginal on factor `keep` (0-based) of an operator on `⊗_i C^{factor_dims[i]}`.
pub fn partial_trace(
    a: &HermitianOperator,
    factor_dims: &[usize],
    keep: usize,
) -> Result<HermitianOperator> {
    let total: usize = factor_dims.iter().product();
    if factor_dims.is_empty() || total != a.dim() || keep >= factor_dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "factor structure {factor_dims:?} (keep {keep}) does not match dimension {}",
            a.dim()
        )));
    }
    let d_keep = factor_dims[keep];
    let d_before: usize = factor_dims[..keep].iter().product();
    let d_after: usize = factor_dims[keep + 1..].iter().product();
    let m = a.matrix();
    let mut out = CMatrix::zeros(d_keep, d_keep);
    for i in 0..d_keep {
        for j in 0..d_keep {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..d_before {
                for c in 0..d_after {
                    let row = (b * d_keep + i) * d_after + c;
                    let col = (b * d_keep + j) * d_after + c;
                    acc += m[(row, col)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(HermitianOperator::symmetrized(out))
}

/// Projector onto the span of eigenvectors with eigenvalue above [`SUPPORT_TOL`].
pub fn support_projector(a: &HermitianOperator) -> Result<Projector> {
    let eigen = a.eigen()?;
    let min = eigen.values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(Projector::from_eigen(eigen, |l| l > SUPPORT_TOL))
}

/// Projector `{A > 0}` onto the eigenvectors with eigenvalue above [`SUPPORT_TOL`].
pub fn positive_part_projector(a: &HermitianOperator) -> Result<Projector> {
    Ok(Projector::from_eigen(a.eigen()?, |l| l > SUPPORT_TOL))
}

/// Whether `supp(a) ⊆ supp(b)` for PSD operators.
pub fn support_contained(a: &HermitianOperator, b: &HermitianOperator) -> Result<bool> {
    same_dim(a.dim(), b.dim())?;
    let pa = support_projector(a)?;
    let pb = support_projector(b)?;
    Ok(pa.is_contained_in(&pb, SUPPORT_INCLUSION_TOL))
}

/// Pinching `Σ_i P_i A P_i` over the spectral projectors of `b`.
pub fn pinch(
    a: &HermitianOperator,
    b: &HermitianOperator,
    group_tol: f64,
) -> Result<HermitianOperator> {
    same_dim(a.dim(), b.dim())?;
    let spec = eig_hermitian(b, group_tol)?;
    let dim = a.dim();
    if spec.projectors.len() == 1 {
        return Ok(a.clone());
    }
    let mut acc = CMatrix::zeros(dim, dim);
    for p in &spec.projectors {
        acc += p.matrix() * a.matrix() * p.matrix();
    }
    Ok(HermitianOperator::symmetrized(acc))
}

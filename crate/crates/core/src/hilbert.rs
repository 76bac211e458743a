//! Dense complex linear algebra on finite-dimensional (truncated) Hilbert spaces.
//!
//! Everything here is immutable after construction. Composite systems use the
//! row-major Kronecker convention: the pair `(i, j)` of a `dim_a x dim_b`
//! system lives at index `i * dim_b + j`.
//!
//! Units follow the `hbar = 1` convention throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest `|M - M^dagger|` entry absorbed by symmetrization, relative to `1 + max|M|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Normalization slack below which a state vector is stored unchanged.
pub const NORM_TOL: f64 = 1e-12;
/// Trace slack for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Max-entry norm `max_ij |m_ij|`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry norm of `m - m^dagger`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `<a|b>` for raw vectors.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// `|a><b|`
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Builds a state, rescaling to unit norm unless it is already normalized
    /// within [`NORM_TOL`] (in which case the amplitudes are kept bit-for-bit).
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter(
                "state must have at least one amplitude".into(),
            ));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let norm_sq = amplitudes.norm_squared();
        if norm_sq == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if (norm_sq - 1.0).abs() <= NORM_TOL {
            return Ok(Self { amplitudes });
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(Self {
            amplitudes: amplitudes * c64(scale, 0.0),
        })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| c64(x, 0.0)),
        ))
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c64(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `|c_n|^2` for every basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `<self|v>`
    pub fn inner(&self, v: &CVector) -> C64 {
        self.amplitudes.dotc(v)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }
}

/// A Hermitian operator stored as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Accepts `m` if it is Hermitian up to floating-point drift and stores
    /// `(m + m^dagger) / 2`; rejects larger asymmetries.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL * (1.0 + max_abs(&matrix)) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| c64(x, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    /// `|psi><psi|`
    pub fn projector_onto(psi: &StateVector) -> Self {
        Self {
            matrix: outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * c64(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Applies `exp(-i * self * t)` to `psi` through the spectral decomposition.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dim(self.dim(), psi.dim())?;
        let eig = eigh(self)?;
        Ok(eig.evolve(psi, t))
    }

    /// Wraps a matrix that is Hermitian by construction, symmetrizing away rounding.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }
}

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix).map_err(|e| match e {
            Error::NotHermitian(d) => Error::InvalidDensity(format!("not Hermitian ({d:.3e})")),
            other => other,
        })?;
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} != 1")));
        }
        let min = eigh(&op)?.values[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self {
            matrix: op.into_matrix(),
        })
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self {
            matrix: outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.as_operator())?.values[0])
    }

    /// For matrices that are valid states by construction (channel outputs).
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix: symmetrize(&matrix),
        }
    }
}

/// Kronecker product, row-major composite indexing.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        // product of unit vectors is a unit vector
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

impl Tensor for CMatrix {
    fn tensor(&self, other: &Self) -> Self {
        self.kronecker(other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^dagger`
    pub fn reconstruct(&self) -> CMatrix {
        let d = CVector::from_iterator(self.dim(), self.values.iter().map(|&x| c64(x, 0.0)));
        &self.vectors * CMatrix::from_diagonal(&d) * self.vectors.adjoint()
    }

    /// `exp(-i H t) psi`
    pub fn evolve(&self, psi: &StateVector, t: f64) -> StateVector {
        if t == 0.0 {
            return psi.clone();
        }
        let mut coeffs = self.vectors.adjoint() * psi.amplitudes();
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        StateVector {
            amplitudes: &self.vectors * coeffs,
        }
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(op: &HermitianOperator) -> Result<Eigh> {
    let n = op.dim();
    let max_iter = (200 * n).max(10_000);
    let decomposition = op
        .matrix
        .clone()
        .try_symmetric_eigen(f64::EPSILON, max_iter)
        .ok_or(Error::EigenNonConvergence)?;
    if decomposition.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenNonConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .partial_cmp(&decomposition.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values = order
        .iter()
        .map(|&i| decomposition.eigenvalues[i])
        .collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| decomposition.eigenvectors[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Anything an operator expectation value can be taken in.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `<psi|m|psi>` or `Tr(m rho)`, unchecked.
    fn expect_matrix(&self, m: &CMatrix) -> C64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn expect_matrix(&self, m: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(m * &self.amplitudes))
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn expect_matrix(&self, m: &CMatrix) -> C64 {
        // Tr(m rho) = sum_ij m_ij rho_ji
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += m[(i, j)] * self.matrix[(j, i)];
            }
        }
        acc
    }
}

/// Real expectation value of a Hermitian operator.
pub fn expectation<S: QuantumState>(op: &HermitianOperator, state: &S) -> Result<f64> {
    check_dim(op.dim(), state.dim())?;
    let value = state.expect_matrix(op.matrix());
    if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
        return Err(Error::Inconsistent(format!(
            "expectation of a Hermitian operator has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `ab - ba`
pub fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<CMatrix> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

/// `ab + ba`
pub fn anticommutator(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    check_dim(a.dim(), b.dim())?;
    let m = a.matrix() * b.matrix() + b.matrix() * a.matrix();
    let defect = hermitian_defect(&m);
    debug_assert!(
        defect <= 1e-9 * (1.0 + max_abs(&m)),
        "anticommutator drift {defect}"
    );
    Ok(HermitianOperator::from_matrix_unchecked(m))
}

/// Symmetrized covariance `1/2 <{a,b}> - <a><b>`.
pub fn sym_covariance<S: QuantumState>(
    a: &HermitianOperator,
    b: &HermitianOperator,
    state: &S,
) -> Result<f64> {
    let anti = anticommutator(a, b)?;
    check_dim(a.dim(), state.dim())?;
    Ok(0.5 * expectation(&anti, state)? - expectation(a, state)? * expectation(b, state)?)
}

/// `Var(a) = Cov(a, a)`
pub fn variance<S: QuantumState>(a: &HermitianOperator, state: &S) -> Result<f64> {
    sym_covariance(a, a, state)
}

/// Pauli matrices, in the `|0>, |1>` basis with `sigma_z |0> = |0>`.
pub mod pauli {
    use super::{c64, CMatrix, HermitianOperator};

    pub fn x() -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        ))
    }

    pub fn y() -> HermitianOperator {
        HermitianOperator::from_matrix_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
        ))
    }

    pub fn z() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[1.0, -1.0])
    }
}

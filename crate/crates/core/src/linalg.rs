//! Dense Hermitian kernels over either field.
//!
//! Every matrix function in the crate goes through a Hermitian
//! eigendecomposition: the arguments that occur (geodesic exponents, PD
//! square roots and logarithms) are always Hermitian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::field::{all_finite, Scalar};

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue floor (times the largest eigenvalue magnitude) for positive definiteness.
pub const PD_RELATIVE_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 80;

/// `(A + A^H)/2` with an exactly real diagonal.
pub fn hermitize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let mut h = (m + m.adjoint()) * T::from_real(0.5);
    for i in 0..h.nrows().min(h.ncols()) {
        h[(i, i)] = T::from_real(h[(i, i)].real());
    }
    h
}

/// `‖A − A^H‖_F / ‖A‖_F` (zero for the zero matrix).
pub fn hermitian_defect<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

pub fn is_hermitian<T: Scalar>(m: &DMatrix<T>, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

pub(crate) fn check_hermitian<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::structural(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::structural("matrix dimension must be at least 1"));
    }
    if !all_finite(m) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::structural(format!(
            "matrix is not Hermitian (relative defect {defect:e})"
        )));
    }
    Ok(())
}

/// Eigenvalues sorted in decreasing order and the matching orthonormal
/// (unitary) basis, one eigenvector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition<T: Scalar> {
    pub eigenvalues: DVector<f64>,
    pub basis: DMatrix<T>,
}

impl<T: Scalar> EigDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `basis · diag(f(λ)) · basis^H`, re-Hermitized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<T> {
        self.map_indexed(|_, lambda| f(lambda))
    }

    /// Like [`map`](Self::map) but `f` also sees the eigenvalue's position.
    pub fn map_indexed(&self, f: impl Fn(usize, f64) -> f64) -> DMatrix<T> {
        let mut scaled = self.basis.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= T::from_real(f(j, lambda));
        }
        hermitize(&(scaled * self.basis.adjoint()))
    }

    /// Applies one of the named matrix functions, checking positivity when required.
    pub fn apply(&self, f: MatrixFunction) -> Result<DMatrix<T>> {
        if f.requires_pd() {
            let lmin = self.min_eigenvalue();
            let floor = PD_RELATIVE_TOL * self.eigenvalues.amax();
            if !(lmin > floor) {
                return Err(Error::domain(format!(
                    "{f:?} requires a positive-definite argument; eigenvalue {lmin:e} is not above {floor:e}"
                )));
            }
        }
        Ok(self.map(|x| f.eval(x)))
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        self.map(|x| x)
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted decreasing.
pub fn eigh<T: Scalar>(m: &DMatrix<T>) -> Result<EigDecomposition<T>> {
    check_hermitian(m)?;
    let d = m.nrows();
    let h = hermitize(m);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000 * d.max(1))
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver failed to converge".into()))?;
    Ok(sorted(eig.eigenvalues, eig.eigenvectors))
}

fn sorted<T: Scalar>(values: DVector<f64>, vectors: DMatrix<T>) -> EigDecomposition<T> {
    let d = values.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| values[i]));
    let mut basis = DMatrix::zeros(vectors.nrows(), d);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &vectors.column(src));
    }
    EigDecomposition { eigenvalues, basis }
}

/// Eigendecomposition of the Gram matrix `B B^H` computed from `B` by
/// one-sided (Hestenes) Jacobi.
///
/// Eigenvalues come out with high relative accuracy when `B` is a
/// well-conditioned matrix times a diagonal, which is exactly the shape of a
/// geodesic endpoint `Σ^{1/2} U e^{tΛ/2}`. Forming `B B^H` first would lose
/// every eigenvalue below `ε·λ_max`.
pub fn eigh_gram<T: Scalar>(b: &DMatrix<T>) -> Result<EigDecomposition<T>> {
    if !b.is_square() || b.nrows() == 0 {
        return Err(Error::structural("Gram factor must be square and non-empty"));
    }
    if !all_finite(b) {
        return Err(Error::Numerical("Gram factor has non-finite entries".into()));
    }
    let d = b.ncols();
    let mut cols = b.clone();
    let tol = d as f64 * f64::EPSILON;
    let mut converged = d == 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in (p + 1)..d {
                let alpha = cols.column(p).norm_squared();
                let beta = cols.column(q).norm_squared();
                let gamma = cols.column(p).dotc(&cols.column(q));
                let gabs = gamma.modulus();
                if gabs == 0.0 || gabs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // e^{-i arg γ}: makes the inner product with column q real.
                let phase = gamma.conjugate().scale(1.0 / gabs);
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..cols.nrows() {
                    let bp = cols[(i, p)];
                    let bq = cols[(i, q)] * phase;
                    cols[(i, p)] = bp.scale(c) - bq.scale(s);
                    cols[(i, q)] = bp.scale(s) + bq.scale(c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("one-sided Jacobi did not converge".into()));
    }
    let mut values = DVector::zeros(d);
    let mut vectors = DMatrix::zeros(d, d);
    for j in 0..d {
        let norm = cols.column(j).norm();
        values[j] = norm * norm;
        if norm > 0.0 {
            vectors.set_column(j, &(cols.column(j) / T::from_real(norm)));
        }
    }
    Ok(sorted(values, vectors))
}

/// Scalar functions lifted to Hermitian matrices through the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
    Inverse,
    Power(f64),
}

impl MatrixFunction {
    pub fn requires_pd(self) -> bool {
        !matches!(self, MatrixFunction::Exp)
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            MatrixFunction::Exp => x.exp(),
            MatrixFunction::Log => x.ln(),
            MatrixFunction::Sqrt => x.sqrt(),
            MatrixFunction::InvSqrt => 1.0 / x.sqrt(),
            MatrixFunction::Inverse => 1.0 / x,
            MatrixFunction::Power(p) => x.powf(p),
        }
    }
}

pub fn matrix_fn_hermitian<T: Scalar>(m: &DMatrix<T>, f: MatrixFunction) -> Result<DMatrix<T>> {
    eigh(m)?.apply(f)
}

/// Lifts an arbitrary real function; no positivity check is made.
pub fn map_hermitian<T: Scalar>(m: &DMatrix<T>, f: impl Fn(f64) -> f64) -> Result<DMatrix<T>> {
    Ok(eigh(m)?.map(f))
}

pub fn expm_hermitian<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    matrix_fn_hermitian(m, MatrixFunction::Exp)
}

pub fn logm_hermitian<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    matrix_fn_hermitian(m, MatrixFunction::Log)
}

pub fn sqrtm_hermitian<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    matrix_fn_hermitian(m, MatrixFunction::Sqrt)
}

/// True iff `m` is Hermitian (to [`HERMITIAN_TOL`]) and its smallest
/// eigenvalue exceeds `tol`. Non-Hermitian or non-finite input is not PD.
pub fn is_pd<T: Scalar>(m: &DMatrix<T>, tol: f64) -> bool {
    match eigh(m) {
        Ok(eig) => eig.min_eigenvalue() > tol,
        Err(_) => false,
    }
}

/// [`is_pd`] with the tolerance taken relative to the spectrum: the smallest
/// eigenvalue must exceed `rel_tol · max|λ|`.
pub fn is_pd_relative<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> bool {
    match eigh(m) {
        Ok(eig) => eig.min_eigenvalue() > rel_tol * eig.eigenvalues.amax(),
        Err(_) => false,
    }
}

/// Cholesky factor of a Hermitian PD matrix.
pub(crate) fn cholesky_lower<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    nalgebra::Cholesky::new(hermitize(m))
        .map(|c| c.l())
        .ok_or_else(|| Error::domain("Cholesky factorisation failed: matrix is not positive definite"))
}

//! Random matrices for experiments, synthetic data and tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::field::Scalar;
use crate::linalg::hermitize;
use crate::manifold::{PdMatrix, TangentVelocity};

/// Matrix with i.i.d. standard (complex) Gaussian entries.
pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::sample_gaussian(rng, 1.0))
}

/// Hermitian matrix `(A + A^H)/2` of a Gaussian `A`.
pub fn random_hermitian<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> TangentVelocity<T> {
    TangentVelocity::from_hermitian_part(&hermitize(&gaussian_matrix::<T, R>(d, d, rng)))
}

/// Haar-distributed orthogonal / unitary matrix via QR with sign-fixed diagonal.
pub fn random_unitary<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<T> {
    let qr = gaussian_matrix::<T, R>(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let m = rjj.modulus();
        if m > 0.0 {
            let phase = rjj.scale(1.0 / m);
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// `U diag(λ) U^H` with a Haar-random `U`.
pub fn pd_with_eigenvalues<T: Scalar, R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> Result<PdMatrix<T>> {
    let u = random_unitary::<T, R>(eigenvalues.len(), rng);
    let lam = DMatrix::from_diagonal(&DVector::from_iterator(
        eigenvalues.len(),
        eigenvalues.iter().map(|&l| T::from_real(l)),
    ));
    PdMatrix::new(hermitize(&(&u * lam * u.adjoint())))
}

/// A moderately conditioned random PD matrix, `A A^H / d + I/2`.
pub fn random_pd<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> PdMatrix<T> {
    let a = gaussian_matrix::<T, R>(d, d, rng);
    let m = &a * a.adjoint() * T::from_real(1.0 / d as f64) + DMatrix::identity(d, d) * T::from_real(0.5);
    PdMatrix::new(hermitize(&m)).expect("A A^H + I/2 is positive definite")
}

//! The space of symmetric / Hermitian positive-definite matrices with its
//! affine-invariant metric `g_Σ(V, W) = tr(Σ^{-1} V Σ^{-1} W)`.
//!
//! Everything on the sampler path is written in trace / conjugation form and
//! costs `O(d^3)`. The explicit coordinate tensors in [`tensors`] exist for
//! small `d` and serve as an independent check of those forms.

pub mod tensors;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{all_finite, Field, Scalar};
use crate::linalg::{self, EigDecomposition, MatrixFunction, PD_RELATIVE_TOL};

pub use tensors::{
    coordinate_duplication, duplication_pair, inverse_metric_tensor, metric_tensor, unvech, vec_matrix,
    vech, DuplicationPair, HalfVector, MAX_EXPLICIT_DIM,
};

/// A point `Σ` on the manifold, stored together with its eigendecomposition.
///
/// The matrix is Hermitian exactly and its smallest stored eigenvalue is
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    eig: EigDecomposition<T>,
}

impl<T: Scalar> PdMatrix<T> {
    /// Validates Hermiticity (relative tolerance `1e-10`) and positive
    /// definiteness (smallest eigenvalue above `1e-12` times the largest).
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let eig = linalg::eigh(&matrix)?;
        let floor = PD_RELATIVE_TOL * eig.eigenvalues.amax();
        let lmin = eig.min_eigenvalue();
        if !(lmin > floor) {
            return Err(Error::domain(format!(
                "matrix is not positive definite: smallest eigenvalue {lmin:e} (floor {floor:e})"
            )));
        }
        Ok(PdMatrix { matrix: linalg::hermitize(&matrix), eig })
    }

    pub fn identity(d: usize) -> Self {
        let matrix = DMatrix::identity(d, d);
        let eig = EigDecomposition {
            eigenvalues: nalgebra::DVector::from_element(d, 1.0),
            basis: DMatrix::identity(d, d),
        };
        PdMatrix { matrix, eig }
    }

    /// `B B^H` with the eigendecomposition taken from `B` directly, so that
    /// eigenvalues far below `ε·λ_max` keep their relative accuracy.
    pub fn from_gram_factor(b: &DMatrix<T>) -> Result<Self> {
        let eig = linalg::eigh_gram(b)?;
        let lmin = eig.min_eigenvalue();
        if !(lmin > 0.0) || !eig.max_eigenvalue().is_finite() {
            return Err(Error::domain(format!(
                "Gram factor is singular or overflowed (eigenvalues {:e}..{:e})",
                lmin,
                eig.max_eigenvalue()
            )));
        }
        let matrix = linalg::hermitize(&(b * b.adjoint()));
        if !all_finite(&matrix) {
            return Err(Error::Numerical("Gram product overflowed".into()));
        }
        Ok(PdMatrix { matrix, eig })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn eig(&self) -> &EigDecomposition<T> {
        &self.eig
    }

    pub fn log_det(&self) -> f64 {
        self.eig.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    pub fn sqrt(&self) -> DMatrix<T> {
        self.eig.map(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> DMatrix<T> {
        self.eig.map(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.eig.map(|l| 1.0 / l)
    }

    pub fn apply(&self, f: MatrixFunction) -> DMatrix<T> {
        self.eig.map(|l| f.eval(l))
    }

    /// `c · Σ` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(PdMatrix {
            matrix: &self.matrix * T::from_real(c),
            eig: EigDecomposition {
                eigenvalues: &self.eig.eigenvalues * c,
                basis: self.eig.basis.clone(),
            },
        })
    }
}

/// A tangent vector: a Hermitian matrix with exactly real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVelocity<T: Scalar>(DMatrix<T>);

impl<T: Scalar> TangentVelocity<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        linalg::check_hermitian(&matrix)?;
        Ok(TangentVelocity(linalg::hermitize(&matrix)))
    }

    /// Symmetrises without checking how far from Hermitian the input was.
    pub fn from_hermitian_part(matrix: &DMatrix<T>) -> Self {
        TangentVelocity(linalg::hermitize(matrix))
    }

    pub fn zeros(d: usize) -> Self {
        TangentVelocity(DMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        TangentVelocity(&self.0 * T::from_real(c))
    }

    pub fn neg(&self) -> Self {
        TangentVelocity(-&self.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        TangentVelocity(&self.0 + &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

fn check_dims<T: Scalar>(sigma: &PdMatrix<T>, v: &TangentVelocity<T>) -> Result<()> {
    if sigma.dim() != v.dim() {
        return Err(Error::structural(format!(
            "base point is {0}x{0} but velocity is {1}x{1}",
            sigma.dim(),
            v.dim()
        )));
    }
    Ok(())
}

/// Log-determinant of the coordinate metric tensor at `Σ`, up to an additive
/// constant depending on `d` only: `-(d+1)·log|Σ|` for symmetric and
/// `-2d·log|Σ|` for Hermitian matrices.
pub fn log_det_metric<T: Scalar>(sigma: &PdMatrix<T>) -> f64 {
    -T::FIELD.metric_det_power(sigma.dim()) * sigma.log_det()
}

/// Group action `W ↦ Σ^{1/2} W Σ^{1/2}` carrying a tangent vector at the
/// identity to one at `Σ`. It is an isometry of the metric.
pub fn translate_tangent<T: Scalar>(sigma: &PdMatrix<T>, w: &TangentVelocity<T>) -> Result<TangentVelocity<T>> {
    check_dims(sigma, w)?;
    let s = sigma.sqrt();
    Ok(TangentVelocity::from_hermitian_part(&(&s * w.matrix() * &s)))
}

/// `Σ^{-1/2} V Σ^{-1/2}`: the velocity pulled back to the identity.
pub fn whiten<T: Scalar>(sigma: &PdMatrix<T>, v: &TangentVelocity<T>) -> Result<TangentVelocity<T>> {
    check_dims(sigma, v)?;
    let s = sigma.inv_sqrt();
    Ok(TangentVelocity::from_hermitian_part(&(&s * v.matrix() * &s)))
}

/// `c · tr(Σ^{-1} V Σ^{-1} V)` with `c = 1/2` (real) or `1` (complex).
pub fn kinetic_energy<T: Scalar>(sigma: &PdMatrix<T>, v: &TangentVelocity<T>) -> Result<f64> {
    let a = whiten(sigma, v)?;
    Ok(T::FIELD.gaussian_scale() * a.matrix().norm_squared())
}

/// Draws `W` at the identity with density `∝ exp(-kinetic_energy(I, W))`.
pub fn sample_standard_velocity<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> TangentVelocity<T> {
    let kappa = T::FIELD.gaussian_scale();
    let diag_var = 1.0 / (2.0 * kappa);
    // exp(-2κ|w|^2) per off-diagonal pair, i.e. 1/(4κ) per real component.
    let off_var = match T::FIELD {
        Field::Real => 1.0 / (4.0 * kappa),
        Field::Complex => 2.0 / (4.0 * kappa),
    };
    let mut w = DMatrix::<T>::zeros(d, d);
    for j in 0..d {
        w[(j, j)] = T::from_real(f64::sample_gaussian(rng, diag_var));
        for i in (j + 1)..d {
            let z = T::sample_gaussian(rng, off_var);
            w[(i, j)] = z;
            w[(j, i)] = z.conjugate();
        }
    }
    TangentVelocity(w)
}

/// Velocity with density `∝ exp(-kinetic_energy(Σ, V))`, i.e. Gaussian with the
/// inverse metric as covariance, realised as `Σ^{1/2} W Σ^{1/2}`.
pub fn sample_velocity<T: Scalar, R: Rng + ?Sized>(sigma: &PdMatrix<T>, rng: &mut R) -> TangentVelocity<T> {
    let w = sample_standard_velocity(sigma.dim(), rng);
    let s = sigma.sqrt();
    TangentVelocity::from_hermitian_part(&(&s * w.matrix() * &s))
}

/// Follows the geodesic through `(Σ0, V0)` for time `t`:
/// `Σ(t) = Σ0^{1/2} e^{tH} Σ0^{1/2}` and `V(t) = Σ0^{1/2} H e^{tH} Σ0^{1/2}`
/// with `H = Σ0^{-1/2} V0 Σ0^{-1/2}`.
pub fn geodesic_flow<T: Scalar>(
    sigma0: &PdMatrix<T>,
    v0: &TangentVelocity<T>,
    t: f64,
) -> Result<(PdMatrix<T>, TangentVelocity<T>)> {
    check_dims(sigma0, v0)?;
    if t == 0.0 {
        return Ok((sigma0.clone(), v0.clone()));
    }
    let s = sigma0.sqrt();
    let h = whiten(sigma0, v0)?;
    let eig = linalg::eigh(h.matrix())?;
    let su = &s * &eig.basis;

    // Σ(t) = B B^H with B = Σ0^{1/2} U e^{tΛ/2}.
    let mut b = su.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let mut col = b.column_mut(j);
        col *= T::from_real((0.5 * t * lambda).exp());
    }
    let sigma_t = PdMatrix::from_gram_factor(&b)?;

    let mut c = su.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let mut col = c.column_mut(j);
        col *= T::from_real(lambda * (t * lambda).exp());
    }
    let v_t = &c * su.adjoint();
    if !all_finite(&v_t) {
        return Err(Error::Numerical("geodesic velocity overflowed".into()));
    }
    Ok((sigma_t, TangentVelocity::from_hermitian_part(&v_t)))
}

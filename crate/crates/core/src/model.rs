//! Log-densities and matrix gradients of zero-mean Gaussian likelihoods and
//! of the priors used with them.
//!
//! Gradients are matrix gradients under the pairing `dg = Re tr(∇ dΣ)`. They
//! are Hermitian, and over the complex field their diagonal is real.
//!
//! Conventions, with `α = 1/2` (real) or `1` (complex):
//!
//! * likelihood: `-α (N log|Σ| + tr(Σ^{-1} S))`
//! * inverse-Wishart: `-α (ν + d + 1) log|Σ| - α tr(Ψ Σ^{-1})` over the reals and
//!   `-(ν + d) log|Σ| - tr(Ψ Σ^{-1})` over the complex numbers
//! * reference: `-log|Σ| - 2 Σ_{k<j} log(λ_k - λ_j)` (improper)
//!
//! Additive constants are dropped throughout.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{self, hermitize};
use crate::manifold::{PdMatrix, TangentVelocity};

/// Relative eigenvalue gap below which the reference prior is treated as degenerate.
pub const REFERENCE_GAP_TOL: f64 = 1e-8;

/// An unnormalised log-density on positive-definite matrices with its matrix gradient.
pub trait LogDensity<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, sigma: &PdMatrix<T>) -> Result<f64>;

    fn grad_log_density(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>>;
}

fn check_dim<T: Scalar>(expected: usize, sigma: &PdMatrix<T>) -> Result<()> {
    if sigma.dim() != expected {
        return Err(Error::structural(format!(
            "model is {expected}-dimensional but Σ is {0}x{0}",
            sigma.dim()
        )));
    }
    Ok(())
}

fn trace_product<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    // Re tr(A B) without forming the product.
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).real();
        }
    }
    acc
}

/// Scatter matrix `S = Σ_n y_n y_n^H` of `N` centred observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSuffStat<T: Scalar> {
    scatter: DMatrix<T>,
    count: usize,
}

impl<T: Scalar> GaussianSuffStat<T> {
    /// Checks that `scatter` is Hermitian and positive semi-definite up to
    /// `-1e-10·‖S‖`. `count = 0` is allowed and means "no data".
    pub fn new(scatter: DMatrix<T>, count: usize) -> Result<Self> {
        linalg::check_hermitian(&scatter)?;
        let scatter = hermitize(&scatter);
        let eig = linalg::eigh(&scatter)?;
        let floor = -1e-10 * scatter.norm();
        if eig.min_eigenvalue() < floor {
            return Err(Error::domain(format!(
                "scatter matrix has negative eigenvalue {:e}",
                eig.min_eigenvalue()
            )));
        }
        Ok(GaussianSuffStat { scatter, count })
    }

    pub fn empty(d: usize) -> Self {
        GaussianSuffStat { scatter: DMatrix::zeros(d, d), count: 0 }
    }

    /// Statistic of the rows of `y` (one observation per row).
    pub fn from_rows(y: &DMatrix<T>) -> Result<Self> {
        if y.ncols() == 0 {
            return Err(Error::structural("observations have zero columns"));
        }
        let s = hermitize(&(y.transpose() * y.map(|x| x.conjugate())));
        Self::new(s, y.nrows())
    }

    /// Statistic of a list of observation vectors.
    pub fn from_vectors(ys: &[DVector<T>]) -> Result<Self> {
        let d = ys.first().map(|y| y.len()).ok_or_else(|| Error::structural("no observations"))?;
        let mut s = DMatrix::<T>::zeros(d, d);
        for y in ys {
            if y.len() != d {
                return Err(Error::structural("observations have different lengths"));
            }
            s += y * y.adjoint();
        }
        Self::new(s, ys.len())
    }

    pub fn dim(&self) -> usize {
        self.scatter.nrows()
    }

    pub fn scatter(&self) -> &DMatrix<T> {
        &self.scatter
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `S / N`, the maximum-likelihood estimate, when it is positive definite.
    pub fn mle(&self) -> Result<PdMatrix<T>> {
        if self.count == 0 {
            return Err(Error::domain("no observations"));
        }
        PdMatrix::new(&self.scatter * T::from_real(1.0 / self.count as f64))
    }

    pub fn loglik(&self, sigma: &PdMatrix<T>) -> Result<f64> {
        check_dim(self.dim(), sigma)?;
        let alpha = T::FIELD.gaussian_scale();
        let quad = trace_product(&sigma.inverse(), &self.scatter);
        Ok(-alpha * (self.count as f64 * sigma.log_det() + quad))
    }

    pub fn grad_loglik(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>> {
        check_dim(self.dim(), sigma)?;
        let alpha = T::FIELD.gaussian_scale();
        let inv = sigma.inverse();
        let g = (&inv * &self.scatter * &inv - &inv * T::from_real(self.count as f64)) * T::from_real(alpha);
        Ok(TangentVelocity::from_hermitian_part(&g))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec<T: Scalar> {
    InverseWishart { scale: PdMatrix<T>, dof: f64 },
    /// Eigenvalue-repulsion reference prior, `1 / (|Σ| Π_{k<j} (λ_k - λ_j)^2)`.
    Reference,
    Flat,
}

impl<T: Scalar> PriorSpec<T> {
    pub fn inverse_wishart(scale: PdMatrix<T>, dof: f64) -> Result<Self> {
        let d = scale.dim() as f64;
        if !(dof > d - 1.0) || !dof.is_finite() {
            return Err(Error::config(format!(
                "inverse-Wishart degrees of freedom must exceed d - 1 = {}, got {dof}",
                d - 1.0
            )));
        }
        Ok(PriorSpec::InverseWishart { scale, dof })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PriorSpec::InverseWishart { .. } => "invwishart",
            PriorSpec::Reference => "reference",
            PriorSpec::Flat => "flat",
        }
    }

    pub fn log_density(&self, sigma: &PdMatrix<T>) -> Result<f64> {
        match self {
            PriorSpec::InverseWishart { scale, dof } => {
                check_dim(scale.dim(), sigma)?;
                let alpha = T::FIELD.gaussian_scale();
                let shift = T::FIELD.inverse_wishart_shift(sigma.dim());
                let quad = trace_product(scale.matrix(), &sigma.inverse());
                Ok(-alpha * ((dof + shift) * sigma.log_det() + quad))
            }
            PriorSpec::Reference => {
                let lam = &sigma.eig().eigenvalues;
                check_gaps(lam)?;
                let mut acc = -sigma.log_det();
                for k in 0..lam.len() {
                    for j in k + 1..lam.len() {
                        acc -= 2.0 * (lam[k] - lam[j]).ln();
                    }
                }
                Ok(acc)
            }
            PriorSpec::Flat => Ok(0.0),
        }
    }

    pub fn gradient(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>> {
        match self {
            PriorSpec::InverseWishart { scale, dof } => {
                check_dim(scale.dim(), sigma)?;
                let alpha = T::FIELD.gaussian_scale();
                let shift = T::FIELD.inverse_wishart_shift(sigma.dim());
                let inv = sigma.inverse();
                let g = (&inv * scale.matrix() * &inv - &inv * T::from_real(dof + shift)) * T::from_real(alpha);
                Ok(TangentVelocity::from_hermitian_part(&g))
            }
            PriorSpec::Reference => {
                let repulsion = eigen_repulsion_vandermonde(sigma)?;
                let g = -sigma.inverse() - repulsion * T::from_real(2.0);
                Ok(TangentVelocity::from_hermitian_part(&g))
            }
            PriorSpec::Flat => Ok(TangentVelocity::zeros(sigma.dim())),
        }
    }
}

fn check_gaps(lam: &DVector<f64>) -> Result<()> {
    let tolerance = REFERENCE_GAP_TOL * lam[0];
    for k in 1..lam.len() {
        let gap = lam[k - 1] - lam[k];
        if !(gap > tolerance) {
            return Err(Error::DegenerateSpectrum { gap, tolerance });
        }
    }
    Ok(())
}

/// `Σ_{k<j} (P_k - P_j) / (λ_k - λ_j)`, the gradient of `Σ_{k<j} log(λ_k - λ_j)`,
/// with `P_k` the eigenprojectors.
///
/// Each projector is the Lagrange polynomial `ℓ_k(Σ)`, whose coefficients are
/// a column of the inverse Vandermonde matrix. Summing first, the whole
/// expression is `p(Σ)` for the polynomial `p` interpolating
/// `c_k = Σ_{j≠k} 1/(λ_k - λ_j)` at the eigenvalues, found with one
/// Vandermonde solve. Eigenvalues are scaled by `λ_max` to keep the system
/// well conditioned.
pub fn eigen_repulsion_vandermonde<T: Scalar>(sigma: &PdMatrix<T>) -> Result<DMatrix<T>> {
    let lam = &sigma.eig().eigenvalues;
    check_gaps(lam)?;
    let d = lam.len();
    let top = lam[0];
    let mu = lam / top;
    let c = DVector::from_fn(d, |k, _| {
        (0..d).filter(|&j| j != k).map(|j| 1.0 / (lam[k] - lam[j])).sum::<f64>()
    });
    let vander = DMatrix::from_fn(d, d, |j, i| mu[j].powi(i as i32));
    let coeffs = vander
        .lu()
        .solve(&c)
        .ok_or_else(|| Error::Numerical("Vandermonde system is singular".into()))?;
    let scaled = sigma.matrix() * T::from_real(1.0 / top);
    let mut acc = DMatrix::<T>::identity(d, d) * T::from_real(coeffs[d - 1]);
    for i in (0..d - 1).rev() {
        acc = &scaled * acc + DMatrix::<T>::identity(d, d) * T::from_real(coeffs[i]);
    }
    Ok(hermitize(&acc))
}

/// The same quantity as [`eigen_repulsion_vandermonde`], assembled directly
/// from the eigenvectors.
pub fn eigen_repulsion_spectral<T: Scalar>(sigma: &PdMatrix<T>) -> Result<DMatrix<T>> {
    let lam = &sigma.eig().eigenvalues;
    check_gaps(lam)?;
    let d = lam.len();
    let c: Vec<f64> = (0..d)
        .map(|k| (0..d).filter(|&j| j != k).map(|j| 1.0 / (lam[k] - lam[j])).sum())
        .collect();
    Ok(sigma.eig().map_indexed(|k, _| c[k]))
}

/// Posterior `p(Σ | data) ∝ likelihood × prior`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorModel<T: Scalar> {
    stat: GaussianSuffStat<T>,
    prior: PriorSpec<T>,
}

impl<T: Scalar> PosteriorModel<T> {
    pub fn new(stat: GaussianSuffStat<T>, prior: PriorSpec<T>) -> Result<Self> {
        if let PriorSpec::InverseWishart { scale, .. } = &prior {
            if scale.dim() != stat.dim() {
                return Err(Error::structural(format!(
                    "prior scale is {0}x{0} but the data are {1}-dimensional",
                    scale.dim(),
                    stat.dim()
                )));
            }
        }
        Ok(PosteriorModel { stat, prior })
    }

    pub fn stat(&self) -> &GaussianSuffStat<T> {
        &self.stat
    }

    pub fn prior(&self) -> &PriorSpec<T> {
        &self.prior
    }

    pub fn loglik(&self, sigma: &PdMatrix<T>) -> Result<f64> {
        self.stat.loglik(sigma)
    }

    pub fn grad_loglik(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>> {
        self.stat.grad_loglik(sigma)
    }

    pub fn log_prior(&self, sigma: &PdMatrix<T>) -> Result<f64> {
        check_dim(self.stat.dim(), sigma)?;
        self.prior.log_density(sigma)
    }

    pub fn grad_log_prior(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>> {
        check_dim(self.stat.dim(), sigma)?;
        self.prior.gradient(sigma)
    }
}

impl<T: Scalar> LogDensity<T> for PosteriorModel<T> {
    fn dim(&self) -> usize {
        self.stat.dim()
    }

    fn log_density(&self, sigma: &PdMatrix<T>) -> Result<f64> {
        Ok(self.loglik(sigma)? + self.log_prior(sigma)?)
    }

    fn grad_log_density(&self, sigma: &PdMatrix<T>) -> Result<TangentVelocity<T>> {
        Ok(self.grad_loglik(sigma)?.add(&self.grad_log_prior(sigma)?))
    }
}

//! The two scalar fields a positive-definite matrix can live over.
//!
//! Every field-dependent constant in the crate (Gaussian normalisation, the
//! exponent of the metric determinant, the inverse-Wishart shift) is collected
//! here so the rest of the code is written once, generically.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Factor in front of quadratic forms and log-determinants of a centred
    /// Gaussian log-density: `1/2` over the reals, `1` over the complex numbers.
    pub fn gaussian_scale(self) -> f64 {
        match self {
            Field::Real => 0.5,
            Field::Complex => 1.0,
        }
    }

    /// Number of real coordinates of a `d x d` symmetric (Hermitian) matrix.
    pub fn real_coordinate_dim(self, d: usize) -> usize {
        match self {
            Field::Real => d * (d + 1) / 2,
            Field::Complex => d * d,
        }
    }

    /// `p` such that the determinant of the coordinate metric tensor at `Σ`
    /// equals `|Σ|^{-p}` times a constant depending only on `d`.
    pub fn metric_det_power(self, d: usize) -> f64 {
        match self {
            Field::Real => (d + 1) as f64,
            Field::Complex => (2 * d) as f64,
        }
    }

    /// Shift added to the degrees of freedom in the inverse-Wishart log-determinant term.
    pub fn inverse_wishart_shift(self, d: usize) -> f64 {
        match self {
            Field::Real => (d + 1) as f64,
            Field::Complex => d as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

/// Matrix entry type: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + std::fmt::Debug + 'static
{
    const FIELD: Field;

    /// Builds a scalar from real and imaginary parts; the imaginary part is
    /// dropped over the reals.
    fn from_parts(re: f64, im: f64) -> Self;

    /// Centred Gaussian with `E|z|^2 = var`, split evenly between real and
    /// imaginary parts in the complex case.
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Self;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Self {
        let z: f64 = StandardNormal.sample(rng);
        z * var.sqrt()
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Self {
        let sd = (0.5 * var).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(sd * re, sd * im)
    }
}

/// True when every entry (both parts) is finite.
pub fn all_finite<T: Scalar>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.real().is_finite() && x.imaginary().is_finite())
}

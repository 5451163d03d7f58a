//! First-order vector autoregressions `y(t) = Φ y(t-1) + ε_t`, `ε_t ~ N(0, Q)`,
//! and their closed-form spectral density.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::FrequencyBand;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg::{cholesky_lower, hermitize};
use crate::manifold::PdMatrix;

/// Largest eigenvalue modulus of a square real matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var1Spec {
    transition: DMatrix<f64>,
    noise_cov: PdMatrix<f64>,
}

impl Var1Spec {
    pub fn new(transition: DMatrix<f64>, noise_cov: PdMatrix<f64>) -> Result<Self> {
        if !transition.is_square() || transition.nrows() != noise_cov.dim() {
            return Err(Error::structural(format!(
                "transition is {}x{} but noise covariance is {2}x{2}",
                transition.nrows(),
                transition.ncols(),
                noise_cov.dim()
            )));
        }
        let r = spectral_radius(&transition);
        if !(r < 1.0) {
            return Err(Error::config(format!("VAR(1) transition is not stable: spectral radius {r}")));
        }
        Ok(Var1Spec { transition, noise_cov })
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn noise_cov(&self) -> &PdMatrix<f64> {
        &self.noise_cov
    }
}

/// Gaussian random transition rescaled to spectral radius 0.95.
///
/// `blocks` lists diagonal block sizes; entries outside the blocks are zero.
/// An empty list means one full block.
pub fn random_transition<R: Rng + ?Sized>(d: usize, blocks: &[usize], rng: &mut R) -> Result<DMatrix<f64>> {
    let blocks = if blocks.is_empty() { vec![d] } else { blocks.to_vec() };
    if blocks.iter().sum::<usize>() != d || blocks.contains(&0) {
        return Err(Error::config(format!("block sizes {blocks:?} do not partition dimension {d}")));
    }
    let mut owner = Vec::with_capacity(d);
    for (b, &size) in blocks.iter().enumerate() {
        owner.extend(std::iter::repeat_n(b, size));
    }
    loop {
        let mut phi = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let z: f64 = f64::sample_gaussian(rng, 1.0);
                if owner[i] == owner[j] {
                    phi[(i, j)] = z;
                }
            }
        }
        let r = spectral_radius(&phi);
        if r > 1e-8 {
            return Ok(phi * (0.95 / r));
        }
    }
}

/// Simulates `length` steps from `y(1) = ε_1` and returns the last
/// `length - burn` rows.
pub fn var1_simulate<R: Rng + ?Sized>(spec: &Var1Spec, length: usize, burn: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if burn >= length {
        return Err(Error::config(format!("burn-in {burn} leaves nothing of length {length}")));
    }
    let d = spec.dim();
    let chol = cholesky_lower(spec.noise_cov.matrix())?;
    let mut out = DMatrix::<f64>::zeros(length - burn, d);
    let mut y = DVector::<f64>::zeros(d);
    for t in 0..length {
        let z = DVector::from_fn(d, |_, _| f64::sample_gaussian(rng, 1.0));
        y = &spec.transition * y + &chol * z;
        if t >= burn {
            out.row_mut(t - burn).copy_from(&y.transpose());
        }
    }
    Ok(out)
}

/// `Σ(ω) = (I - Φ e^{-2πiω})^{-1} Q (I - Φ e^{-2πiω})^{-H}` at normalised frequency `ω`.
pub fn var1_spectral_density(spec: &Var1Spec, omega: f64) -> Result<PdMatrix<Complex64>> {
    let d = spec.dim();
    let z = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * omega);
    let a = DMatrix::<Complex64>::identity(d, d) - spec.transition.map(|x| Complex64::new(x, 0.0)) * z;
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Numerical("I - Φ e^{-2πiω} is singular".into()))?;
    let q = spec.noise_cov.matrix().map(|x| Complex64::new(x, 0.0));
    PdMatrix::new(hermitize(&(&inv * q * inv.adjoint())))
}

/// Average of `Σ(k/T)` over the grid frequencies of a band.
pub fn band_spectral_density(
    spec: &Var1Spec,
    band: &FrequencyBand,
    length: usize,
    sample_rate_hz: f64,
) -> Result<PdMatrix<Complex64>> {
    let idx = band.indices(length, sample_rate_hz);
    if idx.is_empty() {
        return Err(Error::config(format!("band {band} contains no DFT frequencies")));
    }
    let d = spec.dim();
    let mut acc = DMatrix::<Complex64>::zeros(d, d);
    for k in idx.clone() {
        acc += var1_spectral_density(spec, k as f64 / length as f64)?.matrix();
    }
    PdMatrix::new(acc / Complex64::new(idx.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::squared_coherence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn white_noise_density_is_flat() {
        let q = PdMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let spec = Var1Spec::new(DMatrix::zeros(2, 2), q.clone()).unwrap();
        for omega in [0.01, 0.2, 0.5] {
            let s = var1_spectral_density(&spec, omega).unwrap();
            assert!((s.matrix().map(|z| z.re) - q.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn block_transition_decouples_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phi = random_transition(4, &[2, 2], &mut rng).unwrap();
        assert!((spectral_radius(&phi) - 0.95).abs() < 1e-10);
        assert_eq!(phi[(0, 2)], 0.0);
        assert_eq!(phi[(3, 1)], 0.0);
        let spec = Var1Spec::new(phi, PdMatrix::identity(4)).unwrap();
        let c = squared_coherence(&var1_spectral_density(&spec, 0.03).unwrap());
        assert!(c[(0, 2)] < 1e-20 && c[(1, 3)] < 1e-20);
        assert!(c[(0, 1)] > 0.0);
    }

    #[test]
    fn unstable_rejected() {
        let phi = DMatrix::from_diagonal_element(2, 2, 1.01);
        assert!(matches!(Var1Spec::new(phi, PdMatrix::identity(2)), Err(Error::Config(_))));
        assert!(random_transition(3, &[2, 2], &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn retained_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = Var1Spec::new(random_transition(4, &[], &mut rng).unwrap(), PdMatrix::identity(4)).unwrap();
        assert_eq!(var1_simulate(&spec, 15_000, 10_000, &mut rng).unwrap().nrows(), 5000);
    }
}

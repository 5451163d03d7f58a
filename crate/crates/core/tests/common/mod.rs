#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pdhmc::manifold::{PdMatrix, TangentVelocity};
use pdhmc::model::{GaussianSuffStat, PosteriorModel, PriorSpec};
use pdhmc::oracle::simulate_gaussian_stat;
use pdhmc::random::{random_hermitian, random_pd};
use pdhmc::Scalar;
use rand::Rng;

/// `Re tr(G H)`.
pub fn pairing<T: Scalar>(g: &DMatrix<T>, h: &DMatrix<T>) -> f64 {
    (g * h).trace().real()
}

/// Fourth-order central difference of `f` at `Σ` along `H`.
pub fn directional_fd<T: Scalar>(
    f: impl Fn(&PdMatrix<T>) -> f64,
    sigma: &PdMatrix<T>,
    dir: &DMatrix<T>,
    h: f64,
) -> f64 {
    let at = |s: f64| f(&PdMatrix::new(sigma.matrix() + dir * T::from_real(s)).expect("step left the PD cone"));
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

/// Worst relative error of `⟨∇, H⟩` against finite differences over `dirs`
/// random unit Hermitian directions. The denominator is `|⟨∇, H⟩|`, floored at
/// `1e-3 ‖∇‖` so that directions nearly orthogonal to the gradient do not
/// divide by zero.
pub fn gradient_check<T: Scalar, R: Rng>(
    f: impl Fn(&PdMatrix<T>) -> f64,
    grad: &TangentVelocity<T>,
    sigma: &PdMatrix<T>,
    dirs: usize,
    rng: &mut R,
) -> f64 {
    let lmin = sigma.eig().min_eigenvalue();
    let h = 1e-3 * lmin;
    (0..dirs)
        .map(|_| {
            let w = random_hermitian::<T, _>(sigma.dim(), rng);
            let dir = w.matrix() / T::from_real(w.norm());
            let fd = directional_fd(&f, sigma, &dir, h);
            let an = pairing(grad.matrix(), &dir);
            (fd - an).abs() / an.abs().max(1e-3 * grad.norm())
        })
        .fold(0.0, f64::max)
}

/// Geodesic of the affine-invariant metric by RK4 on `Σ'' = Σ' Σ^{-1} Σ'`.
pub fn geodesic_ode<T: Scalar>(sigma: &DMatrix<T>, v: &DMatrix<T>, t: f64, steps: usize) -> (DMatrix<T>, DMatrix<T>) {
    let h = t / steps as f64;
    let accel = |s: &DMatrix<T>, v: &DMatrix<T>| {
        let inv = s.clone().try_inverse().expect("singular state in ODE oracle");
        v * inv * v
    };
    let (mut s, mut w) = (sigma.clone(), v.clone());
    let half = T::from_real(0.5 * h);
    let full = T::from_real(h);
    let sixth = T::from_real(h / 6.0);
    let two = T::from_real(2.0);
    for _ in 0..steps {
        let (k1s, k1v) = (w.clone(), accel(&s, &w));
        let (s2, w2) = (&s + &k1s * half, &w + &k1v * half);
        let (k2s, k2v) = (w2.clone(), accel(&s2, &w2));
        let (s3, w3) = (&s + &k2s * half, &w + &k2v * half);
        let (k3s, k3v) = (w3.clone(), accel(&s3, &w3));
        let (s4, w4) = (&s + &k3s * full, &w + &k3v * full);
        let (k4s, k4v) = (w4.clone(), accel(&s4, &w4));
        s += (k1s + &k2s * two + &k3s * two + k4s) * sixth;
        w += (k1v + &k2v * two + &k3v * two + k4v) * sixth;
    }
    (s, w)
}

/// Conjugate test problem: data from a random `Σ_true`, prior `IW(I, d + 2)`.
pub struct Conjugate<T: Scalar> {
    pub truth: PdMatrix<T>,
    pub stat: GaussianSuffStat<T>,
    pub prior: PriorSpec<T>,
    pub model: PosteriorModel<T>,
}

pub fn conjugate_problem<T: Scalar, R: Rng>(d: usize, n: usize, rng: &mut R) -> Conjugate<T> {
    let truth = random_pd::<T, _>(d, rng);
    let stat = simulate_gaussian_stat(&truth, n, rng).unwrap();
    let prior = PriorSpec::inverse_wishart(PdMatrix::identity(d), d as f64 + 2.0).unwrap();
    let model = PosteriorModel::new(stat.clone(), prior.clone()).unwrap();
    Conjugate { truth, stat, prior, model }
}

/// Random Hermitian PD matrix whose eigenvalues are at least `gap` apart.
pub fn separated_pd<R: Rng>(d: usize, gap: f64, rng: &mut R) -> PdMatrix<Complex64> {
    let mut eigs = Vec::with_capacity(d);
    let mut x = 0.5 + rng.random::<f64>();
    for _ in 0..d {
        eigs.push(x);
        x += gap + rng.random::<f64>();
    }
    pdhmc::random::pd_with_eigenvalues(&eigs, rng).unwrap()
}

//! Ground truth for validating the sampler: exact draws from the conjugate
//! inverse-Wishart posterior, and two-sample comparisons of scalar summaries.
//!
//! Inverse-Wishart `IW(Ψ, ν)` has density `∝ |Σ|^{-(ν+d+1)/2} exp(-tr(ΨΣ^{-1})/2)`
//! over the reals and `∝ |Σ|^{-(ν+d)} exp(-tr(ΨΣ^{-1}))` over the complex
//! numbers. Combined with `N` observations with scatter `S` it gives the
//! posterior `IW(Ψ + S, ν + N)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::field::{Field, Scalar};
use crate::linalg::{cholesky_lower, hermitize};
use crate::manifold::PdMatrix;
use crate::model::{GaussianSuffStat, PriorSpec};
use crate::stats;

/// Lower-triangular Bartlett factor `A` with `A A^H ~ Wishart(I, ν)`.
///
/// Real: `A_ii² ~ χ²(ν - i)`, `A_ij ~ N(0, 1)`. Complex: `A_ii² ~ Gamma(ν - i, 1)`,
/// `A_ij ~ CN(0, 1)`. Here `i` counts from 0.
fn bartlett_factor<T: Scalar, R: Rng + ?Sized>(d: usize, dof: f64, rng: &mut R) -> Result<DMatrix<T>> {
    let mut a = DMatrix::<T>::zeros(d, d);
    for i in 0..d {
        let k = dof - i as f64;
        let sq = match T::FIELD {
            Field::Real => Gamma::new(0.5 * k, 2.0),
            Field::Complex => Gamma::new(k, 1.0),
        }
        .map_err(|e| Error::config(format!("invalid Bartlett degrees of freedom {k}: {e}")))?
        .sample(rng);
        a[(i, i)] = T::from_real(sq.sqrt());
        for j in 0..i {
            a[(i, j)] = T::sample_gaussian(rng, 1.0);
        }
    }
    Ok(a)
}

/// One draw from `IW(Ψ, ν)`.
///
/// With `Ψ = C C^H` and a Bartlett factor `A`, `Σ = (C A^{-H})(C A^{-H})^H`
/// is the inverse of the Wishart draw `C^{-H} A A^H C^{-1}`.
pub fn inverse_wishart_draw<T: Scalar, R: Rng + ?Sized>(scale: &PdMatrix<T>, dof: f64, rng: &mut R) -> Result<PdMatrix<T>> {
    let d = scale.dim();
    if !(dof > d as f64 - 1.0) {
        return Err(Error::config(format!("inverse-Wishart needs dof > {}, got {dof}", d as f64 - 1.0)));
    }
    let c = cholesky_lower(scale.matrix())?;
    let a = bartlett_factor::<T, R>(d, dof, rng)?;
    let bt = a
        .solve_lower_triangular(&c.adjoint())
        .ok_or_else(|| Error::Numerical("Bartlett factor is singular".into()))?;
    PdMatrix::from_gram_factor(&bt.adjoint())
}

/// `E[Σ] = Ψ / (ν - d - 1)` (real) or `Ψ / (ν - d)` (complex).
pub fn inverse_wishart_mean<T: Scalar>(scale: &PdMatrix<T>, dof: f64) -> Result<DMatrix<T>> {
    let denom = dof - T::FIELD.inverse_wishart_shift(scale.dim());
    if !(denom > 0.0) {
        return Err(Error::domain(format!("inverse-Wishart mean does not exist for dof {dof}")));
    }
    Ok(scale.matrix() * T::from_real(1.0 / denom))
}

/// Posterior parameters `(Ψ + S, ν + N)`.
pub fn conjugate_update<T: Scalar>(prior: &PriorSpec<T>, stat: &GaussianSuffStat<T>) -> Result<(PdMatrix<T>, f64)> {
    match prior {
        PriorSpec::InverseWishart { scale, dof } => {
            if scale.dim() != stat.dim() {
                return Err(Error::structural("prior scale and data dimensions differ"));
            }
            let post = PdMatrix::new(hermitize(&(scale.matrix() + stat.scatter())))?;
            Ok((post, dof + stat.count() as f64))
        }
        other => Err(Error::config(format!(
            "closed-form posterior needs an inverse-Wishart prior, got {}",
            other.name()
        ))),
    }
}

pub fn conjugate_posterior_draw<T: Scalar, R: Rng + ?Sized>(
    prior: &PriorSpec<T>,
    stat: &GaussianSuffStat<T>,
    rng: &mut R,
) -> Result<PdMatrix<T>> {
    let (scale, dof) = conjugate_update(prior, stat)?;
    inverse_wishart_draw(&scale, dof, rng)
}

/// `n` independent posterior draws; draw `i` uses rng stream `i` of `seed`.
pub fn conjugate_posterior_draws<T: Scalar>(
    prior: &PriorSpec<T>,
    stat: &GaussianSuffStat<T>,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PdMatrix<T>>> {
    let (scale, dof) = conjugate_update(prior, stat)?;
    exec.map(n, |i| inverse_wishart_draw(&scale, dof, &mut stream_rng(seed, i as u64)))
        .into_iter()
        .collect()
}

/// Scatter statistic of `n` draws from `N(0, Σ)` (real) or `CN(0, Σ)` (complex).
pub fn simulate_gaussian_stat<T: Scalar, R: Rng + ?Sized>(
    sigma: &PdMatrix<T>,
    n: usize,
    rng: &mut R,
) -> Result<GaussianSuffStat<T>> {
    let d = sigma.dim();
    let c = cholesky_lower(sigma.matrix())?;
    let z = DMatrix::from_fn(d, n, |_, _| T::sample_gaussian(rng, 1.0));
    let y = c * z;
    GaussianSuffStat::new(hermitize(&(&y * y.adjoint())), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub pass: bool,
}

/// `c(α) = sqrt(-ln(α/2) / 2)`.
pub fn ks_critical_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic critical value
/// `c(α) sqrt((m + n) / (m n))`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs non-empty samples");
    let a = stats::sorted(a);
    let b = stats::sorted(b);
    let (m, n) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    let threshold = ks_critical_coefficient(alpha) * ((m + n) / (m * n)).sqrt();
    KsResult { statistic: d, threshold, alpha, pass: d <= threshold }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqPoint {
    pub p: f64,
    pub a: f64,
    pub b: f64,
}

/// Paired type-7 quantiles at `p_k = k / (grid + 1)`, `k = 1..=grid`.
pub fn qq_table(a: &[f64], b: &[f64], grid: usize) -> Vec<QqPoint> {
    let a = stats::sorted(a);
    let b = stats::sorted(b);
    (1..=grid)
        .map(|k| {
            let p = k as f64 / (grid + 1) as f64;
            QqPoint { p, a: stats::quantile_sorted(&a, p), b: stats::quantile_sorted(&b, p) }
        })
        .collect()
}

/// Bootstrap standard error of the type-7 quantile at `p`.
pub fn bootstrap_quantile_se<R: Rng + ?Sized>(xs: &[f64], p: f64, reps: usize, rng: &mut R) -> f64 {
    let qs: Vec<f64> = (0..reps)
        .map(|_| {
            let resample: Vec<f64> = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).collect();
            stats::quantile(&resample, p)
        })
        .collect();
    stats::variance(&qs).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Diagonal,
    Real,
    Imaginary,
}

/// One scalar coordinate of a matrix: a diagonal entry, or the real or
/// imaginary part of a strictly lower entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub kind: EntryKind,
}

impl Entry {
    pub fn extract<T: Scalar>(&self, sigma: &PdMatrix<T>) -> f64 {
        let x = sigma.matrix()[(self.i, self.j)];
        match self.kind {
            EntryKind::Diagonal | EntryKind::Real => x.real(),
            EntryKind::Imaginary => x.imaginary(),
        }
    }

    pub fn label(&self) -> String {
        let kind = match self.kind {
            EntryKind::Diagonal => "diag",
            EntryKind::Real => "re",
            EntryKind::Imaginary => "im",
        };
        format!("{kind}[{},{}]", self.i, self.j)
    }
}

/// All real coordinates: `d` diagonals, then real parts, then (complex only)
/// imaginary parts of the strictly lower triangle.
pub fn matrix_entries(d: usize, field: Field) -> Vec<Entry> {
    let mut out: Vec<Entry> = (0..d).map(|i| Entry { i, j: i, kind: EntryKind::Diagonal }).collect();
    let lower: Vec<(usize, usize)> = (0..d).flat_map(|j| (j + 1..d).map(move |i| (i, j))).collect();
    out.extend(lower.iter().map(|&(i, j)| Entry { i, j, kind: EntryKind::Real }));
    if field == Field::Complex {
        out.extend(lower.iter().map(|&(i, j)| Entry { i, j, kind: EntryKind::Imaginary }));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryComparison {
    pub entry: Entry,
    pub label: String,
    pub ks: KsResult,
}

/// Per-entry KS comparison of two sets of draws.
pub fn compare_entries<T: Scalar>(
    a: &[PdMatrix<T>],
    b: &[PdMatrix<T>],
    alpha: f64,
    exec: Execution,
) -> Vec<EntryComparison> {
    let d = a.first().or(b.first()).map_or(0, |s| s.dim());
    let entries = matrix_entries(d, T::FIELD);
    exec.map(entries.len(), |k| {
        let e = entries[k];
        let xa: Vec<f64> = a.iter().map(|s| e.extract(s)).collect();
        let xb: Vec<f64> = b.iter().map(|s| e.extract(s)).collect();
        EntryComparison { entry: e, label: e.label(), ks: ks_two_sample(&xa, &xb, alpha) }
    })
}

/// Agreement of two Monte-Carlo means within `k` combined standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub se_a: f64,
    pub se_b: f64,
    /// `|mean_a - mean_b| / sqrt(se_a² + se_b²)`.
    pub z: f64,
    pub pass: bool,
}

/// Standard errors by batch means, so correlated chains are handled.
pub fn compare_means(a: &[f64], b: &[f64], k: f64) -> MeanComparison {
    let (mean_a, mean_b) = (stats::mean(a), stats::mean(b));
    let (se_a, se_b) = (stats::batch_means_se(a), stats::batch_means_se(b));
    let diff = (mean_a - mean_b).abs();
    let se = (se_a * se_a + se_b * se_b).sqrt();
    // Two constant samples (ED at d = 1, say) agree exactly or not at all.
    let z = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
    MeanComparison { mean_a, mean_b, se_a, se_b, z, pass: z <= k }
}

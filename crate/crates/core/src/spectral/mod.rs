//! Frequency-domain pipeline: DFT of a multivariate series, pooling of the
//! coefficients in a frequency band into a complex Gaussian sufficient
//! statistic, and whole-matrix summaries of spectral density draws.
//!
//! No windowing or tapering is applied. Frequencies are selected by the
//! half-open rule `lo ≤ f < hi` over positive `k` only, so the DC and Nyquist
//! terms never enter a band.

pub mod var1;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::manifold::PdMatrix;
use crate::model::GaussianSuffStat;
use crate::stats;

pub use var1::{
    band_spectral_density, random_transition, spectral_radius, var1_simulate, var1_spectral_density, Var1Spec,
};

/// `T x d` real series with its sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    values: DMatrix<f64>,
    sample_rate_hz: f64,
}

impl TimeSeriesFrame {
    pub fn new(values: DMatrix<f64>, sample_rate_hz: f64) -> Result<Self> {
        let (t, d) = values.shape();
        if d == 0 {
            return Err(Error::structural("time series has no columns"));
        }
        if t < 2 * d {
            return Err(Error::structural(format!("time series needs at least {} rows, got {t}", 2 * d)));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::config(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("time series contains non-finite values"));
        }
        Ok(TimeSeriesFrame { values, sample_rate_hz })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Copy with each column's mean subtracted.
    pub fn demeaned(&self) -> Self {
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        TimeSeriesFrame { values, sample_rate_hz: self.sample_rate_hz }
    }
}

/// Coefficients `Y(ω_k)` for `k = 1..⌊T/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    pub length: usize,
    pub sample_rate_hz: f64,
    pub frequencies_hz: Vec<f64>,
    pub coefficients: Vec<DVector<Complex64>>,
}

impl SpectralSample {
    pub fn dim(&self) -> usize {
        self.coefficients.first().map_or(0, |c| c.len())
    }
}

/// All `T` coefficients `Y(ω_k) = T^{-1/2} Σ_{t=1}^T y(t) e^{-2πi k t / T}`,
/// one row per `k = 0..T`.
pub fn fourier_coefficients(ts: &TimeSeriesFrame) -> DMatrix<Complex64> {
    let (t, d) = ts.values.shape();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t);
    let norm = 1.0 / (t as f64).sqrt();
    let mut out = DMatrix::<Complex64>::zeros(t, d);
    let mut buf = vec![Complex64::new(0.0, 0.0); t];
    for j in 0..d {
        for (b, &x) in buf.iter_mut().zip(ts.values.column(j).iter()) {
            *b = Complex64::new(x, 0.0);
        }
        fft.process(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            // Time runs from 1, the FFT's from 0.
            let phase = Complex64::from_polar(norm, -2.0 * std::f64::consts::PI * k as f64 / t as f64);
            out[(k, j)] = b * phase;
        }
    }
    out
}

/// DFT keeping the positive frequencies `k = 1..⌊T/2⌋`, reported in Hz.
pub fn dft(ts: &TimeSeriesFrame) -> SpectralSample {
    let t = ts.len();
    let all = fourier_coefficients(ts);
    let ks = 1..=t / 2;
    SpectralSample {
        length: t,
        sample_rate_hz: ts.sample_rate_hz,
        frequencies_hz: ks.clone().map(|k| k as f64 / t as f64 * ts.sample_rate_hz).collect(),
        coefficients: ks.map(|k| all.row(k).transpose()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyBand {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl FrequencyBand {
    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !(lo_hz > 0.0 && hi_hz > lo_hz && hi_hz.is_finite()) {
            return Err(Error::config(format!("invalid band [{lo_hz}, {hi_hz}): need 0 < lo < hi")));
        }
        Ok(FrequencyBand { lo_hz, hi_hz })
    }

    /// Band indices `k` with `lo ≤ k fs / T < hi`, restricted to `1..=⌊T/2⌋`.
    pub fn indices(&self, length: usize, sample_rate_hz: f64) -> std::ops::Range<usize> {
        let scale = length as f64 / sample_rate_hz;
        let first = |x: f64| (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as usize;
        let lo = first(self.lo_hz * scale).max(1);
        let hi = first(self.hi_hz * scale).min(length / 2 + 1);
        lo..hi.max(lo)
    }

    /// Number of grid frequencies in the band.
    pub fn count(&self, length: usize, sample_rate_hz: f64) -> usize {
        self.indices(length, sample_rate_hz).len()
    }
}

impl std::fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}) Hz", self.lo_hz, self.hi_hz)
    }
}

/// `S = Σ_{k in band} Y(ω_k) Y(ω_k)^H` and `N` = number of in-band frequencies.
pub fn band_stat(sp: &SpectralSample, band: &FrequencyBand) -> Result<GaussianSuffStat<Complex64>> {
    if band.hi_hz > sp.sample_rate_hz / 2.0 + 1e-12 {
        return Err(Error::config(format!(
            "band {band} extends past the Nyquist frequency {} Hz",
            sp.sample_rate_hz / 2.0
        )));
    }
    let idx = band.indices(sp.length, sp.sample_rate_hz);
    if idx.is_empty() {
        return Err(Error::config(format!("band {band} contains no DFT frequencies")));
    }
    let d = sp.dim();
    let mut s = DMatrix::<Complex64>::zeros(d, d);
    for k in idx.clone() {
        // sp.coefficients[0] holds k = 1.
        let y = &sp.coefficients[k - 1];
        s += y * y.adjoint();
    }
    GaussianSuffStat::new(s, idx.len())
}

/// `ρ²_ij = |Σ_ij|² / (Σ_ii Σ_jj)`.
pub fn squared_coherence<T: Scalar>(sigma: &PdMatrix<T>) -> DMatrix<f64> {
    let m = sigma.matrix();
    let d = m.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            let v = m[(i, j)].modulus_squared() / (m[(i, i)].real() * m[(j, j)].real());
            v.clamp(0.0, 1.0)
        }
    })
}

/// Effective variance `|Σ|^{1/d}` and effective dependence `1 - |corr(Σ)|^{1/d}`.
pub fn ev_ed<T: Scalar>(sigma: &PdMatrix<T>) -> (f64, f64) {
    let d = sigma.dim() as f64;
    let log_det = sigma.log_det();
    let log_diag: f64 = sigma.matrix().diagonal().iter().map(|x| x.real().ln()).sum();
    let ev = (log_det / d).exp();
    let ed = 1.0 - ((log_det - log_diag) / d).exp();
    (ev, ed.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub median: f64,
}

/// Per-entry equal-tailed intervals at `level` (type-7 quantiles) of a
/// matrix-valued statistic over the draws.
pub fn credible_intervals<T: Scalar>(
    draws: &[PdMatrix<T>],
    statistic: impl Fn(&PdMatrix<T>) -> DMatrix<f64>,
    level: f64,
) -> Result<DMatrix<Interval>> {
    if draws.is_empty() {
        return Err(Error::config("no draws to summarise"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config(format!("credible level must lie in (0, 1), got {level}")));
    }
    let mapped: Vec<DMatrix<f64>> = draws.iter().map(statistic).collect();
    let (r, c) = mapped[0].shape();
    let tail = 0.5 * (1.0 - level);
    Ok(DMatrix::from_fn(r, c, |i, j| {
        let xs = stats::sorted(&mapped.iter().map(|m| m[(i, j)]).collect::<Vec<_>>());
        Interval {
            lo: stats::quantile_sorted(&xs, tail),
            hi: stats::quantile_sorted(&xs, 1.0 - tail),
            median: stats::quantile_sorted(&xs, 0.5),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frame(t: usize, d: usize, f: impl Fn(usize, usize) -> f64) -> TimeSeriesFrame {
        TimeSeriesFrame::new(DMatrix::from_fn(t, d, f), 1000.0).unwrap()
    }

    #[test]
    fn constant_series_has_no_positive_frequency_content() {
        let sp = dft(&frame(64, 2, |_, j| 3.0 + j as f64));
        assert!(sp.coefficients.iter().all(|c| c.norm() < 1e-12));
        assert_eq!(sp.frequencies_hz.len(), 32);
    }

    #[test]
    fn single_tone_peaks_on_grid() {
        let t = 200;
        let fs = 1000.0;
        let f = 50.0;
        let ts = TimeSeriesFrame::new(
            DMatrix::from_fn(t, 1, |i, _| (2.0 * std::f64::consts::PI * f * (i + 1) as f64 / fs).cos()),
            fs,
        )
        .unwrap();
        let sp = dft(&ts);
        let (best, _) = sp
            .coefficients
            .iter()
            .enumerate()
            .max_by(|a, b| a.1[0].norm().total_cmp(&b.1[0].norm()))
            .unwrap();
        assert_relative_eq!(sp.frequencies_hz[best], f, epsilon = 1e-9);
    }

    #[test]
    fn band_of_4000_samples_at_1khz() {
        let band = FrequencyBand::new(20.0, 40.0).unwrap();
        assert_eq!(band.indices(4000, 1000.0), 80..160);
        assert_eq!(FrequencyBand::new(40.0, 160.0).unwrap().count(4000, 1000.0), 480);
    }

    #[test]
    fn band_excludes_nyquist_and_dc() {
        let band = FrequencyBand::new(1e-6, 500.0).unwrap();
        assert_eq!(band.indices(1000, 1000.0), 1..500);
        assert_eq!(FrequencyBand::new(1e-6, 500.0).unwrap().indices(999, 1000.0), 1..500);
    }

    #[test]
    fn empty_band_rejected() {
        let sp = dft(&frame(64, 1, |i, _| (i as f64).sin()));
        let band = FrequencyBand::new(1.0, 2.0).unwrap();
        assert!(matches!(band_stat(&sp, &band), Err(Error::Config(_))));
    }

    #[test]
    fn coherence_edge_cases() {
        let diag = PdMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]))).unwrap();
        let c = squared_coherence(&diag);
        assert_eq!(c, DMatrix::identity(3, 3));
        let rho = Complex64::new(0.3, -0.4);
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), rho, rho.conj(), Complex64::new(1.0, 0.0)]);
        let c = squared_coherence(&PdMatrix::new(m).unwrap());
        assert_relative_eq!(c[(0, 1)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ev_ed_examples() {
        let (ev, ed) = ev_ed(&PdMatrix::<f64>::identity(3));
        assert_relative_eq!(ev, 1.0, epsilon = 1e-15);
        assert_relative_eq!(ed, 0.0, epsilon = 1e-15);
        let (ev, ed) = ev_ed(&PdMatrix::<f64>::identity(3).scaled(2.5).unwrap());
        assert_relative_eq!(ev, 2.5, epsilon = 1e-14);
        assert!(ed.abs() < 1e-14);
        let r = 0.6;
        let m = DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0]);
        let (_, ed) = ev_ed(&PdMatrix::new(m).unwrap());
        assert_relative_eq!(ed, 1.0 - (1.0 - r * r).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn constant_trace_gives_degenerate_interval() {
        let draws = vec![PdMatrix::<f64>::identity(2); 10];
        let iv = credible_intervals(&draws, |s| s.matrix().clone(), 0.95).unwrap();
        assert_eq!(iv[(0, 0)], Interval { lo: 1.0, hi: 1.0, median: 1.0 });
    }

    #[test]
    fn frame_validation() {
        assert!(TimeSeriesFrame::new(DMatrix::zeros(3, 2), 1.0).is_err());
        assert!(TimeSeriesFrame::new(DMatrix::zeros(4, 2), 0.0).is_err());
        assert!(TimeSeriesFrame::new(DMatrix::from_element(4, 2, f64::NAN), 1.0).is_err());
    }
}

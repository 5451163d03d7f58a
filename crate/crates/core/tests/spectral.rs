use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pdhmc::linalg::is_pd;
use pdhmc::random::random_pd;
use pdhmc::spectral::var1::{random_transition, var1_simulate, var1_spectral_density, Var1Spec};
use pdhmc::spectral::{band_stat, credible_intervals, dft, ev_ed, fourier_coefficients, squared_coherence};
use pdhmc::{stream_rng, FrequencyBand, PdMatrix, TimeSeriesFrame};
use rand::Rng;

fn frame(values: DMatrix<f64>) -> TimeSeriesFrame {
    TimeSeriesFrame::new(values, 1000.0).unwrap()
}

#[test]
fn parseval_and_linearity() {
    let mut rng = stream_rng(1, 0);
    let x = DMatrix::from_fn(257, 3, |_, _| rng.random::<f64>() - 0.5);
    let y = DMatrix::from_fn(257, 3, |_, _| rng.random::<f64>() - 0.5);
    let fx = fourier_coefficients(&frame(x.clone()));
    let energy: f64 = fx.iter().map(|z| z.norm_sqr()).sum();
    assert!((energy - x.norm_squared()).abs() < 1e-8 * x.norm_squared());

    let (a, b) = (1.7, -0.4);
    let fxy = fourier_coefficients(&frame(&x * a + &y * b));
    let fy = fourier_coefficients(&frame(y));
    let combo = fx * Complex64::new(a, 0.0) + fy * Complex64::new(b, 0.0);
    assert!((&fxy - combo).norm() < 1e-10 * fxy.norm());
}

#[test]
fn tone_lands_on_its_frequency() {
    let t = 200;
    let k0 = 17;
    let x = DMatrix::from_fn(t, 1, |i, _| (2.0 * std::f64::consts::PI * k0 as f64 * (i + 1) as f64 / t as f64).cos());
    let sp = dft(&frame(x));
    let mags: Vec<f64> = sp.coefficients.iter().map(|y| y[0].norm()).collect();
    let peak = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
    assert_eq!(peak, k0);
    assert!(mags.iter().enumerate().filter(|(k, _)| k + 1 != k0).all(|(_, m)| *m < 1e-10));
}

#[test]
fn band_counts_scale_with_width() {
    let (t, fs) = (4000, 1000.0);
    let count = |lo: f64, hi: f64| FrequencyBand::new(lo, hi).unwrap().count(t, fs);
    assert_eq!(count(20.0, 40.0), 80);
    assert_eq!(count(40.0, 160.0), 480);
    for w in 1..10 {
        assert_eq!(count(10.0, 10.0 + 5.0 * w as f64), 20 * w);
    }
}

#[test]
fn band_stat_is_hermitian_psd_and_rank_one_for_a_single_frequency() {
    let mut rng = stream_rng(2, 0);
    let x = DMatrix::from_fn(400, 4, |_, _| rng.random::<f64>());
    let sp = dft(&frame(x));
    let stat = band_stat(&sp, &FrequencyBand::new(20.0, 60.0).unwrap()).unwrap();
    let s = stat.scatter();
    assert_eq!(s, &s.adjoint());
    assert!(is_pd(s, -1e-10 * s.norm()));
    assert_eq!(stat.count(), 16);

    let one = band_stat(&sp, &FrequencyBand::new(50.0, 52.0).unwrap()).unwrap();
    assert_eq!(one.count(), 1);
    let eig = pdhmc::linalg::eigh(one.scatter()).unwrap();
    let top = eig.max_eigenvalue();
    assert_eq!(eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * top).count(), 1);
}

#[test]
fn coherence_and_ev_ed_invariances() {
    let mut rng = stream_rng(3, 0);
    let sigma = random_pd::<Complex64, _>(4, &mut rng);
    let dvec: Vec<Complex64> = (0..4)
        .map(|_| Complex64::from_polar(rng.random_range(0.2..5.0), rng.random_range(0.0..6.28)))
        .collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(dvec));
    let conj = PdMatrix::new(pdhmc::linalg::hermitize(&(&d * sigma.matrix() * d.adjoint()))).unwrap();
    assert!((squared_coherence(&conj) - squared_coherence(&sigma)).norm() < 1e-10);

    let c = 3.7;
    let (ev, ed) = ev_ed(&sigma);
    let (ev_c, ed_c) = ev_ed(&sigma.scaled(c).unwrap());
    assert!((ev_c - c * ev).abs() < 1e-10 * ev_c);
    assert!((ed_c - ed).abs() < 1e-10);
    let (ev_i, ed_i) = ev_ed(&PdMatrix::<f64>::identity(3));
    assert!((ev_i - 1.0).abs() < 1e-12 && ed_i.abs() < 1e-12);
}

#[test]
fn credible_interval_quantiles() {
    let draws: Vec<PdMatrix<f64>> =
        (1..=1000).map(|i| PdMatrix::new(DMatrix::from_element(1, 1, i as f64)).unwrap()).collect();
    let iv = credible_intervals(&draws, |s| s.matrix().clone(), 0.95).unwrap();
    assert!((iv[(0, 0)].lo - 25.975).abs() < 1e-9);
    assert!((iv[(0, 0)].hi - 975.025).abs() < 1e-9);
    assert!((iv[(0, 0)].median - 500.5).abs() < 1e-9);
}

/// Solves `Γ = Φ Γ Φ^T + Q` through `(I - Φ ⊗ Φ) vec Γ = vec Q`.
fn lyapunov(phi: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = phi.nrows();
    let a = DMatrix::identity(d * d, d * d) - phi.kronecker(phi);
    let vq = DVector::from_column_slice(q.as_slice());
    let g = a.lu().solve(&vq).unwrap();
    DMatrix::from_column_slice(d, d, g.as_slice())
}

#[test]
fn var1_stationary_covariance() {
    let mut rng = stream_rng(4, 0);
    let phi = random_transition(3, &[], &mut rng).unwrap() * 0.7;
    let spec = Var1Spec::new(phi.clone(), PdMatrix::identity(3)).unwrap();
    let y = var1_simulate(&spec, 100_200, 200, &mut rng).unwrap();
    let emp = y.transpose() * &y / y.nrows() as f64;
    let exact = lyapunov(&phi, &DMatrix::identity(3, 3));
    let rel = (&emp - &exact).norm() / exact.norm();
    assert!(rel < 0.05, "relative error {rel}");
}

#[test]
fn white_noise_lag_one_autocovariance_vanishes() {
    let mut rng = stream_rng(5, 0);
    let spec = Var1Spec::new(DMatrix::zeros(2, 2), PdMatrix::identity(2)).unwrap();
    let n = 100_000;
    let y = var1_simulate(&spec, n + 1, 1, &mut rng).unwrap();
    let lag = y.rows(1, n - 1).transpose() * y.rows(0, n - 1) / (n - 1) as f64;
    let bound = 3.0 / (n as f64).sqrt();
    assert!(lag.iter().all(|x| x.abs() < bound), "{lag}");
}

#[test]
fn ar1_density_matches_averaged_periodogram() {
    let mut rng = stream_rng(6, 0);
    let phi = 0.6;
    let spec = Var1Spec::new(DMatrix::from_element(1, 1, phi), PdMatrix::identity(1)).unwrap();
    let (t, reps, width) = (1024, 200, 16);
    let mut avg = vec![0.0; t / 2];
    for _ in 0..reps {
        let y = var1_simulate(&spec, t + 100, 100, &mut rng).unwrap();
        let sp = dft(&TimeSeriesFrame::new(y, 1.0).unwrap());
        for (a, c) in avg.iter_mut().zip(&sp.coefficients) {
            *a += c[0].norm_sqr() / reps as f64;
        }
    }
    for block in (0..t / 2 - width).step_by(4 * width) {
        let est: f64 = avg[block..block + width].iter().sum::<f64>() / width as f64;
        let truth: f64 = (block..block + width)
            .map(|k| var1_spectral_density(&spec, (k + 1) as f64 / t as f64).unwrap().matrix()[(0, 0)].re)
            .sum::<f64>()
            / width as f64;
        assert!((est / truth - 1.0).abs() < 0.05, "block at k={}: {est} vs {truth}", block + 1);
    }
}

#[test]
fn block_diagonal_var_has_block_diagonal_density() {
    let mut rng = stream_rng(7, 0);
    let phi = random_transition(5, &[2, 3], &mut rng).unwrap();
    assert!(phi.view((0, 2), (2, 3)).iter().all(|&x| x == 0.0));
    let spec = Var1Spec::new(phi, PdMatrix::identity(5)).unwrap();
    for omega in [0.01, 0.1, 0.3, 0.49] {
        let s = var1_spectral_density(&spec, omega).unwrap();
        let coh = squared_coherence(&s);
        assert!(coh.view((0, 2), (2, 3)).iter().all(|&x| x < 1e-20));
        assert!(coh[(0, 1)] > 0.0 && coh[(2, 4)] > 0.0);
    }
}

#[test]
fn short_or_invalid_series_are_rejected() {
    assert!(TimeSeriesFrame::new(DMatrix::zeros(5, 3), 1.0).is_err());
    assert!(TimeSeriesFrame::new(DMatrix::from_element(10, 2, f64::NAN), 1.0).is_err());
    assert!(TimeSeriesFrame::new(DMatrix::zeros(10, 2), 0.0).is_err());
    let sp = dft(&frame(DMatrix::from_fn(100, 2, |i, j| (i * j) as f64)));
    assert!(band_stat(&sp, &FrequencyBand::new(400.0, 600.0).unwrap()).is_err());
    assert!(band_stat(&sp, &FrequencyBand::new(1.0, 2.0).unwrap()).is_err());
    assert!(FrequencyBand::new(5.0, 5.0).is_err());
}

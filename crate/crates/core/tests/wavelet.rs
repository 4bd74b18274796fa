use std::f64::consts::PI;

use cwt_spectra::prelude::*;
use cwt_spectra::selftest::oracle_discrepancy;
use cwt_spectra::significance::rednoise_spectrum;
use cwt_spectra::synthetic::derive_seed;
use num_complex::Complex64;
use proptest::prelude::*;

fn series(values: Vec<f64>) -> ReturnSeries {
    ReturnSeries::from_values(values, "T").unwrap()
}

fn sinusoid(n: usize, period: f64) -> Vec<f64> {
    (0..n)
        .map(|t| (2.0 * PI * t as f64 / period).sin())
        .collect()
}

fn trapezoid(f: impl Fn(f64) -> Complex64, a: f64, b: f64, steps: usize) -> Complex64 {
    let h = (b - a) / steps as f64;
    let mut acc = (f(a) + f(b)) * 0.5;
    for i in 1..steps {
        acc += f(a + i as f64 * h);
    }
    acc * h
}

#[test]
fn mother_has_unit_norm_and_negligible_mean() {
    let p = MorletParams::default();
    let norm = trapezoid(
        |t| Complex64::new(morlet_mother(t, &p).norm_sqr(), 0.0),
        -40.0,
        40.0,
        400_000,
    );
    assert!((norm.re - 1.0).abs() < 1e-6, "{}", norm.re);
    let mean = trapezoid(|t| morlet_mother(t, &p), -40.0, 40.0, 400_000);
    // Closed form: π^(-1/4)·√(2π)·e^(-ω₀²/2) ≈ 2.87e-8.
    let expected = PI.powf(-0.25) * (2.0 * PI).sqrt() * (-18.0f64).exp();
    assert!(mean.norm() <= 1e-7);
    assert!(
        (mean.re - expected).abs() < 1e-10,
        "{} vs {expected}",
        mean.re
    );
}

#[test]
fn fourier_form_is_the_transform_of_the_mother() {
    let p = MorletParams::default();
    for omega in [1.0, 3.5, 6.0, 7.25, 10.0] {
        let ft = trapezoid(
            |t| morlet_mother(t, &p) * Complex64::from_polar(1.0, -omega * t),
            -40.0,
            40.0,
            200_000,
        ) / (2.0 * PI).sqrt();
        assert!(
            (ft.re - morlet_fourier(omega, &p)).abs() < 1e-9,
            "omega {omega}"
        );
        assert!(ft.im.abs() < 1e-9);
    }
}

#[test]
fn fourier_factor_closed_form() {
    let p = MorletParams::default();
    assert!((p.fourier_factor() - 4.0 * PI / (6.0 + 38f64.sqrt())).abs() < 1e-15);
    assert!((p.fourier_factor() - 1.033_044).abs() < 1e-6);
}

#[test]
fn coi_examples() {
    let p = MorletParams::default();
    let coi = cone_of_influence(101, 1.0, &p);
    assert_eq!(coi[0], 0.0);
    assert_eq!(coi[100], 0.0);
    assert!((coi[50] - 50.0 / 2f64.sqrt()).abs() < 1e-12);
    for t in 0..101 {
        assert_eq!(coi[t], coi[100 - t]);
    }
}

#[test]
fn sinusoid_peaks_at_period_over_fourier_factor() {
    let p = MorletParams::default();
    let grid = build_scale_grid(512, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let s = series(sinusoid(512, 16.0));
    let w = cwt(&s, &grid, &p).unwrap();
    let row = w.coefficients().row(256);
    let j_max = (0..grid.len())
        .max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm()))
        .unwrap();
    let target = 16.0 / p.fourier_factor();
    let j_near = (0..grid.len())
        .min_by(|&a, &b| {
            (grid.scales()[a].ln() - target.ln())
                .abs()
                .total_cmp(&(grid.scales()[b].ln() - target.ln()).abs())
        })
        .unwrap();
    assert!(
        (j_max as i64 - j_near as i64).abs() <= 1,
        "peak at {} vs expected {target}",
        grid.scales()[j_max]
    );
    let direct = cwt_direct(&s, &grid, &p).unwrap();
    let drow = direct.coefficients().row(256);
    let dj_max = (0..grid.len())
        .max_by(|&a, &b| drow[a].norm().total_cmp(&drow[b].norm()))
        .unwrap();
    assert_eq!(dj_max, j_max);
}

#[test]
fn fft_matches_direct_sum_for_many_lengths() {
    let p = MorletParams::default();
    for (i, n) in [8usize, 33, 64, 100, 128, 257].into_iter().enumerate() {
        let grid = build_scale_grid(n, 1.0, 2.0, 1.0 / 6.0).unwrap();
        let s = gen_ar1(n.max(32), 0.5, 1.0, derive_seed(3, i as u64)).unwrap();
        let s = series(s.values()[..n].to_vec());
        let fast = cwt(&s, &grid, &p).unwrap();
        let direct = cwt_direct(&s, &grid, &p).unwrap();
        assert!(oracle_discrepancy(&fast, &direct) < 1e-9, "n = {n}");
    }
}

#[test]
fn fft_matches_direct_sum_with_non_unit_dt() {
    let p = MorletParams::default();
    let s = gen_ar1(200, 0.3, 1.0, 4).unwrap();
    let grid = build_scale_grid(200, 0.5, 1.0, 1.0 / 8.0).unwrap();
    let fast = cwt(&s, &grid, &p).unwrap();
    let direct = cwt_direct(&s, &grid, &p).unwrap();
    assert!(oracle_discrepancy(&fast, &direct) < 1e-9);
}

#[test]
fn transform_is_linear() {
    let p = MorletParams::default();
    let grid = build_scale_grid(300, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let x = gen_ar1(300, 0.2, 1.0, 1).unwrap();
    let y = gen_ar1(300, 0.7, 2.0, 2).unwrap();
    let (a, b) = (1.7, -0.6);
    let z: Vec<f64> = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(u, v)| a * u + b * v)
        .collect();
    let wx = cwt(&x, &grid, &p).unwrap();
    let wy = cwt(&y, &grid, &p).unwrap();
    let wz = cwt(&series(z), &grid, &p).unwrap();
    let scale = wz
        .coefficients()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    for ((ij, cz), (cx, cy)) in wz
        .coefficients()
        .indexed()
        .zip(wx.coefficients().iter().zip(wy.coefficients().iter()))
    {
        assert!((cz - (cx * a + cy * b)).norm() < 1e-12 * scale, "{ij:?}");
    }
}

#[test]
fn transform_commutes_with_translation_away_from_edges() {
    let p = MorletParams::default();
    let n = 512;
    let grid = build_scale_grid(n, 1.0, 2.0, 1.0 / 12.0).unwrap();
    // A pulse train confined well inside the series, shifted by k samples.
    let pulse = |c: f64| -> Vec<f64> {
        (0..n)
            .map(|t| {
                let d = t as f64 - c;
                (-d * d / 50.0).exp() * (0.9 * d).cos()
            })
            .collect()
    };
    let k = 37;
    let a = cwt(&series(pulse(200.0)), &grid, &p).unwrap();
    let b = cwt(&series(pulse(200.0 + k as f64)), &grid, &p).unwrap();
    let peak = a
        .coefficients()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    for (j, &s) in grid
        .scales()
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= 16.0)
    {
        for u in 150..260 {
            let d = (a.coefficients()[(u, j)] - b.coefficients()[(u + k, j)]).norm();
            assert!(d < 1e-9 * peak, "u {u} s {s}");
        }
    }
}

#[test]
fn power_is_squared_modulus_and_scales_quadratically() {
    let p = MorletParams::default();
    let grid = build_scale_grid(256, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let x = gen_ar1(256, 0.4, 1.0, 10).unwrap();
    let w = cwt(&x, &grid, &p).unwrap();
    let spec = power(&w);
    for (ij, c) in w.coefficients().indexed() {
        assert_eq!(spec.power()[ij], c.norm_sqr());
    }
    let c = -3.5;
    let scaled = power(
        &cwt(
            &series(x.values().iter().map(|v| c * v).collect()),
            &grid,
            &p,
        )
        .unwrap(),
    );
    for (ij, v) in scaled.power().indexed() {
        let expect = c * c * spec.power()[ij];
        assert!((v - expect).abs() <= 1e-12 * expect.max(1e-300), "{ij:?}");
    }
}

#[test]
fn zero_and_constant_series() {
    let p = MorletParams::default();
    let grid = build_scale_grid(64, 1.0, 2.0, 1.0 / 4.0).unwrap();
    for v in [0.0, 3.25] {
        let s = series(vec![v; 64]);
        for w in [
            cwt(&s, &grid, &p).unwrap(),
            cwt_direct(&s, &grid, &p).unwrap(),
        ] {
            assert!(w.coefficients().iter().all(|c| c.norm() == 0.0));
        }
    }
}

#[test]
fn dimensions_and_finiteness() {
    let p = MorletParams::default();
    let s = gen_ar1(777, 0.9, 1.0, 5).unwrap();
    let grid = build_scale_grid(777, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let w = cwt(&s, &grid, &p).unwrap();
    assert_eq!(w.coefficients().rows(), 777);
    assert_eq!(w.coefficients().cols(), grid.len());
    assert!(w
        .coefficients()
        .iter()
        .all(|c| c.re.is_finite() && c.im.is_finite()));
    let spec = power(&w);
    assert!(spec.power().iter().all(|&v| v >= 0.0));
    assert!(spec.coi().iter().all(|&c| c >= 0.0));
}

#[test]
fn sinusoid_reconstructs_within_two_percent_away_from_coi() {
    let p = MorletParams::default();
    let basis = WaveletBasis::new(p).unwrap();
    let n = 1024;
    let grid = build_scale_grid(n, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let s = series(sinusoid(n, 32.0));
    let back = inverse_cwt(&cwt(&s, &grid, &p).unwrap(), &basis).unwrap();
    // Interior: further from the edges than the cone for the period-32 scale.
    let edge = (32.0 / p.fourier_factor() * 2f64.sqrt()).ceil() as usize;
    let mu = s.mean();
    let (mut num, mut den) = (0.0, 0.0);
    for t in edge..n - edge {
        num += (s.values()[t] - mu - back.values()[t]).powi(2);
        den += (s.values()[t] - mu).powi(2);
    }
    let err = (num / den).sqrt();
    assert!(err <= 0.02, "relative error {err}");
}

#[test]
fn zero_series_reconstructs_to_zero() {
    let p = MorletParams::default();
    let basis = WaveletBasis::new(p).unwrap();
    let grid = build_scale_grid(128, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let back = inverse_cwt(&cwt(&series(vec![0.0; 128]), &grid, &p).unwrap(), &basis).unwrap();
    assert!(back.values().iter().all(|&v| v == 0.0));
}

#[test]
fn coarse_grid_refuses_reconstruction() {
    let p = MorletParams::default();
    let basis = WaveletBasis::new(p).unwrap();
    let grid = build_scale_grid(128, 1.0, 2.0, 0.5).unwrap();
    let w = cwt(&gen_ar1(128, 0.0, 1.0, 1).unwrap(), &grid, &p).unwrap();
    assert!(matches!(
        inverse_cwt(&w, &basis),
        Err(Error::GridTooCoarse { .. })
    ));
}

#[test]
fn energy_ratio_is_stable_and_amplitude_invariant() {
    let p = MorletParams::default();
    let grid = build_scale_grid(1024, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let ratios: Vec<f64> = (0..10)
        .map(|i| {
            let s = gen_ar1(1024, 0.0, 1.0, derive_seed(31, i)).unwrap();
            energy(&cwt(&s, &grid, &p).unwrap()).unwrap().ratio()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    for r in &ratios {
        assert!((r / mean - 1.0).abs() <= 0.02, "{r} vs mean {mean}");
    }
    let s = gen_ar1(1024, 0.0, 1.0, 99).unwrap();
    let e1 = energy(&cwt(&s, &grid, &p).unwrap()).unwrap();
    let c = 7.0;
    let scaled = series(s.values().iter().map(|v| v * c).collect());
    let e2 = energy(&cwt(&scaled, &grid, &p).unwrap()).unwrap();
    assert!((e2.wavelet / e1.wavelet - c * c).abs() < 1e-10 * c * c);
    assert!((e2.series / e1.series - c * c).abs() < 1e-10 * c * c);
}

#[test]
fn averaged_red_noise_power_tracks_the_model_spectrum() {
    let p = MorletParams::default();
    let n = 1024;
    let grid = build_scale_grid(n, 1.0, 2.0, 1.0 / 12.0).unwrap();
    let plan = CwtPlan::new(&grid, &p).unwrap();
    let model = Ar1Model::new(0.5, 1.0).unwrap();
    let coi = cone_of_influence(n, 1.0, &p);
    let mut sums = vec![0.0; grid.len()];
    let mut counts = vec![0usize; grid.len()];
    for i in 0..1000 {
        let s = gen_ar1(n, 0.5, 1.0, derive_seed(77, i)).unwrap();
        for (j, col) in plan.power_columns(s.values()).unwrap().iter().enumerate() {
            for (t, v) in col.iter().enumerate() {
                if grid.scales()[j] <= coi[t] {
                    sums[j] += v;
                    counts[j] += 1;
                }
            }
        }
    }
    let periods = grid.periods(&p);
    for j in 0..grid.len() {
        // Mid-band scales, away from the Nyquist-adjacent and the longest
        // (few interior samples) scales.
        if !(4.0..=64.0).contains(&periods[j]) {
            continue;
        }
        let mean = sums[j] / counts[j] as f64;
        let expect = model.series_variance() * rednoise_spectrum(&model, 1.0 / periods[j]);
        assert!(
            (mean / expect - 1.0).abs() < 0.1,
            "period {:.2}: {mean} vs {expect}",
            periods[j]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_agrees_with_oracle_on_random_series(
        values in prop::collection::vec(-5.0f64..5.0, 16..160),
        dj in prop::sample::select(vec![0.25, 0.125, 1.0 / 12.0]),
    ) {
        let p = MorletParams::default();
        let s = series(values);
        let grid = build_scale_grid(s.len(), 1.0, 2.0, dj).unwrap();
        let fast = cwt(&s, &grid, &p).unwrap();
        let direct = cwt_direct(&s, &grid, &p).unwrap();
        let peak = direct.coefficients().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let coi = cone_of_influence(s.len(), 1.0, &p);
        let n = s.len() as f64;
        for ((t, j), c) in fast.coefficients().indexed() {
            let sj = grid.scales()[j];
            if sj <= n / 4.0 && sj <= coi[t] {
                let d = (c - direct.coefficients()[(t, j)]).norm();
                prop_assert!(d <= 1e-9 * peak.max(1e-300), "t {} s {}", t, sj);
            }
        }
        let spec = power(&fast);
        prop_assert!(spec.power().iter().all(|v| v.is_finite() && *v >= 0.0));
        let coi = spec.coi();
        let n = coi.len();
        for t in 0..n {
            prop_assert_eq!(coi[t], coi[n - 1 - t]);
        }
    }

    #[test]
    fn grid_follows_closed_form(n in 8usize..5000, s0 in 2.0f64..6.0, dj in 0.05f64..1.0) {
        match build_scale_grid(n, 1.0, s0, dj) {
            Ok(g) => {
                let j_max = ((n as f64 / s0).log2() / dj + 1e-9).floor() as usize;
                prop_assert_eq!(g.len(), j_max + 1);
                prop_assert_eq!(g.scales()[0], s0);
                prop_assert!(g.scales().windows(2).all(|w| w[1] > w[0]));
                prop_assert!(g.max_scale() <= n as f64 * (1.0 + 1e-9));
            }
            Err(_) => prop_assert!((n as f64 / s0).log2() / dj < 1.0 + 1e-9),
        }
    }
}

mod common;

use cascade_core::dispersion::{bootstrap_interval, minimal_mass_interval, minimal_mass_interval_samples};
use cascade_core::geometry::first_null;
use cascade_core::harness::{detect_transition, detect_transition_between, run_sweep, Engine, SweepConfig};
use cascade_core::qm::{
    cascade_density, fraunhofer_density, fresnel_propagate, sample_density, Axis, ComplexField, GridSpec,
    ScreenDensity,
};
use cascade_core::subqm::{critical_length, mixture_weight, simulate_photons, subqm_density, SubQmParams};
use cascade_core::ExperimentGeometry;
use common::*;
use num_complex::Complex64;

fn paper(l: f64) -> ExperimentGeometry {
    ExperimentGeometry::paper_defaults(l)
}

fn formal(d: &ScreenDensity) -> f64 {
    minimal_mass_interval(d, 0.7).unwrap().delta_x
}

#[test]
fn fresnel_far_field_matches_sinc_squared() {
    // Fresnel number 10e-6^2 / (4 * 700e-9 * 2e-3) = 0.0179.
    let z = 2e-3;
    let g = ExperimentGeometry { l0: z, ..paper(z) };
    assert!(g.fresnel_number(z) <= 0.02);
    let grid = GridSpec::default();
    let analytic = fraunhofer_density(&g, &grid).unwrap();
    let slit = ComplexField::from_fn(Axis::centered(0.5 * g.delta0, 512), |_| Complex64::new(1.0, 0.0)).unwrap();
    let out = fresnel_propagate(&slit, z, g.lambda0, &analytic.axis()).unwrap();
    let numeric = ScreenDensity::normalized(out.x0, out.dx, out.intensity()).unwrap();
    let l1 = numeric.l1_distance(&analytic).unwrap();
    assert!(l1 < 0.02, "L1 = {l1}");
}

#[test]
fn gaussian_beam_width_matches_closed_form() {
    let (lambda, w0, z) = (700e-9, 20e-6, 5e-3);
    let input = ComplexField::from_fn(Axis::centered(4.0 * w0, 512), |x| {
        Complex64::new((-(x * x) / (w0 * w0)).exp(), 0.0)
    })
    .unwrap();
    let zr = std::f64::consts::PI * w0 * w0 / lambda;
    let wz = w0 * (1.0 + (z / zr).powi(2)).sqrt();
    let out = fresnel_propagate(&input, z, lambda, &Axis::centered(4.0 * wz, 4096)).unwrap();
    let intensity = out.intensity();
    let axis = out.axis();
    let total: f64 = intensity.iter().sum();
    let second: f64 = intensity.iter().enumerate().map(|(i, v)| v * axis.x(i).powi(2)).sum::<f64>() / total;
    // |E|^2 ~ exp(-2 x^2 / w^2) has standard deviation w / 2.
    let sigma = second.sqrt();
    assert!(rel(sigma, 0.5 * wz) < 0.01, "{sigma} vs {}", 0.5 * wz);
    assert!(rel(out.power(), input.power()) < 0.01);
}

#[test]
fn cascade_approaches_fraunhofer_at_long_separation() {
    let grid = GridSpec::default();
    for l in [0.3, 1.0] {
        let g = paper(l);
        let cascade = cascade_density(&g, &grid).unwrap();
        let analytic = fraunhofer_density(&g, &grid).unwrap();
        let l1 = cascade.l1_distance(&analytic).unwrap();
        assert!(l1 < 0.05, "l = {l}: L1 = {l1}");
    }
}

#[test]
fn cascade_dispersion_is_flat_in_l() {
    let grid = GridSpec::default();
    let widths: Vec<f64> = [0.3e-3, 3e-3, 3e-2, 0.3]
        .iter()
        .map(|&l| formal(&cascade_density(&paper(l), &grid).unwrap()))
        .collect();
    assert!(relative_spread(&widths) < 0.05, "{widths:?}");
}

#[test]
fn sinc_squared_formal_width() {
    let g = paper(0.3e-3);
    let x1 = first_null(&g).unwrap();
    let oracle = sinc2_min_window(0.7, 12.0);
    let got = formal(&fraunhofer_density(&g, &GridSpec::default()).unwrap()) / x1;
    assert!(rel(got, oracle) < 0.002, "{got} vs oracle {oracle}");
    assert!(rel(got, 0.85) < 0.05);
    // Both far below the 4 * x1 rule of thumb.
    assert!(got < 1.0);
}

#[test]
fn ks_test_of_density_sampler() {
    let d = fraunhofer_density(&paper(0.3e-3), &GridSpec::default()).unwrap();
    let n = 100_000;
    let s = sample_density(&d, n, 2024).unwrap();
    let ks = ks_statistic(s.positions(), d.x0(), d.dx(), d.values());
    assert!(ks < ks_critical_1pct(n), "KS {ks}");
}

#[test]
fn sample_estimator_tracks_density_estimator() {
    let grid = GridSpec::default();
    let d = fraunhofer_density(&paper(0.3e-3), &grid).unwrap();
    let s = sample_density(&d, 1_000_000, 77).unwrap();
    let by_samples = minimal_mass_interval_samples(&s, 0.7).unwrap().delta_x;
    assert!(rel(by_samples, formal(&d)) < 0.015);
}

#[test]
fn sample_estimator_matches_brute_force() {
    let pts: Vec<f64> = (0..60).map(|i| ((i * 7919 % 97) as f64).sqrt() * 1.3 - (i as f64 * 0.1)).collect();
    let s = cascade_core::SampleSet::new(pts.clone(), 0).unwrap();
    for mass in [0.1, 0.5, 0.7, 0.9] {
        let got = minimal_mass_interval_samples(&s, mass).unwrap().delta_x;
        assert_eq!(got, brute_force_window(&pts, mass), "mass {mass}");
    }
}

#[test]
fn bootstrap_width_shrinks_like_inverse_sqrt_n() {
    let sigma = 1.0;
    let n_cells = 4096;
    let dx = 20.0 * sigma / n_cells as f64;
    let values: Vec<f64> = (0..n_cells)
        .map(|i| {
            let x = -10.0 * sigma + (i as f64 + 0.5) * dx;
            (-0.5 * x * x).exp()
        })
        .collect();
    let d = ScreenDensity::normalized(-10.0 * sigma + 0.5 * dx, dx, values).unwrap();
    let widths: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let s = sample_density(&d, n, 100 + i as u64).unwrap();
            let (lo, hi) = bootstrap_interval(&s, 0.7, 200, 7).unwrap();
            hi - lo
        })
        .collect();
    let expected = 10f64.sqrt();
    for pair in widths.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(ratio > expected / 2.0 && ratio < expected * 2.0, "{widths:?}");
    }
}

#[test]
fn subqm_recovers_qm_at_long_separation() {
    let grid = GridSpec::default();
    let p = SubQmParams::new(100e-12);
    let g = paper(0.3);
    let w = mixture_weight(&g, &p).unwrap();
    assert!(((1.0 - w) - (-10.007f64).exp()).abs() < 1e-6);
    let sub = formal(&subqm_density(&g, &p, &grid).unwrap());
    let qm = formal(&fraunhofer_density(&g, &grid).unwrap());
    assert!(rel(sub, qm) < 0.02);
}

#[test]
fn subqm_is_narrower_at_short_separation() {
    let grid = GridSpec { points: 16384, window_nulls: 12.0 };
    let p = SubQmParams::new(100e-12);
    let g = paper(3e-3);
    let w = mixture_weight(&g, &p).unwrap();
    assert!((w - 0.095).abs() < 0.001);
    let sub = formal(&subqm_density(&g, &p, &grid).unwrap());
    let qm = formal(&fraunhofer_density(&g, &grid).unwrap());
    assert!(sub < 0.6 * qm, "{sub} vs {qm}");
}

#[test]
fn photon_simulation_matches_mixture() {
    let grid = GridSpec::default();
    let p = SubQmParams::new(100e-12);
    let g = paper(3e-3);
    let n = 1_000_000;
    let s = simulate_photons(&g, &p, &grid, n, 31).unwrap();
    let d = subqm_density(&g, &p, &grid).unwrap();
    let mc = minimal_mass_interval_samples(&s, 0.7).unwrap().delta_x;
    assert!(rel(mc, formal(&d)) < 0.015);
    let ks = ks_statistic(s.positions(), d.x0(), d.dx(), d.values());
    assert!(ks < ks_critical_1pct(n), "KS {ks}");
}

#[test]
fn sweep_examples() {
    let base = SweepConfig {
        l_values_m: vec![0.3e-3, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3],
        engines: vec![Engine::Fraunhofer, Engine::FresnelCascade, Engine::SubqmAnalytic],
        ..Default::default()
    };
    let r = run_sweep(&base).unwrap();
    let curve = |e: Engine| -> Vec<f64> {
        r.records.iter().filter(|x| x.engine == e).map(|x| x.delta_x_m).collect()
    };
    let fraunhofer = curve(Engine::Fraunhofer);
    assert!(fraunhofer.iter().all(|&d| d == fraunhofer[0]));
    assert!(relative_spread(&curve(Engine::FresnelCascade)) < 0.05);

    let sub = curve(Engine::SubqmAnalytic);
    assert!(sub[2] < sub[6]);
    assert!(rel(sub[6], fraunhofer[6]) < 0.02);

    let l_est = detect_transition(&r, 0.95).unwrap().unwrap();
    let l_crit = critical_length(&SubQmParams::new(100e-12));
    assert!(l_est > l_crit / 5.0 && l_est < l_crit * 5.0, "{l_est} vs {l_crit}");

    // QM-only comparison: both routes flat, so the ratio clears 0.95 at once.
    let qm_only = detect_transition_between(&r, Engine::Fraunhofer, Engine::FresnelCascade, 0.95).unwrap();
    assert_eq!(qm_only, Some(0.3e-3));
}

use std::f64::consts::PI;

use restrict_core::measure::{
    ball_regularity_profile, fourier_decay_profile, fourier_transform_at, make_cantor_measure,
    make_random_cantor_measure, make_sphere_measure, DiscreteMeasure,
};
use restrict_core::quad::gauss_legendre;

/// J0(x) = (1/pi) int_0^pi cos(x sin t) dt by composite Gauss-Legendre.
fn bessel_j0(x: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let panels = 64 + (x.abs() as usize) / 2;
    let h = PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in nodes.iter().zip(&weights) {
            let u = a + 0.5 * h * (t + 1.0);
            s += 0.5 * h * w * (x * u.sin()).cos();
        }
    }
    s / PI
}

#[test]
fn bessel_oracle_sanity() {
    // tabulated values
    assert!((bessel_j0(0.0) - 1.0).abs() < 1e-14);
    assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
    assert!((bessel_j0(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-14);
    assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-14);
}

#[test]
fn circle_matches_bessel() {
    let m = make_sphere_measure(2, 1024).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let r = k as f64 * 0.25;
        for (c, s) in [(1.0, 0.0), (0.6, 0.8), ((0.3f64).cos(), (0.3f64).sin())] {
            let v = fourier_transform_at(&m, &[r * c, r * s]).unwrap()[0];
            worst = worst.max((v - bessel_j0(2.0 * PI * r)).norm());
        }
    }
    assert!(worst < 1e-6, "max error {worst}");
    let v = fourier_transform_at(&m, &[10.0, 0.0]).unwrap()[0];
    assert!((v.re - bessel_j0(20.0 * PI)).abs() < 1e-6);
}

#[test]
fn sphere_matches_sinc_below_aliasing() {
    let m = make_sphere_measure(3, 4096).unwrap();
    let limit = m.aliasing_frequency().unwrap();
    assert!(limit > 7.0);
    let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.48, 0.6, 0.64], [0.0, 0.6, -0.8]];
    let mut worst: f64 = 0.0;
    let steps = 200;
    for k in 1..=steps {
        let r = limit * k as f64 / steps as f64;
        let exact = (2.0 * PI * r).sin() / (2.0 * PI * r);
        for u in &dirs {
            let v = fourier_transform_at(&m, &[r * u[0], r * u[1], r * u[2]]).unwrap()[0];
            worst = worst.max((v - exact).norm());
        }
    }
    assert!(worst < 1e-4, "max error {worst}");
}

#[test]
fn cantor_matches_riesz_product() {
    let m = make_cantor_measure(1.0 / 3.0, 10).unwrap();
    assert_eq!(m.len(), 1024);
    assert!(m.weights().iter().all(|&w| w == 1.0 / 1024.0));
    for k in 0..300 {
        let xi = -70.0 + 0.4717 * k as f64;
        let v = fourier_transform_at(&m, &[xi]).unwrap()[0];
        // (1 - r) r^(k-1) = 2 (1/3)^k for r = 1/3
        let prod: f64 = (1..=10).map(|j| (PI * (1.0f64 / 3.0).powi(j) * xi * 2.0).cos()).product();
        assert!((v.norm() - prod.abs()).abs() < 1e-8, "xi={xi}");
        // the unimodular factor is e^{-pi i xi} (centre of mass 1/2)
        let phase = num_complex::Complex64::from_polar(1.0, -PI * xi);
        assert!((v - phase * prod).norm() < 1e-8);
    }
}

/// Brute-force ball counting over all atoms.
fn brute_max_mass(m: &DiscreteMeasure, r: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..m.len() {
        let c = m.atom(i);
        let s: f64 = (0..m.len())
            .filter(|&j| {
                let y = m.atom(j);
                c.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r * r
            })
            .map(|j| m.weights()[j])
            .sum();
        best = best.max(s);
    }
    best
}

#[test]
fn ball_counts_match_brute_force() {
    let m = make_cantor_measure(0.25, 8).unwrap();
    let radii = [0.25f64, 0.0625, 0.015625, 0.00390625];
    let p = ball_regularity_profile(&m, &radii, usize::MAX).unwrap();
    for (r, got) in radii.iter().zip(&p.max_ball_masses) {
        assert!((brute_max_mass(&m, *r) - got).abs() < 1e-15);
    }
    assert!((p.a_fit - 0.5).abs() < 0.05, "a_fit {}", p.a_fit);
    assert!(p.a_const >= 1.0);

    let c = make_sphere_measure(2, 512).unwrap();
    let p = ball_regularity_profile(&c, &[0.5, 0.1, 0.02], usize::MAX).unwrap();
    for (r, got) in [0.5, 0.1, 0.02].iter().zip(&p.max_ball_masses) {
        assert!((brute_max_mass(&c, *r) - got).abs() < 1e-15);
    }
}

#[test]
fn circle_frostman_exponent() {
    let m = make_sphere_measure(2, 4096).unwrap();
    let radii: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
    let p = ball_regularity_profile(&m, &radii, usize::MAX).unwrap();
    assert!((0.9..=1.1).contains(&p.a_fit), "a_fit {}", p.a_fit);
}

#[test]
fn cantor_frostman_exponent() {
    let m = make_cantor_measure(1.0 / 3.0, 14).unwrap();
    let radii: Vec<f64> = (2..=8).map(|k| (1.0f64 / 3.0).powi(k)).collect();
    let p = ball_regularity_profile(&m, &radii, usize::MAX).unwrap();
    assert!((0.58..=0.68).contains(&p.a_fit), "a_fit {}", p.a_fit);
}

#[test]
fn circle_decay_exponent() {
    let m = make_sphere_measure(2, 8192).unwrap();
    let radii: Vec<f64> = (2..=8).map(|k| 2f64.powi(k)).collect();
    let p = fourier_decay_profile(&m, &radii, 64).unwrap();
    assert!((0.45..=0.55).contains(&p.b_fit), "b_fit {}", p.b_fit);
    assert!(p.annulus_sups.iter().all(|&s| (0.0..=1.0).contains(&s)));
    assert!(p.b_const >= 1.0);
}

#[test]
fn cantor_decay_fails() {
    let m = make_cantor_measure(1.0 / 3.0, 16).unwrap();
    let radii: Vec<f64> = (1..=6).map(|k| 3f64.powi(k)).collect();
    let p = fourier_decay_profile(&m, &radii, 2).unwrap();
    assert!(p.b_fit < 0.05, "b_fit {}", p.b_fit);
}

#[test]
fn random_cantor_is_reproducible() {
    let a = make_random_cantor_measure(0.3, 8, 7).unwrap();
    let b = make_random_cantor_measure(0.3, 8, 7).unwrap();
    let c = make_random_cantor_measure(0.3, 8, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.atoms(), c.atoms());
    assert!(a.label().contains("experimental"));
    assert!(a.atoms().iter().all(|&x| (0.0..=1.0).contains(&x)));
}

use std::f64::consts::PI;

use num_complex::Complex64;
use restrict_core::bump::chi_j;
use restrict_core::exponents::{exponent_profile, int, rat};
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::lorentz::LorentzExponent;
use restrict_core::measure::{fourier_transform_at, make_sphere_measure};
use restrict_lab::nufft::NufftOptions;
use restrict_lab::restriction::{
    convolve_mu_hat, l2_operator_norm, lorentz_operator_lower_bound, stein_tomas_ratio, FourierMultiplier,
    MuHatConvolution,
};
use restrict_lab::spectral::transform_on_lattice;

fn spread(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn convolution_matches_direct_quadrature() {
    let mu = make_sphere_measure(2, 256).unwrap();
    let grid = GridSpec::isotropic(2, 4.0, 64).unwrap();
    let f = SampledField::from_fn(grid.clone(), |x| {
        let r2 = (x[0] - 0.2).powi(2) + x[1] * x[1];
        Complex64::new(1.0, x[1]) * (-r2 / 0.09).exp()
    });
    let out = convolve_mu_hat(&f, &mu).unwrap();
    let h2 = grid.cell_volume();
    let mut x = [0.0; 2];
    let mut y = [0.0; 2];
    let mut checked = 0;
    // inner quarter is |x_a| <= 1, i.e. indices 24..=40
    for m in (24..=40).step_by(3).flat_map(|i| (24..=40).step_by(3).map(move |k| i * 64 + k)) {
        grid.coords(m, &mut x);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, v) in f.values().iter().enumerate() {
            if v.norm() < 1e-18 {
                continue;
            }
            grid.coords(n, &mut y);
            acc += v * fourier_transform_at(&mu, &[x[0] - y[0], x[1] - y[1]]).unwrap()[0];
        }
        acc *= h2;
        assert!((out.values()[m] - acc).norm() < 1e-6, "{m}");
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn knapp_caps_keep_the_ratio_bounded() {
    // caps of size delta x delta^2 at the origin of a circle shifted down by one
    let circle = make_sphere_measure(2, 65536).unwrap().translated(&[0.0, -1.0]);
    let profile = exponent_profile(2, int(1), rat(1, 2)).unwrap();
    let mut ratios = Vec::new();
    for k in 2..=7 {
        let delta = (-(k as f64)).exp2();
        let (h1, h2) = (1.0 / (6.0 * delta), 1.0 / (10.0 * delta * delta));
        let grid = GridSpec::new(vec![24.0 * h1, 40.0 * h2], vec![48, 80]).unwrap();
        let f = SampledField::from_fn(grid, |x| {
            let q = (delta * x[0]).powi(2) + (delta * delta * x[1]).powi(2);
            Complex64::new((-PI * q).exp(), 0.0)
        });
        ratios.push(stein_tomas_ratio(&f, &circle, &profile).unwrap());
    }
    assert!(spread(&ratios) <= 10.0, "{ratios:?}");
}

#[test]
fn gaussian_dilates_keep_the_ratio_bounded() {
    let circle = make_sphere_measure(2, 4096).unwrap();
    let profile = exponent_profile(2, int(1), rat(1, 2)).unwrap();
    let grid = GridSpec::isotropic(2, 2.0, 512).unwrap();
    let ratios: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|t| {
            let f = SampledField::from_fn(grid.clone(), |x| {
                Complex64::new((-16.0 * PI * t * t * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)
            });
            stein_tomas_ratio(&f, &circle, &profile).unwrap()
        })
        .collect();
    assert!(spread(&ratios) <= 10.0, "{ratios:?}");
}

#[test]
fn ratio_is_translation_invariant() {
    let circle = make_sphere_measure(2, 2048).unwrap();
    let profile = exponent_profile(2, int(1), rat(1, 2)).unwrap();
    let grid = GridSpec::isotropic(2, 4.0, 128).unwrap();
    let bump = |c: [f64; 2]| {
        SampledField::from_fn(grid.clone(), move |x| {
            let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            Complex64::new(1.0, 0.5 * (x[0] - c[0])) * (-r2 / 0.2).exp()
        })
    };
    let h = grid.spacing(0);
    let a = stein_tomas_ratio(&bump([0.0, 0.0]), &circle, &profile).unwrap();
    let b = stein_tomas_ratio(&bump([7.0 * h, -12.0 * h]), &circle, &profile).unwrap();
    assert!((a - b).abs() <= 1e-8 * a, "{a} {b}");
}

#[test]
fn dyadic_convolution_norms_grow_like_two_to_the_j() {
    let mu = make_sphere_measure(2, 4096).unwrap();
    let mut scaled = Vec::new();
    for j in 2..=6u32 {
        let reach = (1u64 << (j + 1)) as f64;
        let h = 0.4;
        let n = (2.0 * reach / h).ceil() as usize;
        let n = n + n % 2;
        let grid = GridSpec::isotropic(2, n as f64 * h / 2.0, n).unwrap();
        // mu^ at offsets r h with |r_a| <= n/2
        let half = n / 2;
        let counts = [n + 1, n + 1];
        let origin = [-(half as f64) * h; 2];
        let hat = transform_on_lattice(&mu, &origin, &[h, h], &counts, NufftOptions::default()).unwrap();
        let op = FourierMultiplier::periodic_convolution(grid, |r| {
            let i = (r[0] / h).round() as i64 + half as i64;
            let k = (r[1] / h).round() as i64 + half as i64;
            hat[i as usize * (n + 1) + k as usize] * chi_j(j, (r[0] * r[0] + r[1] * r[1]).sqrt())
        })
        .unwrap();
        let est = l2_operator_norm(&op, 1e-5, 150, 0).unwrap();
        let exact = op.symbol().iter().map(|s| s.norm()).fold(0.0, f64::max);
        assert!(est.value <= exact * (1.0 + 1e-9) && est.value >= 0.5 * exact, "{} {}", est.value, exact);
        scaled.push(est.value / (j as f64).exp2());
    }
    assert!(spread(&scaled) <= 10.0, "{scaled:?}");
}

#[test]
fn lorentz_lower_bound_for_knapp_caps() {
    let mu = make_sphere_measure(2, 1024).unwrap();
    let grid = GridSpec::isotropic(2, 16.0, 128).unwrap();
    let family: Vec<SampledField> = [0.6, 0.8, 1.0]
        .iter()
        .map(|&delta: &f64| {
            SampledField::from_fn(grid.clone(), move |x| {
                let q = (delta * x[0]).powi(2) + (delta * delta * x[1]).powi(2);
                Complex64::from_polar((-PI * 4.0 * q).exp(), 2.0 * PI * x[1])
            })
        })
        .collect();
    let op = MuHatConvolution { mu: &mu, grid: grid.clone() };
    let est = lorentz_operator_lower_bound(
        &op,
        LorentzExponent::new(1.2, 1.0).unwrap(),
        LorentzExponent::new(6.0, f64::INFINITY).unwrap(),
        &family,
    )
    .unwrap();
    assert!(est.lower_bound && est.value.is_finite() && est.value > 0.0);
    assert_eq!(est.count, 3);
}

use num_complex::Complex64;
use proptest::prelude::*;
use restrict_core::exponents::{exponent_profile, rat, verify_identities};
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::lorentz::{
    decreasing_rearrangement, lorentz_norm, weighted_lorentz_norm, LorentzExponent,
};
use restrict_core::measure::{fourier_transform_at, make_cantor_measure, make_sphere_measure};

fn field_from(vals: &[(f64, f64)], half_width: f64) -> SampledField {
    let n = vals.len().max(8);
    let g = GridSpec::new(vec![half_width], vec![n]).unwrap();
    let mut v: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    v.resize(n, Complex64::new(0.0, 0.0));
    SampledField::new(g, v).unwrap()
}

fn lp_direct(f: &SampledField, p: f64) -> f64 {
    (f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>() * f.cell_volume()).powf(1.0 / p)
}

fn values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn diagonal_lorentz_is_lebesgue(v in values(), p in 0.5f64..8.0, l in 0.5f64..40.0) {
        let f = field_from(&v, l);
        let a = lorentz_norm(&f, LorentzExponent::lebesgue(p).unwrap());
        let b = lp_direct(&f, p);
        prop_assert!((a - b).abs() <= 1e-10 * b.max(f64::MIN_POSITIVE), "{} {}", a, b);
    }

    #[test]
    fn homogeneous(v in values(), p in 0.5f64..8.0, s in 0.5f64..8.0, k in -20i32..20, c in 0.01f64..100.0) {
        let f = field_from(&v, 4.0);
        let e = LorentzExponent::new(p, s).unwrap();
        let base = lorentz_norm(&f, e);
        let two = 2f64.powi(k);
        prop_assert_eq!(lorentz_norm(&f.scaled(Complex64::new(0.0, two)), e), two * base);
        let scaled = lorentz_norm(&f.scaled(Complex64::new(c, 0.0)), e);
        prop_assert!((scaled - c * base).abs() <= 1e-14 * c * base);
        let weak = LorentzExponent::new(p, f64::INFINITY).unwrap();
        prop_assert_eq!(lorentz_norm(&f.scaled(Complex64::new(-two, 0.0)), weak), two * lorentz_norm(&f, weak));
    }

    #[test]
    fn rearrangement_invariant(v in values(), seed in any::<u64>(), p in 0.5f64..8.0, s in 0.5f64..8.0) {
        let f = field_from(&v, 4.0);
        let mut w = f.values().to_vec();
        // deterministic shuffle plus unimodular phases
        let mut state = seed | 1;
        for i in (1..w.len()).rev() {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            w.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let w: Vec<Complex64> = w.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
        let g = SampledField::new(f.grid().clone(), w).unwrap();
        prop_assert_eq!(decreasing_rearrangement(&f), decreasing_rearrangement(&g));
        for e in [LorentzExponent::new(p, s).unwrap(), LorentzExponent::new(p, f64::INFINITY).unwrap()] {
            prop_assert_eq!(lorentz_norm(&f, e), lorentz_norm(&g, e));
        }
    }

    #[test]
    fn monotone_in_magnitude(v in values(), p in 0.5f64..8.0, s in 0.5f64..8.0, bump in 0usize..64) {
        let f = field_from(&v, 4.0);
        let mut w = f.values().to_vec();
        let i = bump % w.len();
        w[i] = Complex64::new(w[i].norm() + 1.0, 0.0);
        let g = SampledField::new(f.grid().clone(), w).unwrap();
        let e = LorentzExponent::new(p, s).unwrap();
        prop_assert!(lorentz_norm(&g, e) >= lorentz_norm(&f, e) * (1.0 - 1e-14));
    }

    #[test]
    fn dilation_scales_measure(v in values(), p in 0.5f64..8.0, s in 0.5f64..8.0, k in -6i32..6) {
        // same samples on a box 2^k times wider: every level set grows by 2^k
        let f = field_from(&v, 4.0);
        let g = field_from(&v, 4.0 * 2f64.powi(k));
        let e = LorentzExponent::new(p, s).unwrap();
        let ratio = lorentz_norm(&g, e) / lorentz_norm(&f, e);
        prop_assert!((ratio - 2f64.powf(k as f64 / p)).abs() <= 1e-12 * ratio);
    }

    #[test]
    fn indicator_closed_form(count in 1usize..200, p in 0.5f64..8.0, s in 0.5f64..8.0) {
        let mags = vec![1.0; count];
        let cells = vec![0.25; count];
        let m = 0.25 * count as f64;
        let got = weighted_lorentz_norm(&mags, &cells, LorentzExponent::new(p, s).unwrap()).unwrap();
        let exact = (p / s).powf(1.0 / s) * m.powf(1.0 / p);
        prop_assert!((got - exact).abs() <= 1e-12 * exact, "{} {}", got, exact);
    }

    #[test]
    fn exponent_identities_hold(d in 1u32..12, an in 1i64..1000, bn in 1i64..1000) {
        // a in (0, d), b in (0, a/2]
        let a = rat(an * d as i64, 1000);
        let b = &a * rat(bn, 2000);
        let pr = exponent_profile(d, a, b).unwrap();
        let r = verify_identities(&pr);
        prop_assert!(r.all(), "{:?}", r.named());
    }

    #[test]
    fn transform_bounded_and_hermitian(xi in -80.0f64..80.0, eta in -80.0f64..80.0) {
        let c = make_sphere_measure(2, 64).unwrap();
        let a = fourier_transform_at(&c, &[xi, eta, -xi, -eta]).unwrap();
        prop_assert!(a[0].norm() <= 1.0 + 1e-12);
        prop_assert!((a[0] - a[1].conj()).norm() < 1e-12);
        let k = make_cantor_measure(0.4, 6).unwrap();
        let shifted = k.translated(&[0.7]);
        let u = fourier_transform_at(&k, &[xi]).unwrap()[0];
        let v = fourier_transform_at(&shifted, &[xi]).unwrap()[0];
        let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 0.7 * xi);
        prop_assert!((v - u * phase).norm() < 1e-10);
    }
}

use restrict_core::field::GridSpec;
use restrict_core::phase::{Amplitude, PhaseSpec};
use restrict_lab::oscillatory::{l2_norm_t_lambda, required_y_spacing, scaling_experiment, ScalingOptions};

fn lambdas(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| (e as f64).exp2()).collect()
}

#[test]
fn zero_phase_ratios_do_not_move() {
    let spec = PhaseSpec::from_catalog("zero", 2, Amplitude::new(1.0).unwrap()).unwrap();
    let r = scaling_experiment(&spec, &ScalingOptions::new(lambdas(4, 10), 6.0)).unwrap();
    assert!(r.fit.slope.abs() < 0.05, "{:?}", r.fit);
    assert_eq!(r.lambdas.len(), 7);
    assert!(r.doubling_change().unwrap() < 0.01);
}

#[test]
fn oversized_lambdas_are_dropped() {
    let spec = PhaseSpec::from_catalog("parabola", 2, Amplitude::new(1.0).unwrap()).unwrap();
    let mut opts = ScalingOptions::new(lambdas(2, 8), 6.0);
    opts.max_x_points = 150 * 150;
    opts.doubling_check = false;
    let r = scaling_experiment(&spec, &opts).unwrap();
    assert_eq!(r.lambdas, lambdas(2, 6));
    assert_eq!(r.notes.len(), 2);
    opts.max_x_points = 40 * 40;
    assert!(scaling_experiment(&spec, &opts).is_err());
}

#[test]
fn non_geometric_lambdas_are_rejected() {
    let spec = PhaseSpec::from_catalog("parabola", 2, Amplitude::new(1.0).unwrap()).unwrap();
    assert!(scaling_experiment(&spec, &ScalingOptions::new(vec![16.0, 32.0, 64.0, 100.0], 6.0)).is_err());
    assert!(scaling_experiment(&spec, &ScalingOptions::new(vec![16.0, 32.0, 64.0], 6.0)).is_err());
}

#[test]
fn l2_norm_decreases_with_lambda() {
    let spec = PhaseSpec::from_catalog("parabola", 2, Amplitude::new(1.0).unwrap()).unwrap();
    let mut norms = Vec::new();
    for lambda in lambdas(3, 6) {
        let ny = ((2.0 / required_y_spacing(&spec, lambda)).ceil() as usize).next_multiple_of(2);
        let nx = ((2.0 * 4.0 * lambda / (2.0 * std::f64::consts::PI)).ceil() as usize).next_multiple_of(2).max(16);
        let y = GridSpec::new(vec![1.0], vec![ny]).unwrap();
        let x = GridSpec::isotropic(2, 1.0, nx).unwrap();
        norms.push(l2_norm_t_lambda(&spec, lambda, &y, &x, 0).unwrap());
    }
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
    // q = 2 rate is lambda^(-1/2) in the plane
    let fit = restrict_core::fit::loglog_fit(&lambdas(3, 6).into_iter().zip(norms.iter().copied()).collect::<Vec<_>>()).unwrap();
    assert!(fit.slope <= -0.4, "{fit:?}");
}

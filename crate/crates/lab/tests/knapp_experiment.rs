use restrict_lab::knapp::{knapp_sharpness_experiment, KnappOptions};

#[test]
fn slopes_separate_at_q_two() {
    let opts = KnappOptions::planar(2.0, vec![2.0, f64::INFINITY], vec![2, 3, 4, 5, 6]);
    let r = knapp_sharpness_experiment(&opts).unwrap();
    assert!((r.slope_g() - 0.5).abs() < 0.05);
    assert!((r.slope_f(2.0).unwrap() - 0.5).abs() < 0.1);
    assert!(r.slope_f(f64::INFINITY).unwrap() < 0.1);
    assert!(r.unbounded_witness(2.0, 0.3).iter().all(|w| w.1));
    assert!(r.ladder_spread() < 10.0, "{:?}", r.ladder);
}

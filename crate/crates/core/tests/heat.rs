use sns_core::curve::Curve;
use sns_core::heat::{
    admissible_q_range, duhamel_phase_integrals, heat_decomposition, heat_residual_check,
    lq_decay_fit, HeatError, QuadratureSettings, SpaceTimeBump,
};
use sns_core::lattice::FourierLattice;
use sns_core::pm_norms::{lq_norm, pm_norm};
use sns_core::spectral::inverse_transform;

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

#[test]
fn moving_source_solves_the_heat_equation_off_the_curve() {
    let lat = FourierLattice::new(32, 12.0).unwrap();
    let curve = Curve::power([1.0, 0.0, 0.0], 0.75).unwrap();
    let bump = SpaceTimeBump {
        center: [-1.5, 1.0, 0.0],
        radius: 1.0,
        t_center: 0.6,
        t_radius: 0.3,
    };
    let r = heat_residual_check(&curve, &bump, &lat, 64, settings()).unwrap();
    assert!(r.relative < 1e-3, "{r:?}");
}

#[test]
fn exponent_window_follows_the_holder_exponent() {
    assert_eq!(admissible_q_range(0.75), (3.0, 6.0));
    assert_eq!(admissible_q_range(1.0).1, f64::INFINITY);
    let curve = Curve::power([1.0, 0.0, 0.0], 0.75).unwrap();
    let err = lq_decay_fit(&curve, 6.5, &[0.01, 0.1], 8, 8.0, settings()).unwrap_err();
    assert!(matches!(err, HeatError::ExponentOutOfRange { .. }));
}

#[test]
fn remainder_is_small_and_stable_under_refinement() {
    let curve = Curve::power([0.0, 1.0, 0.0], 0.8).unwrap();
    let t = 0.3;
    let coarse = heat_decomposition(
        &curve,
        t,
        &FourierLattice::new(16, 8.0).unwrap(),
        settings(),
    )
    .unwrap();
    let fine = heat_decomposition(
        &curve,
        t,
        &FourierLattice::new(32, 8.0).unwrap(),
        settings(),
    )
    .unwrap();
    let a = lq_norm(&inverse_transform(&coarse.omega0).unwrap(), 4.0);
    let b = lq_norm(&inverse_transform(&fine.omega0).unwrap(), 4.0);
    assert!((a - b).abs() <= 0.1 * b, "{a} vs {b}");
    assert!(pm_norm(&fine.omega0, 2.0) <= 2.0);
}

#[test]
fn node_values_share_one_quadrature() {
    let lat = FourierLattice::new(8, 6.0).unwrap();
    let curve = Curve::linear([0.0; 3], [0.0, 0.0, 2.0]).unwrap();
    let times = [0.0, 0.1, 0.2, 0.4];
    let (vals, stats) = duhamel_phase_integrals(&curve, &lat, &times, settings()).unwrap();
    assert_eq!(vals.len(), times.len());
    assert!(vals[0].iter().all(|z| z.norm() == 0.0));
    assert!(stats.classes > 0);
    for (k, &t) in times.iter().enumerate().skip(1) {
        let single = heat_decomposition(&curve, t, &lat, settings()).unwrap();
        for idx in 0..lat.len() {
            if lat.is_nyquist(idx) {
                continue;
            }
            assert!((vals[k][idx] - single.u.component(0)[idx]).norm() <= 1e-12);
        }
    }
}

#[test]
fn nonpositive_times_are_rejected() {
    let lat = FourierLattice::new(8, 6.0).unwrap();
    for t in [0.0, -1.0, f64::NAN] {
        assert!(matches!(
            heat_decomposition(&Curve::origin(), t, &lat, settings()),
            Err(HeatError::InvalidTime(_))
        ));
    }
}

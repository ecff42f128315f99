use std::f64::consts::PI;

use sns_core::landau::{
    kappa, pm2_norm_bound_check, resolved_band, LandauError, LandauSolution, LinearWeighted,
    ProductBump, RadialBump, TestFunction, KAPPA_SERIES_SWITCH,
};
use sns_core::lattice::FourierLattice;
use sns_core::pm_norms::pm_norm_in_shell;

/// Reference values from a 60-digit evaluation of the closed form.
const ORACLES: [(f64, &str); 9] = [
    (
        2.0,
        "34.7668403187857356341688132560738371135768601338493867535464",
    ),
    (
        3.0,
        "19.1429900991690679578584287905439573066634599384173127831396",
    ),
    (
        5.0,
        "10.5288053192179895057746596941747928805952609270609582310576",
    ),
    (
        8.0,
        "6.39630598213721784343335730829376694124944887329066197308944",
    ),
    (
        10.0,
        "5.08412039777744120365152962717266655284721071295958066602429",
    ),
    (
        16.0,
        "3.15555804358206031565202677102814653972081684944763510168035",
    ),
    (1.001, "33385.957816606207582"),
    (1500.0, "0.0335103385175721295363175426"),
    (1e4, "0.00502654830271121656503375"),
];

#[test]
fn kappa_matches_high_precision_values() {
    for (c, s) in ORACLES {
        let exact: f64 = s.parse().unwrap();
        let got = kappa(c).unwrap();
        assert!(
            (got - exact).abs() <= 1e-12 * exact,
            "c = {c}: {got} vs {exact}"
        );
    }
}

#[test]
fn kappa_tends_to_the_stokeslet_flux() {
    for c in [1e3, 1e5, 1e8] {
        let scaled = c * kappa(c).unwrap();
        assert!(
            (scaled - 16.0 * PI).abs() <= 16.0 * PI * 2.0 / c,
            "c = {c}: {scaled}"
        );
    }
    let below = kappa(KAPPA_SERIES_SWITCH * (1.0 - 1e-12)).unwrap();
    let above = kappa(KAPPA_SERIES_SWITCH * (1.0 + 1e-12)).unwrap();
    assert!((below - above).abs() <= 1e-11 * below);
}

#[test]
fn parameters_in_the_closed_interval_are_rejected() {
    for c in [-1.0, -0.3, 0.0, 0.7, 1.0, f64::NAN, f64::INFINITY] {
        assert!(
            matches!(kappa(c), Err(LandauError::DomainError(_))),
            "c = {c}"
        );
    }
    let sol = LandauSolution::new(2.0).unwrap();
    assert!(matches!(
        sol.velocity([0.0; 3]),
        Err(LandauError::OriginEvaluation)
    ));
}

#[test]
fn large_parameter_field_approaches_the_stokeslet() {
    // For |c| → ∞, c V^c tends to 2(e₁ + x₁x/|x|²)/|x|, the Stokeslet of the force 16π e₁ divided by 8π.
    let c = 1e6;
    let sol = LandauSolution::new(c).unwrap();
    let x = [0.3, -0.4, 1.2];
    let r2: f64 = x.iter().map(|a| a * a).sum();
    let r = r2.sqrt();
    let v = sol.velocity(x).unwrap();
    for i in 0..3 {
        let delta = if i == 0 { 1.0 } else { 0.0 };
        let stokes = 2.0 * (delta + x[0] * x[i] / r2) / r;
        assert!(
            (c * v[i] - stokes).abs() <= 1e-5 * stokes.abs().max(1.0),
            "component {i}"
        );
    }
}

#[test]
fn residual_converges_at_second_order() {
    let sol = LandauSolution::new(-4.0).unwrap();
    let x = [0.7, 0.2, -1.1];
    let r = 1.32;
    let coarse = sol.stationary_residual(x, 4e-3 * r).unwrap().relative();
    let fine = sol.stationary_residual(x, 2e-3 * r).unwrap().relative();
    let order = (coarse / fine).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
    assert!(fine < 1e-5);
}

#[test]
fn weak_form_holds_for_test_functions_vanishing_at_the_origin() {
    let sol = LandauSolution::new(3.0).unwrap();
    let phi = LinearWeighted {
        weight: [1.0, -0.5, 0.25],
        inner: RadialBump {
            center: [0.1, 0.0, 0.0],
            radius: 1.2,
            amplitude: 1.0,
        },
    };
    let scale = sol.kappa() * phi.support_radius();
    for k in 1..=3 {
        let p = sol.weak_pairing(&phi, k).unwrap();
        assert_eq!(p.target, 0.0);
        assert!(p.value.abs() <= 1e-3 * scale, "k = {k}: {}", p.value);
    }
}

#[test]
fn pairing_detects_the_point_force() {
    let sol = LandauSolution::new(5.0).unwrap();
    let phi = ProductBump {
        center: [0.0, 0.0, 0.0],
        half_widths: [0.5, 0.5, 0.5],
    };
    let p = sol.weak_pairing(&phi, 1).unwrap();
    assert!((p.value - p.target).abs() <= 0.02 * p.target.abs());
    assert!(p.quadrature_error_estimate <= 0.01 * p.target.abs());
}

#[test]
fn derivative_envelope_is_bounded_by_a_constant() {
    let sol = LandauSolution::new(6.0).unwrap();
    let points: Vec<[f64; 3]> = (0..30)
        .map(|i| {
            let r = 0.1 * 1.2f64.powi(i);
            let th = 0.37 * i as f64;
            [r * th.cos(), r * th.sin() * 0.6, r * th.sin() * 0.8]
        })
        .collect();
    let zeroth = sol.derivative_envelope_check([0, 0, 0], &points).unwrap();
    let first = sol.derivative_envelope_check([1, 0, 0], &points).unwrap();
    let second = sol.derivative_envelope_check([0, 1, 1], &points).unwrap();
    for v in [zeroth, first, second] {
        assert!(v.is_finite() && v > 0.0);
    }
    // Homogeneity makes the envelope scale invariant: repeating the points at ten times the radius gives the same value.
    let far: Vec<[f64; 3]> = points
        .iter()
        .map(|p| [10.0 * p[0], 10.0 * p[1], 10.0 * p[2]])
        .collect();
    let again = sol.derivative_envelope_check([1, 0, 0], &far).unwrap();
    assert!((again - first).abs() <= 1e-3 * first);
}

#[test]
fn sampled_spectrum_follows_the_inverse_square_law_in_band() {
    let lat = FourierLattice::new(64, 32.0).unwrap();
    let sol = LandauSolution::new(16.0).unwrap();
    let v = sol.sampled_spectrum(lat);
    assert!(v.hermitian_defect() <= 1e-10);
    let (lo, hi) = resolved_band(&lat);
    assert!(lo < hi);
    let norm = pm_norm_in_shell(&v, 2.0, lo, hi);
    // Close to the large-c value 16π/c of the Stokeslet spectrum.
    let stokes = 16.0 * PI / 16.0;
    assert!((norm - stokes).abs() <= 0.25 * stokes, "{norm} vs {stokes}");
}

#[test]
fn pm2_sweep_needs_valid_input() {
    let coarse = FourierLattice::new(32, 16.0).unwrap();
    assert!(matches!(
        pm2_norm_bound_check(&[8.0, 16.0], coarse),
        Err(LandauError::InvalidArgument(_))
    ));
    let lat = FourierLattice::new(64, 32.0).unwrap();
    assert!(matches!(
        pm2_norm_bound_check(&[4.0], lat),
        Err(LandauError::InvalidArgument(_))
    ));
    assert!(matches!(
        pm2_norm_bound_check(&[1.5, 8.0], lat),
        Err(LandauError::DomainError(_))
    ));
    let sweep = pm2_norm_bound_check(&[8.0, 16.0, 32.0], lat).unwrap();
    assert!((sweep.slope + 1.0).abs() < 0.15, "{}", sweep.slope);
}

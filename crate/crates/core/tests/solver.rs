use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use sns_core::curve::Curve;
use sns_core::lattice::FourierLattice;
use sns_core::ns_solver::{
    mild_residual_check, picard_solve, picard_solve_converged, polish_stationary, pressure_recover,
    pressure_recover_regular, translate, InitialIterate, Mode, PressurePart, SolverConfig,
    SolverError, Trajectory,
};
use sns_core::pm_norms::{pm_norm, random_pm_field, weak_lp_norm};
use sns_core::spectral::{inverse_transform, leray_project, relative_divergence, SpectralField};

fn lattice() -> FourierLattice {
    FourierLattice::new(16, 8.0).unwrap()
}

fn small(kappa: f64, curve: Curve) -> SolverConfig {
    let mut cfg = SolverConfig::full_u(kappa, curve)
        .with_lattice(lattice())
        .with_time_grid(0.25, 8);
    cfg.eta_trials = 3;
    cfg
}

fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.fields
        .iter()
        .zip(&b.fields)
        .map(|(x, y)| {
            let mut d = x.clone();
            d.add_scaled(y, -1.0).unwrap();
            pm_norm(&d, 2.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn converged_iterates_are_solenoidal_and_real() {
    let sol =
        picard_solve_converged(&small(2.0, Curve::power([1.0, 0.0, 0.0], 0.8).unwrap())).unwrap();
    for row in &sol.report.rows {
        assert!(
            row.divergence_max <= 1e-13,
            "iteration {}: {}",
            row.iter,
            row.divergence_max
        );
    }
    for k in 0..sol.len() {
        let u = sol.velocity(k);
        assert!(relative_divergence(&u) <= 1e-13);
        assert!(u.hermitian_defect() <= 1e-12);
    }
    let last = sol.report.rows.last().unwrap();
    assert!(last.norm_pm2 <= 4.0 * 2.0);
}

#[test]
fn fixed_point_is_independent_of_the_starting_iterate() {
    let curve = Curve::linear([0.0; 3], [0.5, -0.5, 0.0]).unwrap();
    let mut a = small(3.0, curve.clone());
    a.initial = InitialIterate::Zero;
    let mut b = small(3.0, curve);
    b.initial = InitialIterate::Forcing;
    let ua = picard_solve_converged(&a).unwrap();
    let ub = picard_solve_converged(&b).unwrap();
    assert!(sup_distance(&ua.trajectory(), &ub.trajectory()) <= 10.0 * a.tol);
}

#[test]
fn increments_contract_geometrically() {
    let sol = picard_solve_converged(&small(4.0, Curve::origin())).unwrap();
    let rows = &sol.report.rows;
    assert!(rows.len() >= 4);
    for r in &rows[2..] {
        let ratio = r.ratio.unwrap();
        assert!(ratio < 0.5, "iteration {}: ratio {ratio}", r.iter);
    }
}

#[test]
fn exhausting_the_iteration_budget_is_reported() {
    let mut cfg = small(4.0, Curve::origin());
    cfg.max_iter = 2;
    let sol = picard_solve(&cfg).unwrap();
    assert!(!sol.report.converged);
    assert_eq!(sol.report.rows.len(), 2);
    assert!(matches!(
        picard_solve_converged(&cfg),
        Err(SolverError::NotConverged { iterations: 2, .. })
    ));
}

#[test]
fn large_kappa_violates_smallness_unless_overridden() {
    let mut cfg = small(1e5, Curve::origin());
    cfg.max_iter = 1;
    assert!(matches!(
        picard_solve(&cfg),
        Err(SolverError::SmallnessViolated(_))
    ));
    cfg.override_smallness = true;
    match picard_solve(&cfg) {
        Ok(sol) => assert!(sol.report.smallness.overridden),
        Err(SolverError::DivergedIterate { .. }) => {}
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn mild_residual_vanishes_for_the_trivial_solution() {
    let lat = lattice();
    let times: Vec<f64> = (0..5).map(|k| 0.1 * k as f64).collect();
    let traj = Trajectory {
        fields: vec![SpectralField::zeros(lat, 3); times.len()],
        times,
    };
    let r = mild_residual_check(&traj, 0.0, &Curve::origin()).unwrap();
    assert_eq!(r.late_max, 0.0);
    assert!(r.per_node.iter().all(|&x| x == 0.0));
}

#[test]
fn mild_residual_rejects_nonuniform_grids() {
    let lat = lattice();
    let traj = Trajectory {
        times: vec![0.0, 0.1, 0.3, 0.4],
        fields: vec![SpectralField::zeros(lat, 3); 4],
    };
    assert!(matches!(
        mild_residual_check(&traj, 1.0, &Curve::origin()),
        Err(SolverError::InvalidConfig(_))
    ));
}

#[test]
fn converged_run_satisfies_the_mild_equation() {
    // The check's own central-difference error at the window start is Δt²/6 · 4/(e t)², about 1.4e-3 at 32 steps.
    let mut cfg = small(2.0, Curve::origin());
    cfg.steps = 64;
    let sol = picard_solve_converged(&cfg).unwrap();
    let r = mild_residual_check(&sol.velocity_trajectory(), 2.0, &Curve::origin()).unwrap();
    assert!(r.late_max <= 1e-3, "{}", r.late_max);
}

#[test]
fn remainder_mode_reproduces_full_mode() {
    let curve = Curve::linear([0.0; 3], [0.0, 1.0, 0.0]).unwrap();
    let mut om_cfg = SolverConfig::remainder(16.0, curve.clone())
        .unwrap()
        .with_lattice(lattice())
        .with_time_grid(0.25, 8);
    om_cfg.eta_trials = 3;
    let om = picard_solve_converged(&om_cfg).unwrap();
    assert_eq!(om.mode, Mode::RemainderOmega);
    let u = picard_solve_converged(&small(om.kappa, curve)).unwrap();
    let dist = sup_distance(&om.velocity_trajectory(), &u.velocity_trajectory());
    assert!(dist <= 10.0 * om_cfg.tol, "{dist}");
    let lam = om.report.smallness.lambda_hat.unwrap();
    assert!(lam > 0.0 && lam < 1.0);
    assert!(om.report.rows.last().unwrap().norm_pm2 <= om.report.smallness.bound);
}

#[test]
fn polished_profile_solves_the_lattice_equation() {
    let v = polish_stationary(8.0, lattice()).unwrap();
    assert!(v.last_change <= 1e-13);
    assert!(v.departure < 1.0);
    assert!(relative_divergence(&v.v_hat) <= 1e-13);
}

#[test]
fn regular_pressure_is_full_minus_stationary() {
    let lat = lattice();
    let curve = Curve::linear([0.0; 3], [1.0, 0.5, 0.0]).unwrap();
    let t = 0.2;
    let v = polish_stationary(16.0, lat).unwrap();
    let omega = leray_project(&random_pm_field(
        lat,
        3,
        2.0,
        1.0,
        true,
        &mut ChaCha8Rng::seed_from_u64(5),
    ))
    .unwrap();
    let v_gamma = translate(&v.v_hat, &curve, t);
    let mut u = omega.clone();
    u.add_scaled(&v_gamma, 1.0).unwrap();
    let mut diff = pressure_recover(&u, v.kappa, &curve, t).unwrap().p_hat;
    diff.add_scaled(
        &pressure_recover(&v_gamma, v.kappa, &curve, t)
            .unwrap()
            .p_hat,
        -1.0,
    )
    .unwrap();
    let regular = pressure_recover_regular(&omega, &v.v_hat, &curve, t).unwrap();
    assert_eq!(regular.part, PressurePart::Regular);
    let mut err = regular.p_hat.clone();
    err.add_scaled(&diff, -1.0).unwrap();
    assert!(err.max_abs() <= 1e-12 * diff.max_abs());
}

#[test]
fn dipole_pressure_matches_the_physical_formula() {
    // The truncated dipole rings at the grid scale, so both sides are mollified by a Gaussian of width σ.
    let lat = FourierLattice::new(48, 24.0).unwrap();
    let kappa = 1.5;
    let sigma = 2.0 * lat.spacing();
    let mut p = pressure_recover(&SpectralField::zeros(lat, 3), kappa, &Curve::origin(), 0.0)
        .unwrap()
        .p_hat;
    for idx in 0..lat.len() {
        p.component_mut(0)[idx] *= (-0.5 * sigma * sigma * lat.xi_sq(idx)).exp();
    }
    let phys = inverse_transform(&p).unwrap();
    let c3 = -1.0 / (4.0 * std::f64::consts::PI);
    for x1 in [-4.0, -3.0, -1.5, 1.0, 2.0, 4.0] {
        let h = lat.spacing();
        let i = (lat.n() as f64 / 2.0 + x1 / h).round() as usize;
        let mid = lat.n() / 2;
        let got = phys.component(0)[lat.flat(i, mid, mid)];
        let r: f64 = x1.abs();
        let s = r / (std::f64::consts::SQRT_2 * sigma);
        // Radial derivative of erf(s)/r relative to that of 1/r.
        let shape = erf(s) - 2.0 * s * (-s * s).exp() / std::f64::consts::PI.sqrt();
        let exact = -kappa * c3 * x1 / r.powi(3) * shape;
        assert!(
            (got - exact).abs() <= 0.05 * exact.abs(),
            "x1 = {x1}: {got} vs {exact}"
        );
    }
    let w = weak_lp_norm(
        &inverse_transform(
            &pressure_recover(&SpectralField::zeros(lat, 3), kappa, &Curve::origin(), 0.0)
                .unwrap()
                .p_hat,
        )
        .unwrap(),
        1.5,
    );
    assert!(w.is_finite() && w > 0.0);
}

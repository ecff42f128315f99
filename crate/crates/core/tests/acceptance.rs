//! Acceptance criteria 1 to 10, one pass/fail line each.
//!
//! Runs as a plain binary so the lines reach the terminal uncaptured; the
//! process fails if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sns_core::cli::run::{
    decay_fit_times, pairing_test_functions, residual_sweep_points, SWEEP_STEP,
};
use sns_core::curve::Curve;
use sns_core::heat::{heat_fourier_solution, lq_decay_fit, omega0, QuadratureSettings};
use sns_core::landau::{kappa, pm2_norm_bound_check, LandauSolution, TestFunction};
use sns_core::lattice::FourierLattice;
use sns_core::ns_solver::{
    measure_eta, mild_residual_check, picard_solve, uniform_times, SolverConfig,
};
use sns_core::pm_norms::{
    certification_suite, certify_gradient_embedding, certify_interpolation, certify_product,
    certify_tensor, certify_weak_l3, pm_norm, random_pm_field, InequalityReport, Lemma,
};
use sns_core::spectral::{inverse_transform, SpectralField};

/// κ(2) to 60 digits, evaluated independently with arbitrary-precision arithmetic.
const KAPPA_2: &str = "34.7668403187857356341688132560738371135768601338493867535464";
/// 10⁶·κ(10⁶) from the same evaluation.
const C_KAPPA_1E6: &str = "50.2654824574936593621874488897229038522878358538479397737226";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let oracle: f64 = KAPPA_2.parse().unwrap();
    let rel = (kappa(2.0).unwrap() - oracle).abs() / oracle;
    let samples: Vec<f64> = (-30..=60)
        .map(|k| 1.0 + 10f64.powf(k as f64 / 10.0))
        .collect();
    let values: Vec<f64> = samples.iter().map(|&c| kappa(c).unwrap()).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let odd = samples
        .iter()
        .zip(&values)
        .map(|(&c, &k)| (kappa(-c).unwrap() + k).abs() / k.abs())
        .fold(0.0, f64::max);
    let large = (1e6 * kappa(1e6).unwrap() - C_KAPPA_1E6.parse::<f64>().unwrap()).abs();
    outcome(
        rel <= 1e-12 && decreasing && odd <= 1e-13 && large <= 1e-4,
        format!("kappa(2) rel err {rel:.2e}, decreasing {decreasing}, oddness {odd:.1e}, |c kappa - 16pi| at 1e6 {large:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_order: f64 = 0.0;
    for c in [2.0, 3.0, 5.0] {
        let sol = LandauSolution::new(c).unwrap();
        for x in residual_sweep_points(20, 2) {
            let h = SWEEP_STEP * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let fine = sol.stationary_residual(x, h).unwrap();
            let coarse = sol.stationary_residual(x, 2.0 * h).unwrap();
            worst_rel = worst_rel.max(fine.relative());
            worst_order =
                worst_order.max(((coarse.relative() / fine.relative()).log2() - 2.0).abs());
        }
    }
    outcome(
        worst_rel <= 1e-5 && worst_order <= 0.2,
        format!("max relative residual {worst_rel:.2e}, max |order - 2| {worst_order:.3}"),
    )
}

fn criterion_3() -> Outcome {
    let (radial, product) = pairing_test_functions();
    let tests: [&dyn TestFunction; 2] = [&radial, &product];
    let mut worst: f64 = 0.0;
    for c in [2.0, 3.0, 5.0, 10.0] {
        let sol = LandauSolution::new(c).unwrap();
        for phi in tests {
            let scale = (sol.kappa() * phi.value([0.0; 3])).abs();
            for k in 1..=3 {
                match sol.weak_pairing(phi, k) {
                    Ok(p) => worst = worst.max((p.value - p.target).abs() / scale),
                    Err(e) => return outcome(false, format!("c = {c}, k = {k}: {e}")),
                }
            }
        }
    }
    outcome(
        worst <= 0.02,
        format!("max |pairing - kappa phi(0) delta_k1| / |kappa phi(0)| = {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let lat = FourierLattice::new(128, 64.0).unwrap();
    match pm2_norm_bound_check(&[4.0, 8.0, 16.0, 32.0, 64.0], lat) {
        Ok(sweep) => outcome(
            (sweep.slope + 1.0).abs() <= 0.1,
            format!("slope {:.4}, K = {:.3}", sweep.slope, sweep.k_hat),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_5() -> Outcome {
    let lat = FourierLattice::new(32, 16.0).unwrap();
    let settings = QuadratureSettings::default();
    let origin = Curve::origin();
    let v = [1.0, 0.5, -0.25];
    let linear = Curve::linear([0.0; 3], v).unwrap();
    let power = Curve::power([1.0, 0.0, 0.0], 0.8).unwrap();
    let mut rest_err: f64 = 0.0;
    let mut linear_err: f64 = 0.0;
    let mut envelope: f64 = 0.0;
    let mut pm2: f64 = 0.0;
    for t in [0.01, 0.05, 0.25, 1.0] {
        let u0 = heat_fourier_solution(&origin, t, &lat, settings).unwrap();
        let ul = heat_fourier_solution(&linear, t, &lat, settings).unwrap();
        let up = heat_fourier_solution(&power, t, &lat, settings).unwrap();
        for idx in 0..lat.len() {
            let lam = lat.xi_sq(idx);
            if lam == 0.0 || lat.is_nyquist(idx) {
                continue;
            }
            let env = -(-t * lam).exp_m1() / lam;
            rest_err = rest_err.max((u0.component(0)[idx] - env).norm() / env);
            let xi = lat.xi(idx);
            let w = v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2];
            let exact =
                (Complex64::from_polar(1.0, -w * t) - (-t * lam).exp()) / Complex64::new(lam, -w);
            linear_err = linear_err.max((ul.component(0)[idx] - exact).norm() / env);
            envelope = envelope.max(up.component(0)[idx].norm() / env);
        }
        pm2 = pm2.max(pm_norm(&omega0(&power, t, &lat, settings).unwrap(), 2.0));
    }
    let fit = lq_decay_fit(&power, 4.0, &decay_fit_times(), 32, 16.0, settings).unwrap();
    outcome(
        rest_err <= 1e-12 && linear_err <= 1e-10 && envelope <= 1.0 + 1e-12 && pm2 <= 2.0 && fit.slope <= -0.025,
        format!(
            "rest {rest_err:.1e}, linear {linear_err:.1e}, envelope ratio {envelope:.6}, max PM2(omega0) {pm2:.4}, L4 slope {:.4}",
            fit.slope
        ),
    )
}

fn criterion_6() -> Outcome {
    const STEPS: usize = 16;
    let curves = [
        Curve::origin(),
        Curve::linear([0.0; 3], [1.0, 0.0, 0.0]).unwrap(),
        Curve::power([1.0, 0.0, 0.0], 0.8).unwrap(),
    ];
    let mut pass = true;
    let mut worst_iter = 0;
    let mut worst_ratio: f64 = 0.0;
    for (n, l) in [(64, 32.0), (96, 48.0)] {
        let lat = FourierLattice::new(n, l).unwrap();
        let eta = measure_eta(lat, &uniform_times(0.5, STEPS), 2.0, 8, 0).unwrap();
        let threshold = 1.0 / (8.0 * eta.eta);
        for curve in &curves {
            for f in [0.25, 0.5] {
                let kappa = f * threshold;
                let mut cfg = SolverConfig::full_u(kappa, curve.clone())
                    .with_lattice(lat)
                    .with_time_grid(0.5, STEPS);
                cfg.eta = Some(eta.clone());
                let sol = match picard_solve(&cfg) {
                    Ok(s) => s,
                    Err(e) => return outcome(false, format!("N = {n}: {e}")),
                };
                let rows = &sol.report.rows;
                let norm = rows.last().unwrap().norm_pm2;
                worst_iter = worst_iter.max(rows.len());
                worst_ratio = worst_ratio.max(norm / (4.0 * kappa));
                pass &= sol.report.converged && rows.len() <= 30 && norm <= 4.0 * kappa;
            }
        }
    }
    outcome(
        pass,
        format!("max iterations {worst_iter}, max |||u|||_2 / 4|kappa| = {worst_ratio:.4} ({STEPS} steps)"),
    )
}

fn criterion_7() -> Outcome {
    let omega_cfg = SolverConfig::remainder(16.0, Curve::origin()).unwrap();
    let tol = omega_cfg.tol;
    let om = match picard_solve(&omega_cfg) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let u = match picard_solve(&SolverConfig::full_u(om.kappa, Curve::origin())) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut dist: f64 = 0.0;
    for k in 0..u.len() {
        let mut d = om.velocity(k);
        d.add_scaled(&u.velocity(k), -1.0).unwrap();
        dist = dist.max(pm_norm(&d, 2.0));
    }
    outcome(
        om.report.converged && u.report.converged && dist <= 10.0 * tol,
        format!("sup_t PM2 distance {dist:.2e} (limit {:.0e})", 10.0 * tol),
    )
}

fn criterion_8() -> Outcome {
    let lat = FourierLattice::new(32, 16.0).unwrap();
    let mut residuals = Vec::new();
    let mut kappa = 0.0;
    for steps in [16, 32, 64] {
        if kappa == 0.0 {
            let eta = measure_eta(lat, &uniform_times(0.5, steps), 2.0, 8, 0).unwrap();
            kappa = 0.25 / (8.0 * eta.eta);
        }
        let cfg = SolverConfig::full_u(kappa, Curve::origin())
            .with_lattice(lat)
            .with_time_grid(0.5, steps);
        let sol = picard_solve(&cfg).unwrap();
        let m = mild_residual_check(&sol.velocity_trajectory(), kappa, &Curve::origin()).unwrap();
        residuals.push(m.late_max);
    }
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let pinned = *residuals.last().unwrap();
    outcome(
        ratios.iter().all(|r| (r - 4.0).abs() <= 1.0) && pinned <= 1e-3,
        format!(
            "residual / |kappa| {:?}, ratios {:?}",
            residuals
                .iter()
                .map(|r| format!("{r:.3e}"))
                .collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

/// Same coefficients on a box twice as large: the field `f(x/2)`.
fn dilate(v: &SpectralField) -> SpectralField {
    let lat = v.lattice();
    let big = FourierLattice::new(lat.n(), 2.0 * lat.box_length()).unwrap();
    let comps = v
        .components()
        .iter()
        .map(|c| c.iter().map(|z| z * 8.0).collect())
        .collect();
    SpectralField::from_components(big, comps).unwrap()
}

fn dilation_ratios(lemma: Lemma, lat: FourierLattice, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let report = |u: &SpectralField, v: &SpectralField| -> InequalityReport {
        match lemma {
            Lemma::Product => certify_product(u, v, 2.0, 2.0).unwrap(),
            Lemma::Interpolation => certify_interpolation(u, 2.0, 2.5, 4.0).unwrap(),
            Lemma::Gradient => certify_gradient_embedding(u, 2.9).unwrap(),
            Lemma::WeakL3 => certify_weak_l3(u).unwrap(),
            Lemma::Tensor => certify_tensor(&inverse_transform(u).unwrap(), 4.0).unwrap(),
        }
    };
    let nc = if matches!(lemma, Lemma::Product | Lemma::Interpolation) {
        1
    } else {
        3
    };
    let band = lemma == Lemma::Product;
    let u = random_pm_field(lat, nc, 2.0, 1.0, band, rng);
    let v = random_pm_field(lat, nc, 2.0, 1.0, band, rng);
    (report(&u, &v).ratio, report(&dilate(&u), &dilate(&v)).ratio)
}

fn criterion_9() -> Outcome {
    let lat = FourierLattice::new(32, 16.0).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for lemma in Lemma::ALL {
        let rows = certification_suite(lemma, 100, 9, lat).unwrap();
        let finite = rows.iter().all(|r| r.report.ratio.is_finite());
        let bounded = rows.iter().all(|r| r.report.pass);
        let worst = rows
            .iter()
            .map(|r| {
                r.report.ratio
                    / if r.report.bound.is_finite() {
                        r.report.bound / 1.05
                    } else {
                        1.0
                    }
            })
            .fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut drift: f64 = 0.0;
        for _ in 0..10 {
            let (a, b) = dilation_ratios(lemma, lat, &mut rng);
            drift = drift.max((a / b - 1.0).abs());
        }
        pass &= finite && bounded && drift <= 0.02;
        notes.push(format!(
            "{} max {worst:.4} dilation {drift:.1e}",
            lemma.name()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn sns(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_sns"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "sns {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn criterion_10() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["landau", "--c", "3", "--kappa"],
        &[
            "landau",
            "--c",
            "2",
            "--residual-sweep",
            "--points",
            "5",
            "--seed",
            "4",
        ],
        &[
            "certify", "--lemma", "weak-l3", "--trials", "6", "--seed", "11", "--N", "16", "--L",
            "8",
        ],
        &["heat", "--t", "0.1,0.4", "--N", "16", "--L", "8"],
        &[
            "solve", "--kappa", "1", "--N", "16", "--L", "8", "--steps", "8", "--T", "0.25",
        ],
        &[
            "solve", "--mode", "omega", "--c", "16", "--curve", "linear", "--N", "16", "--L", "8",
            "--steps", "8",
        ],
    ];
    for args in runs {
        let first = sns(args);
        if first.is_empty() || first != sns(args) {
            return outcome(false, format!("output of {args:?} differs between runs"));
        }
    }
    outcome(
        true,
        format!(
            "{} configurations byte-identical across repeats",
            runs.len()
        ),
    )
}

fn main() {
    let criteria: [(fn() -> Outcome, Duration); 10] = [
        (criterion_1, Duration::from_secs(1)),
        (criterion_2, Duration::from_secs(10)),
        (criterion_3, Duration::from_secs(120)),
        (criterion_4, Duration::from_secs(300)),
        (criterion_5, Duration::from_secs(300)),
        (criterion_6, Duration::from_secs(1200)),
        (criterion_7, Duration::from_secs(1200)),
        (criterion_8, Duration::from_secs(600)),
        (criterion_9, Duration::from_secs(600)),
        (criterion_10, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let time_note = if elapsed > *budget {
            " over budget"
        } else {
            ""
        };
        println!(
            "criterion {:>2}: {status} [{:.1} s{time_note}] {}",
            i + 1,
            elapsed.as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

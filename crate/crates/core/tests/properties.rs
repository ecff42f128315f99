use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sns_core::cli::config::{merge, parse_argv};
use sns_core::cli::parse_config_text;
use sns_core::curve::Curve;
use sns_core::dump;
use sns_core::landau::{kappa, LandauSolution};
use sns_core::lattice::FourierLattice;
use sns_core::pm_norms::{pm_norm, random_pm_field};
use sns_core::spectral::{dealiased_product, divergence, leray_project, SpectralField};

fn field(n: usize, l: f64, nc: usize, seed: u64, a: f64) -> SpectralField {
    let lat = FourierLattice::new(n, l).unwrap();
    random_pm_field(lat, nc, a, 0.5, false, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    (0.05f64..20.0, -1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, mu, az)| {
        let s = (1.0 - mu * mu).sqrt();
        [r * mu, r * s * az.cos(), r * s * az.sin()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_is_odd(c in 1.0001f64..1e7) {
        let k = kappa(c).unwrap();
        prop_assert!((kappa(-c).unwrap() + k).abs() <= 1e-13 * k.abs());
    }

    #[test]
    fn kappa_decreases(c in 1.0001f64..1e6, factor in 1.0001f64..10.0) {
        prop_assert!(kappa(c * factor).unwrap() < kappa(c).unwrap());
    }

    #[test]
    fn landau_fields_are_homogeneous(c in prop_oneof![1.01f64..50.0, -50.0f64..-1.01], x in point(), lambda in 0.1f64..10.0) {
        let sol = LandauSolution::new(c).unwrap();
        let v = sol.velocity(x).unwrap();
        let q = sol.pressure(x).unwrap();
        let y = [lambda * x[0], lambda * x[1], lambda * x[2]];
        let vy = sol.velocity(y).unwrap();
        let scale = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        for i in 0..3 {
            prop_assert!((vy[i] * lambda - v[i]).abs() <= 1e-12 * scale);
        }
        prop_assert!((sol.pressure(y).unwrap() * lambda * lambda - q).abs() <= 1e-12 * q.abs().max(scale * scale));
    }

    #[test]
    fn landau_velocity_is_axisymmetric(c in 1.5f64..20.0, x in point(), phi in 0.0f64..std::f64::consts::TAU) {
        let sol = LandauSolution::new(c).unwrap();
        let (s, co) = phi.sin_cos();
        let rotated = [x[0], co * x[1] - s * x[2], s * x[1] + co * x[2]];
        let v = sol.velocity(x).unwrap();
        let w = sol.velocity(rotated).unwrap();
        let expect = [v[0], co * v[1] - s * v[2], s * v[1] + co * v[2]];
        for i in 0..3 {
            prop_assert!((w[i] - expect[i]).abs() <= 1e-11 * (1.0 + v[i].abs()));
        }
    }

    #[test]
    fn dump_round_trips(seed in any::<u64>(), n in prop::sample::select(vec![2usize, 4, 6]), nc in prop::sample::select(vec![1usize, 3, 9]), l in 0.1f64..100.0) {
        let f = field(n, l, nc, seed, 1.0);
        let bytes = dump::encode(&f);
        let g = dump::decode(&bytes).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(dump::encode(&g), bytes);
    }

    #[test]
    fn dump_rejects_any_truncation(seed in any::<u64>(), cut in 1usize..200) {
        let bytes = dump::encode(&field(4, 3.0, 3, seed, 1.0));
        prop_assert!(dump::decode(&bytes[..bytes.len() - cut]).is_err());
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(seed in any::<u64>()) {
        let u = field(8, 6.0, 3, seed, 1.0);
        let p = leray_project(&u).unwrap();
        let pp = leray_project(&p).unwrap();
        let scale = p.max_abs();
        let div = divergence(&p).unwrap().max_abs();
        prop_assert!(div <= 1e-13 * scale * 8.0);
        for c in 0..3 {
            for (a, b) in p.component(c).iter().zip(pp.component(c)) {
                prop_assert!((a - b).norm() <= 1e-14 * scale);
            }
        }
    }

    #[test]
    fn products_of_real_fields_stay_real(s1 in any::<u64>(), s2 in any::<u64>()) {
        let u = field(8, 5.0, 1, s1, 2.0);
        let v = field(8, 5.0, 1, s2, 2.0);
        let w = dealiased_product(&u, &v).unwrap();
        prop_assert!(w.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn pm_norm_is_absolutely_homogeneous(seed in any::<u64>(), a in 0.0f64..3.0, s in -10.0f64..10.0) {
        let v = field(8, 4.0, 3, seed, 2.0);
        let mut w = v.clone();
        w.scale(Complex64::new(s, 0.0));
        let lhs = pm_norm(&w, a);
        let rhs = s.abs() * pm_norm(&v, a);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1e-300));
    }

    #[test]
    fn power_curves_satisfy_their_holder_bound(alpha in 0.51f64..1.0, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let curve = Curve::power([0.6, 0.8, 0.0], alpha).unwrap();
        let cert = curve.holder_certificate(2.0);
        let (a, b) = (curve.eval(s), curve.eval(t));
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        prop_assert!(d <= cert.constant * (s - t).abs().powf(alpha) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn solve_configs_round_trip(
        c in prop_oneof![1.01f64..100.0, -100.0f64..-1.01],
        alpha in 0.51f64..=1.0,
        steps in 2usize..500,
        n in prop::sample::select(vec![8usize, 16, 64, 96]),
        l in 0.5f64..100.0,
        tol in 1e-14f64..1e-2,
        seed in any::<u64>(),
        curve in prop::sample::select(vec!["const", "linear", "power"]),
    ) {
        let mut args = vec![
            "solve".to_string(), "--mode".into(), "omega".into(), "--c".into(), c.to_string(),
            "--curve".into(), curve.into(), "--N".into(), n.to_string(), "--L".into(), l.to_string(),
            "--steps".into(), steps.to_string(), "--tol".into(), tol.to_string(), "--seed".into(), seed.to_string(),
        ];
        if curve == "power" {
            args.push("--alpha".into());
            args.push(alpha.to_string());
        }
        let cfg = merge(parse_argv(args).unwrap(), None).unwrap();
        let text = cfg.canonical_text();
        let back = parse_config_text(&text).unwrap();
        prop_assert_eq!(back.canonical_text(), text);
        prop_assert_eq!(back.provenance_hash(), cfg.provenance_hash());
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn config_text_parser_never_panics(text in "[a-zA-Z=,.0-9#\\- \n]{0,200}") {
        let _ = parse_config_text(&text);
    }
}

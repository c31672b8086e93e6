use gelfand_core::constants::q_radius;
use gelfand_core::container::{self, Dtype};
use gelfand_core::coords::{build_lambda_grid, k_from_lambda, lambda_from_k, xi_for, Branch, Frame, LambdaPoint};
use gelfand_core::dbar::{cauchy_H0, LambdaField};
use gelfand_core::forward::{noise_matrix, opnorm, NoiseKind, NoiseModel};
use gelfand_core::{Vec3, C64};
use proptest::prelude::*;

fn lambda_strategy() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(lr, a)| C64::from_polar(lr.exp(), a))
}

fn p_strategy() -> impl Strategy<Value = Vec3> {
    // stays away from the nu = e3 axis
    (0.05f64..6.0, 0.1f64..3.04, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(r, pol, az)| Vec3::new(r * pol.sin() * az.cos(), r * pol.sin() * az.sin(), r * pol.cos()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lambda_round_trip(lambda in lambda_strategy(), p in p_strategy()) {
        let f = Frame::default();
        let k = k_from_lambda(&LambdaPoint { lambda, p }, &f).unwrap();
        let back = lambda_from_k(&k, &p, &f).unwrap();
        prop_assert!((back - lambda).norm() <= 1e-12 * lambda.norm().max(1.0 / lambda.norm()));
    }

    #[test]
    fn fibre_constraints_hold(lambda in lambda_strategy(), p in p_strategy()) {
        let f = Frame::default();
        let k = k_from_lambda(&LambdaPoint { lambda, p }, &f).unwrap();
        let scale = k.im.norm_squared().max(1.0);
        prop_assert!(k.square().norm() <= 1e-10 * scale);
        let pk = C64::new(p.norm_squared(), 0.0) - 2.0 * k.dot_real(&p);
        prop_assert!(pk.norm() <= 1e-10 * scale);
        let r = lambda.norm();
        let predicted = p.norm() * (r + 1.0 / r) / 4.0;
        prop_assert!((k.im.norm() - predicted).abs() <= 1e-10 * predicted.max(1.0));
        prop_assert!((k.re.norm() - predicted).abs() <= 1e-10 * predicted.max(1.0));
    }

    #[test]
    fn rotation_keeps_k_null(lambda in lambda_strategy(), p in p_strategy(), phi in -3.2f64..3.2) {
        let f = Frame::default();
        let k = k_from_lambda(&LambdaPoint { lambda, p }, &f).unwrap();
        let kx = k.shifted(&xi_for(&k, phi));
        let scale = k.im.norm_squared().max(1.0);
        prop_assert!(kx.square().norm() <= 1e-10 * scale);
        prop_assert!((kx.im.norm() - k.im.norm()).abs() <= 1e-10 * k.im.norm().max(1.0));
    }

    #[test]
    fn small_root_identity(r in 0.5001f64..1e6) {
        let q = q_radius(r).unwrap();
        prop_assert!(q > 0.0 && q < 1.0);
        prop_assert!((q + 1.0 / q - 4.0 * r).abs() <= 1e-12 * (4.0 * r).max(1.0));
    }

    #[test]
    fn branch_matches_modulus(lambda in lambda_strategy()) {
        let b = Branch::of(lambda);
        prop_assert_eq!(b == Branch::Plus, lambda.norm() < 1.0);
    }

    #[test]
    fn noise_norm_is_exact(seed in 0u64..1000, delta in 1e-9f64..1e-1, structured in any::<bool>()) {
        let kind = if structured { NoiseKind::RankStructured } else { NoiseKind::GaussianEntrywise };
        let e = noise_matrix(4, &NoiseModel { kind, delta, seed });
        prop_assert!((opnorm(&e) - delta).abs() <= 1e-2 * delta);
    }

    #[test]
    fn complex_container_round_trip(values in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
        let data: Vec<C64> = values.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("field");
        let h = container::header("test", vec![data.len()], Dtype::Complex128, vec![], "none").unwrap();
        container::write_complex(&stem, &h, &data).unwrap();
        let (h2, back) = container::read_complex(&stem).unwrap();
        prop_assert_eq!(h2.shape, vec![data.len()]);
        prop_assert!(back.iter().zip(&data).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cauchy_transform_is_linear(
        a in (-2.0f64..2.0, -2.0f64..2.0),
        c1 in prop::collection::vec(-1.0f64..1.0, 3),
        c2 in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let g = build_lambda_grid(3.0, 0.5, Vec3::z(), 3, 3, 8).unwrap();
        let ring = |c: &[f64]| LambdaField::from_fn(&g, |ip, b, j, a| {
            if j > 0 {
                return C64::new(0.0, 0.0);
            }
            let z = g.lambda(ip, b, 0, a);
            c[0] + z * c[1] + C64::new(0.0, c[2]) / z
        });
        let (f1, f2) = (ring(&c1), ring(&c2));
        let s = C64::new(a.0, a.1);
        let lhs = cauchy_H0(&f1.add(&f2.scaled(s)));
        let rhs = cauchy_H0(&f1).add(&cauchy_H0(&f2).scaled(s));
        prop_assert!(lhs.sub(&rhs).weighted_norm(0.0) <= 1e-12 * (1.0 + rhs.weighted_norm(0.0)));
    }
}

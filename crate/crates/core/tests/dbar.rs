use gelfand_core::boundary::ScatteringSlice;
use gelfand_core::coords::{build_lambda_grid, k_from_lambda, Branch, LambdaGrid, LambdaPoint};
use gelfand_core::dbar::{
    area_op_M, bracket_at, cauchy_H0, extract_vhat, naive_vhat, solve_H, solve_with, DbarOptions, LambdaField,
};
use gelfand_core::faddeev::{ComplexMomentum, RadialScattering, SolverOptions};
use gelfand_core::grid::VolumeGrid;
use gelfand_core::potential::Potential;
use gelfand_core::{Vec3, C64};

fn small_grid(n_angular: usize) -> LambdaGrid {
    build_lambda_grid(3.0, 0.5, Vec3::z(), 6, 6, n_angular).unwrap()
}

/// Ring values from `f(zeta)` on each branch, zero elsewhere.
fn ring_from(grid: &LambdaGrid, f: impl Fn(Branch, C64) -> C64) -> LambdaField {
    LambdaField::from_fn(grid, |ip, b, j, a| {
        if j == 0 {
            f(b, grid.lambda(ip, b, 0, a))
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn worst_interior(field: &LambdaField, b: Branch, exact: impl Fn(C64) -> C64) -> f64 {
    let g = &field.grid;
    let mut worst = 0.0f64;
    for ip in 0..g.n_p() {
        for j in 1..g.n_levels() {
            for a in 0..g.n_angular {
                let lam = g.lambda(ip, b, j, a);
                worst = worst.max((field.at(ip, b, j, a) - exact(lam)).norm());
            }
        }
    }
    worst
}

/// Smooth test field, constant in the angle of `lambda` as shell sampling requires.
fn test_field(grid: &LambdaGrid, amplitude: f64) -> LambdaField {
    LambdaField::from_fn(grid, |ip, b, j, _| {
        let t = grid.p_nodes[ip].norm();
        let sign = if b == Branch::Plus { 1.0 } else { 0.8 };
        C64::new(amplitude * sign * (-t * t).exp() * (1.0 + grid.rho / grid.levels[j]), 0.3 * amplitude * (-t).exp())
    })
}

#[test]
fn cauchy_reproduces_constants_on_both_branches() {
    let g = small_grid(16);
    let c = C64::new(0.7, -1.3);
    let h0 = cauchy_H0(&ring_from(&g, |_, _| c));
    for b in Branch::BOTH {
        assert!(worst_interior(&h0, b, |_| c) < 1e-13);
    }
}

#[test]
fn cauchy_reproduces_holomorphic_powers() {
    let g = small_grid(256);
    for n in 1..=4i32 {
        // zeta^n is holomorphic inside the plus ring, zeta^-n outside the minus ring
        let h0 = cauchy_H0(&ring_from(&g, |b, z| match b {
            Branch::Plus => z.powi(n),
            Branch::Minus => z.powi(-n),
        }));
        assert!(worst_interior(&h0, Branch::Plus, |l| l.powi(n)) < 1e-3, "n={n}");
        assert!(worst_interior(&h0, Branch::Minus, |l| l.powi(-n)) < 1e-3, "n={n}");
    }
}

#[test]
fn cauchy_error_shrinks_under_ring_refinement() {
    let err = |na: usize| {
        let g = small_grid(na);
        let h0 = cauchy_H0(&ring_from(&g, |_, z| (0.5 * z).exp()));
        worst_interior(&h0, Branch::Plus, |l| (0.5 * l).exp())
    };
    let (coarse, fine) = (err(4), err(16));
    assert!(fine < coarse && fine < 1e-12, "{coarse} -> {fine}");
}

#[test]
fn cauchy_is_linear() {
    let g = small_grid(16);
    let f1 = ring_from(&g, |_, z| z * z + 1.0);
    let f2 = ring_from(&g, |_, z| (z * 0.3).sin());
    let a = C64::new(0.4, 2.0);
    let lhs = cauchy_H0(&f1.add(&f2.scaled(a)));
    let rhs = cauchy_H0(&f1).add(&cauchy_H0(&f2).scaled(a));
    let d = lhs.sub(&rhs).weighted_norm(0.0);
    assert!(d < 1e-13 * rhs.weighted_norm(0.0));
}

#[test]
fn area_operator_is_quadratic() {
    let g = small_grid(8);
    let u = test_field(&g, 0.05);
    let (m1, _) = area_op_M(&u, 64).unwrap();
    for eps in [0.1, 3.0] {
        let (m2, _) = area_op_M(&u.scaled(C64::new(eps, 0.0)), 64).unwrap();
        let d = m2.sub(&m1.scaled(C64::new(eps * eps, 0.0))).weighted_norm(0.0);
        assert!(d <= 1e-10 * eps * eps * m1.weighted_norm(0.0), "eps={eps}: {d}");
    }
    let (zero, _) = area_op_M(&LambdaField::zeros(&g), 64).unwrap();
    assert!(zero.values.iter().all(|z| *z == C64::new(0.0, 0.0)));
    assert!(m1.weighted_norm(0.0) > 0.0);
}

#[test]
fn area_operator_constant_is_stable_under_refinement() {
    let ratio = |n_radial: usize| {
        let g = build_lambda_grid(3.0, 0.5, Vec3::z(), 8, n_radial, 8).unwrap();
        let u = test_field(&g, 0.05);
        let (m, _) = area_op_M(&u, 64).unwrap();
        m.weighted_norm(2.0) / u.weighted_norm(2.0).powi(2)
    };
    let (a, b) = (ratio(8), ratio(16));
    assert!((a / b - 1.0).abs() < 0.25, "{a} vs {b}");
}

#[test]
fn zero_data_solve_stops_at_once() {
    let g = small_grid(8);
    let (u, report) = solve_H(&LambdaField::zeros(&g), 1e-12, 30).unwrap();
    assert_eq!(report.iterations, 1);
    assert!(report.converged);
    assert!(u.values.iter().all(|z| *z == C64::new(0.0, 0.0)));
}

#[test]
fn weak_data_solution_follows_two_term_expansion() {
    let g = small_grid(8);
    let opts = DbarOptions {
        tol: 1e-18,
        max_iter: 12,
        n_phi: 64,
    };
    let defect = |eps: f64| {
        let h0 = test_field(&g, eps);
        let (u, _) = solve_with(&h0, &opts).unwrap();
        let (m0, _) = area_op_M(&h0, opts.n_phi).unwrap();
        u.sub(&h0).sub(&m0).weighted_norm(0.0)
    };
    let (d1, d2) = (defect(0.02), defect(0.01));
    let order = (d1 / d2).log2();
    assert!((order - 3.0).abs() < 0.2, "order {order} ({d1:e}, {d2:e})");
}

#[test]
fn extraction_returns_constant_field_value() {
    let g = small_grid(8);
    let c = C64::new(-0.25, 0.125);
    let f = LambdaField::from_fn(&g, |_, _, _, _| c);
    for b in Branch::BOTH {
        let v = extract_vhat(&f, b).unwrap();
        assert_eq!(v.values.len(), g.n_p());
        assert!(v.values.iter().all(|z| (z - c).norm() < 1e-14));
    }
}

#[test]
fn naive_values_are_the_canonical_ring_values() {
    let g = small_grid(8);
    let slice = ScatteringSlice::compute(&g, |pt| Ok(C64::new(pt.p().norm(), pt.k.re.x)));
    let naive = naive_vhat(&slice).unwrap();
    let a = g.canonical_angle();
    for ip in 0..g.n_p() {
        assert_eq!(naive.values[ip], slice.value(ip, Branch::Plus, a));
    }
    let zero = ScatteringSlice::compute(&g, |_| Ok(C64::new(0.0, 0.0)));
    assert!(naive_vhat(&zero).unwrap().values.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn exact_data_satisfy_the_dbar_equation() {
    // d H(k(lambda, p), p) / d conj(lambda) against {H, H} on exact amplitudes
    let v = Potential::reference(VolumeGrid::new(24, 1.1).unwrap()).unwrap();
    let exact = RadialScattering::new(&v, SolverOptions::default()).unwrap();
    let frame = gelfand_core::coords::Frame::default();
    let h = |k: &ComplexMomentum, p: &Vec3| exact.eval(k, p).ok();
    let p = frame.transverse() * 1.0;
    let (theta, omega) = frame.basis(&p).unwrap();
    let eval_at = |lam: C64| {
        let k = k_from_lambda(&LambdaPoint { lambda: lam, p }, &frame).unwrap();
        exact.eval(&k, &p).unwrap()
    };
    for lambda in [C64::from_polar(0.15, 0.7), C64::from_polar(0.1, 2.5)] {
        let step = 1e-5;
        let dx = (eval_at(lambda + step) - eval_at(lambda - step)) / (2.0 * step);
        let dy = (eval_at(lambda + C64::i() * step) - eval_at(lambda - C64::i() * step)) / (2.0 * step);
        let dbar = 0.5 * (dx + C64::i() * dy);
        let (br, tally) = bracket_at(lambda, &p, &theta, &omega, &h, &h, 128, None);
        assert_eq!(tally.clipped, 0);
        let rel = (dbar - br).norm() / br.norm();
        assert!(rel < 1e-3, "lambda={lambda}: {dbar} vs {br} ({rel:e})");
    }
}
